// Copyright 2026 The MTNet Forecasting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtnet/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "mtnet/errors.hpp"

namespace mtnet {

// ---------------------------------------------------------------------------
// Rng

double Rng::normal() {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Graph

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::constant(Tensor value) {
  require_finite(value, "constant");
  nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  require_finite(p.value, "parameter " + p.name);
  nodes_.push_back(Node{p.value, Tensor(), true, &p, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(const char* op, Tensor value, bool requires_grad, BackwardFn fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  Node node{std::move(value), Tensor(), requires_grad, nullptr, nullptr};
  if (requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& slot = grad_slot(id);
  for (std::size_t i = 0; i < g.numel(); ++i) slot[i] += g[i];
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw ContractError("backward: loss belongs to another graph");
  if (loss.value().numel() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        loss.value().shape().str());
  }
  if (backward_done_) throw ContractError("backward called twice on the same graph");
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  grad_slot(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    if (n.backward) {
      // Callbacks only touch earlier nodes' slots; nodes_ is never resized
      // during backward, so these references stay valid.
      n.backward(*this, n.value, n.grad);
    }
    if (n.param != nullptr) {
      Tensor& pg = n.param->grad;
      if (pg.shape() != n.grad.shape()) pg = Tensor(n.grad.shape(), 0.0);
      for (std::size_t i = 0; i < pg.numel(); ++i) pg[i] += n.grad[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

namespace {

Graph& same_graph(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw ContractError(std::string(op) + ": operands belong to different graphs");
  }
  return a.graph();
}

bool any_grad(Graph& g, std::initializer_list<Var> vs) {
  for (Var v : vs) {
    if (g.requires_grad(v.id())) return true;
  }
  return false;
}

void require_rank(Var v, std::size_t rank, const char* op) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " operand, got " + v.value().shape().str());
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.value().shape() != b.value().shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.value().shape().str() +
                         " vs " + b.value().shape().str());
  }
}

void require_scalar(Var s, const char* op) {
  if (s.value().numel() != 1) {
    throw DimensionError(std::string(op) + ": expected a scalar, got " +
                         s.value().shape().str());
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b, "matmul");
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + A.shape().str() + " x " +
                         B.shape().str());
  }
  Tensor out(Shape{m, n}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * B.at(p, j);
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record("matmul", std::move(out), any_grad(g, {a, b}),
                  [ia, ib, m, k, n](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& A = g.value(ia);
                    const Tensor& B = g.value(ib);
                    if (g.requires_grad(ia)) {
                      Tensor& ga = g.grad_slot(ia);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                          double s = 0.0;
                          for (std::size_t j = 0; j < n; ++j) s += go.at(i, j) * B.at(p, j);
                          ga.at(i, p) += s;
                        }
                    }
                    if (g.requires_grad(ib)) {
                      Tensor& gb = g.grad_slot(ib);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                          const double aip = A.at(i, p);
                          for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += aip * go.at(i, j);
                        }
                    }
                  });
}

Var vecmat(Var x, Var w) {
  Graph& g = same_graph(x, w, "vecmat");
  require_rank(x, 1, "vecmat");
  require_rank(w, 2, "vecmat");
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  const std::size_t k = W.rows(), n = W.cols();
  if (X.numel() != k) {
    throw DimensionError("vecmat: " + X.shape().str() + " x " + W.shape().str());
  }
  Tensor out(Shape{n}, 0.0);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) out[j] += X[p] * W.at(p, j);
  const std::size_t ix = x.id(), iw = w.id();
  return g.record("vecmat", std::move(out), any_grad(g, {x, w}),
                  [ix, iw, k, n](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& X = g.value(ix);
                    const Tensor& W = g.value(iw);
                    if (g.requires_grad(ix)) {
                      Tensor& gx = g.grad_slot(ix);
                      for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < n; ++j) s += go[j] * W.at(p, j);
                        gx[p] += s;
                      }
                    }
                    if (g.requires_grad(iw)) {
                      Tensor& gw = g.grad_slot(iw);
                      for (std::size_t p = 0; p < k; ++p)
                        for (std::size_t j = 0; j < n; ++j) gw.at(p, j) += X[p] * go[j];
                    }
                  });
}

Var matvec(Var w, Var x) {
  Graph& g = same_graph(w, x, "matvec");
  require_rank(w, 2, "matvec");
  require_rank(x, 1, "matvec");
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  const std::size_t m = W.rows(), k = W.cols();
  if (X.numel() != k) {
    throw DimensionError("matvec: " + W.shape().str() + " x " + X.shape().str());
  }
  Tensor out(Shape{m}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += W.at(i, p) * X[p];
    out[i] = s;
  }
  const std::size_t iw = w.id(), ix = x.id();
  return g.record("matvec", std::move(out), any_grad(g, {w, x}),
                  [iw, ix, m, k](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& W = g.value(iw);
                    const Tensor& X = g.value(ix);
                    if (g.requires_grad(iw)) {
                      Tensor& gw = g.grad_slot(iw);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) gw.at(i, p) += go[i] * X[p];
                    }
                    if (g.requires_grad(ix)) {
                      Tensor& gx = g.grad_slot(ix);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) gx[p] += go[i] * W.at(i, p);
                    }
                  });
}

Var dot(Var a, Var b) {
  Graph& g = same_graph(a, b, "dot");
  require_rank(a, 1, "dot");
  require_same_shape(a, b, "dot");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A[i] * B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record("dot", Tensor::scalar(s), any_grad(g, {a, b}),
                  [ia, ib](Graph& g, const Tensor&, const Tensor& go) {
                    const double d = go[0];
                    const Tensor& A = g.value(ia);
                    const Tensor& B = g.value(ib);
                    if (g.requires_grad(ia)) {
                      Tensor& ga = g.grad_slot(ia);
                      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += d * B[i];
                    }
                    if (g.requires_grad(ib)) {
                      Tensor& gb = g.grad_slot(ib);
                      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += d * A[i];
                    }
                  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b, "add");
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record("add", std::move(out), any_grad(g, {a, b}),
                  [ia, ib](Graph& g, const Tensor&, const Tensor& go) {
                    g.accumulate(ia, go);
                    g.accumulate(ib, go);
                  });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record("sub", std::move(out), any_grad(g, {a, b}),
                  [ia, ib](Graph& g, const Tensor&, const Tensor& go) {
                    g.accumulate(ia, go);
                    if (g.requires_grad(ib)) {
                      Tensor& gb = g.grad_slot(ib);
                      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= go[i];
                    }
                  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b, "mul");
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record("mul", std::move(out), any_grad(g, {a, b}),
                  [ia, ib](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& A = g.value(ia);
                    const Tensor& B = g.value(ib);
                    if (g.requires_grad(ia)) {
                      Tensor& ga = g.grad_slot(ia);
                      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += go[i] * B[i];
                    }
                    if (g.requires_grad(ib)) {
                      Tensor& gb = g.grad_slot(ib);
                      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += go[i] * A[i];
                    }
                  });
}

Var add_scalar(Var x, Var s) {
  Graph& g = same_graph(x, s, "add_scalar");
  require_scalar(s, "add_scalar");
  Tensor out = x.value();
  const double c = s.value()[0];
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += c;
  const std::size_t ix = x.id(), is = s.id();
  return g.record("add_scalar", std::move(out), any_grad(g, {x, s}),
                  [ix, is](Graph& g, const Tensor&, const Tensor& go) {
                    g.accumulate(ix, go);
                    if (g.requires_grad(is)) {
                      double t = 0.0;
                      for (std::size_t i = 0; i < go.numel(); ++i) t += go[i];
                      g.grad_slot(is)[0] += t;
                    }
                  });
}

Var scale_by(Var x, Var s) {
  Graph& g = same_graph(x, s, "scale_by");
  require_scalar(s, "scale_by");
  Tensor out = x.value();
  const double c = s.value()[0];
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  const std::size_t ix = x.id(), is = s.id();
  return g.record("scale_by", std::move(out), any_grad(g, {x, s}),
                  [ix, is](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& X = g.value(ix);
                    const double c = g.value(is)[0];
                    if (g.requires_grad(ix)) {
                      Tensor& gx = g.grad_slot(ix);
                      for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += go[i] * c;
                    }
                    if (g.requires_grad(is)) {
                      double t = 0.0;
                      for (std::size_t i = 0; i < go.numel(); ++i) t += go[i] * X[i];
                      g.grad_slot(is)[0] += t;
                    }
                  });
}

Var scale(Var x, double c) {
  Graph& g = x.graph();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  const std::size_t ix = x.id();
  return g.record("scale", std::move(out), g.requires_grad(ix),
                  [ix, c](Graph& g, const Tensor&, const Tensor& go) {
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += go[i] * c;
                  });
}

Var one_minus(Var x) {
  Graph& g = x.graph();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 - out[i];
  const std::size_t ix = x.id();
  return g.record("one_minus", std::move(out), g.requires_grad(ix),
                  [ix](Graph& g, const Tensor&, const Tensor& go) {
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] -= go[i];
                  });
}

Var relu(Var x) {
  Graph& g = x.graph();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  const std::size_t ix = x.id();
  return g.record("relu", std::move(out), g.requires_grad(ix),
                  [ix](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& X = g.value(ix);
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) {
                      if (X[i] > 0.0) gx[i] += go[i];
                    }
                  });
}

Var sigmoid(Var x) {
  Graph& g = x.graph();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double v = out[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  const std::size_t ix = x.id();
  return g.record("sigmoid", std::move(out), g.requires_grad(ix),
                  [ix](Graph& g, const Tensor& y, const Tensor& go) {
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
                  });
}

Var abs(Var x) {
  Graph& g = x.graph();
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::fabs(out[i]);
  const std::size_t ix = x.id();
  return g.record("abs", std::move(out), g.requires_grad(ix),
                  [ix](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& X = g.value(ix);
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) {
                      if (X[i] > 0.0) {
                        gx[i] += go[i];
                      } else if (X[i] < 0.0) {
                        gx[i] -= go[i];
                      }
                    }
                  });
}

Var softmax(Var x, double total) {
  Graph& g = x.graph();
  require_rank(x, 1, "softmax");
  const Tensor& X = x.value();
  double mx = X[0];
  for (double v : X.data()) mx = std::max(mx, v);
  Tensor out(X.shape(), 0.0);
  // Shifted logits are floored so exp stays a positive normal number.
  constexpr double kLogitFloor = -700.0;
  double z = 0.0;
  for (std::size_t i = 0; i < X.numel(); ++i) {
    out[i] = std::exp(std::max(X[i] - mx, kLogitFloor));
    z += out[i];
  }
  // Multiplying before dividing keeps equal logits at exactly total / n.
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = out[i] * total / z;
  const std::size_t ix = x.id();
  return g.record("softmax", std::move(out), g.requires_grad(ix),
                  [ix, total](Graph& g, const Tensor& y, const Tensor& go) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < y.numel(); ++i) s += go[i] * y[i];
                    s /= total;
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += y[i] * (go[i] - s);
                  });
}

Var sum(Var x) {
  Graph& g = x.graph();
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  return g.record("sum", Tensor::scalar(s), g.requires_grad(ix),
                  [ix](Graph& g, const Tensor&, const Tensor& go) {
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += go[0];
                  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  Graph& g = parts[0].graph();
  std::vector<double> data;
  std::vector<std::size_t> ids;
  bool rg = false;
  for (Var p : parts) {
    if (&p.graph() != &g) throw ContractError("concat: parts belong to different graphs");
    require_rank(p, 1, "concat");
    const auto v = p.value().data();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(p.id());
    rg = rg || g.requires_grad(p.id());
  }
  const std::size_t total = data.size();
  return g.record("concat", Tensor(Shape{total}, std::move(data)), rg,
                  [ids](Graph& g, const Tensor&, const Tensor& go) {
                    std::size_t off = 0;
                    for (std::size_t id : ids) {
                      const std::size_t len = g.value(id).numel();
                      if (g.requires_grad(id)) {
                        Tensor& gp = g.grad_slot(id);
                        for (std::size_t i = 0; i < len; ++i) gp[i] += go[off + i];
                      }
                      off += len;
                    }
                  });
}

Var element(Var x, std::size_t i) {
  Graph& g = x.graph();
  require_rank(x, 1, "element");
  if (i >= x.value().numel()) throw DimensionError("element: index out of range");
  const std::size_t ix = x.id();
  return g.record("element", Tensor::scalar(x.value()[i]), g.requires_grad(ix),
                  [ix, i](Graph& g, const Tensor&, const Tensor& go) { g.grad_slot(ix)[i] += go[0]; });
}

Var column(Var m, std::size_t j) {
  Graph& g = m.graph();
  require_rank(m, 2, "column");
  const Tensor& M = m.value();
  const std::size_t r = M.rows(), c = M.cols();
  if (j >= c) throw DimensionError("column: index out of range");
  Tensor out(Shape{r}, 0.0);
  for (std::size_t i = 0; i < r; ++i) out[i] = M.at(i, j);
  const std::size_t im = m.id();
  return g.record("column", std::move(out), g.requires_grad(im),
                  [im, j, r](Graph& g, const Tensor&, const Tensor& go) {
                    Tensor& gm = g.grad_slot(im);
                    for (std::size_t i = 0; i < r; ++i) gm.at(i, j) += go[i];
                  });
}

Var scale_columns(Var m, Var a) {
  Graph& g = same_graph(m, a, "scale_columns");
  require_rank(m, 2, "scale_columns");
  require_rank(a, 1, "scale_columns");
  const Tensor& M = m.value();
  const Tensor& A = a.value();
  const std::size_t r = M.rows(), c = M.cols();
  if (A.numel() != c) {
    throw DimensionError("scale_columns: " + M.shape().str() + " with weights " +
                         A.shape().str());
  }
  Tensor out = M;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) *= A[j];
  const std::size_t im = m.id(), ia = a.id();
  return g.record("scale_columns", std::move(out), any_grad(g, {m, a}),
                  [im, ia, r, c](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& M = g.value(im);
                    const Tensor& A = g.value(ia);
                    if (g.requires_grad(im)) {
                      Tensor& gm = g.grad_slot(im);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) gm.at(i, j) += go.at(i, j) * A[j];
                    }
                    if (g.requires_grad(ia)) {
                      Tensor& ga = g.grad_slot(ia);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) ga[j] += go.at(i, j) * M.at(i, j);
                    }
                  });
}

Var conv_full_height(Var x, Var kernels, Var bias) {
  Graph& g = same_graph(x, kernels, "conv_full_height");
  same_graph(x, bias, "conv_full_height");
  require_rank(x, 2, "conv_full_height");
  require_rank(kernels, 3, "conv_full_height");
  require_rank(bias, 1, "conv_full_height");
  const Tensor& X = x.value();
  const Tensor& K = kernels.value();
  const std::size_t D = X.rows(), T = X.cols();
  const std::size_t dc = K.shape()[0], w = K.shape()[2];
  if (K.shape()[1] != D) {
    throw DimensionError("conv_full_height: kernel height " + std::to_string(K.shape()[1]) +
                         " does not match input variables " + std::to_string(D));
  }
  if (bias.value().numel() != dc) {
    throw DimensionError("conv_full_height: bias length does not match filter count");
  }
  if (w > T) {
    throw DimensionError("conv_full_height: window " + std::to_string(w) +
                         " exceeds time length " + std::to_string(T));
  }
  const std::size_t tc = T - w + 1;
  const Tensor& B = bias.value();
  Tensor out(Shape{dc, tc}, 0.0);
  for (std::size_t f = 0; f < dc; ++f)
    for (std::size_t t = 0; t < tc; ++t) {
      double s = B[f];
      for (std::size_t v = 0; v < D; ++v)
        for (std::size_t l = 0; l < w; ++l) s += K.at(f, v, l) * X.at(v, t + l);
      out.at(f, t) = s;
    }
  const std::size_t ix = x.id(), ik = kernels.id(), ib = bias.id();
  return g.record("conv_full_height", std::move(out), any_grad(g, {x, kernels, bias}),
                  [ix, ik, ib, D, dc, w, tc](Graph& g, const Tensor&, const Tensor& go) {
                    const Tensor& X = g.value(ix);
                    const Tensor& K = g.value(ik);
                    if (g.requires_grad(ib)) {
                      Tensor& gb = g.grad_slot(ib);
                      for (std::size_t f = 0; f < dc; ++f)
                        for (std::size_t t = 0; t < tc; ++t) gb[f] += go.at(f, t);
                    }
                    if (g.requires_grad(ik)) {
                      Tensor& gk = g.grad_slot(ik);
                      for (std::size_t f = 0; f < dc; ++f)
                        for (std::size_t t = 0; t < tc; ++t) {
                          const double d = go.at(f, t);
                          for (std::size_t v = 0; v < D; ++v)
                            for (std::size_t l = 0; l < w; ++l) gk.at(f, v, l) += d * X.at(v, t + l);
                        }
                    }
                    if (g.requires_grad(ix)) {
                      Tensor& gx = g.grad_slot(ix);
                      for (std::size_t f = 0; f < dc; ++f)
                        for (std::size_t t = 0; t < tc; ++t) {
                          const double d = go.at(f, t);
                          for (std::size_t v = 0; v < D; ++v)
                            for (std::size_t l = 0; l < w; ++l) gx.at(v, t + l) += d * K.at(f, v, l);
                        }
                    }
                  });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  Graph& g = x.graph();
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.value().shape(), 0.0);
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;
  }
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= mask[i];
  const std::size_t ix = x.id();
  return g.record("dropout", std::move(out), g.requires_grad(ix),
                  [ix, mask](Graph& g, const Tensor&, const Tensor& go) {
                    Tensor& gx = g.grad_slot(ix);
                    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += go[i] * mask[i];
                  });
}

}  // namespace mtnet
