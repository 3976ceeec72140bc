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

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtnet/random.hpp"
#include "mtnet/tensor.hpp"

namespace mtnet {

class Graph;

/// Handle to a value recorded on a Graph. Cheap to copy.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so reverse insertion order is a
/// valid topological order for backward. A graph is single-use: build it,
/// call backward once, then discard it.
class Graph {
 public:
  /// Receives the node's value and gradient and pushes contributions to the
  /// node's inputs.
  using BackwardFn =
      std::function<void(Graph&, const Tensor& out_value, const Tensor& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to `p`; backward adds d(loss)/d(p.value) into p.grad.
  Var param(Parameter& p);

  /// Appends an operation result. `op` names the operation in diagnostics.
  Var record(const char* op, Tensor value, bool requires_grad, BackwardFn fn);

  /// Populates gradients of every reachable node and accumulates into the
  /// bound parameters' grad tensors.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient of the loss w.r.t. node `v`; zeros if unreachable.
  Tensor grad(Var v) const;

  /// Adds `g` into the gradient slot of node `id` (no-op for constants).
  void accumulate(std::size_t id, const Tensor& g);
  /// Mutable gradient slot, allocated on first use. Only valid for nodes
  /// that require grad.
  Tensor& grad_slot(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;  // stable references across appends
  bool backward_done_ = false;
};

// Differentiable operations. All operands must live on the same graph.

Var matmul(Var a, Var b);
/// Row vector times matrix: x[k] * W[k x n] -> [n].
Var vecmat(Var x, Var w);
/// Matrix times column vector: W[m x k] * x[k] -> [m].
Var matvec(Var w, Var x);
/// Inner product of two vectors, returned as a scalar.
Var dot(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// Adds the single-element tensor `s` to every entry of `x`.
Var add_scalar(Var x, Var s);
/// Multiplies every entry of `x` by the single-element tensor `s`.
Var scale_by(Var x, Var s);
Var scale(Var x, double c);
/// 1 - x, elementwise.
Var one_minus(Var x);

/// max(0, x). The subgradient at exactly 0 is taken as 0.
Var relu(Var x);
Var sigmoid(Var x);
Var abs(Var x);
/// Softmax of a vector scaled to sum to `total`, computed with max subtraction.
/// Logits more than 700 below the maximum are raised to that gap, so every
/// entry stays strictly positive.
Var softmax(Var x, double total = 1.0);
Var sum(Var x);

/// Concatenates vectors left to right.
Var concat(std::span<const Var> parts);
/// Entry `i` of a vector as a scalar.
Var element(Var x, std::size_t i);
/// Column `j` of a matrix as a vector.
Var column(Var m, std::size_t j);
/// Scales column j of m[r x c] by a[j].
Var scale_columns(Var m, Var a);

/// Valid correlation over time with kernels spanning the full variable axis.
/// x[D x T], kernels[d_c x D x w], bias[d_c] -> [d_c x (T - w + 1)].
/// No activation is applied.
Var conv_full_height(Var x, Var kernels, Var bias);

/// Inverted dropout. Identity (the same node) when !training or rate == 0.
Var dropout(Var x, double rate, bool training, Rng& rng);

}  // namespace mtnet
