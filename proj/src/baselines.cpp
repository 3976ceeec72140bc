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

#include "mtnet/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "mtnet/errors.hpp"

namespace mtnet {

std::vector<double> solve_spd(Tensor a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.rank() != 2 || a.cols() != n || b.size() != n) {
    throw DimensionError("solve_spd: expected square system, got " + a.shape().str());
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a.at(i, i)));
  const double tol = 1e-12 * std::max(max_diag, 1e-300);

  // Lower-triangular factor overwrites a.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
    if (!(d > tol)) {
      throw NumericError("normal equations are singular (pivot " + std::to_string(j) +
                         "); use a ridge penalty lambda > 0");
    }
    const double l = std::sqrt(d);
    a.at(j, j) = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
      a.at(i, j) = s / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a.at(i, k) * b[k];
    b[i] = s / a.at(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a.at(k, i) * b[k];
    b[i] = s / a.at(i, i);
  }
  return b;
}

namespace {

struct NormalEquations {
  Tensor gram;  // [(p + 1) x (p + 1)], last row/col is the intercept
  std::vector<double> rhs;
};

NormalEquations build_normal_equations(const Tensor& values, TimeRange range, std::size_t p,
                                       std::size_t h, std::size_t var) {
  const std::size_t m = p + 1;
  NormalEquations ne{Tensor(Shape{m, m}, 0.0), std::vector<double>(m, 0.0)};
  std::vector<double> x(m, 1.0);
  for (std::size_t t = range.begin + p - 1; t + h < range.end; ++t) {
    for (std::size_t j = 0; j < p; ++j) x[j] = values.at(var, t - j);
    const double y = values.at(var, t + h);
    for (std::size_t a = 0; a < m; ++a) {
      ne.rhs[a] += x[a] * y;
      for (std::size_t b = a; b < m; ++b) ne.gram.at(a, b) += x[a] * x[b];
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < a; ++b) ne.gram.at(a, b) = ne.gram.at(b, a);
  return ne;
}

void check_fit_args(const Tensor& values, TimeRange range, std::size_t p, double lambda,
                    std::size_t h, std::span<const std::size_t> targets) {
  if (p < 1) throw ConfigError("linear AR: window must be >= 1");
  if (h < 1) throw ConfigError("linear AR: horizon must be >= 1");
  if (!(lambda >= 0.0)) throw ConfigError("linear AR: lambda must be >= 0");
  if (range.end > values.cols()) throw DimensionError("linear AR: range exceeds series");
  if (range.size() <= p + h) {
    throw ConfigError("linear AR: training range of " + std::to_string(range.size()) +
                      " steps is too short for window " + std::to_string(p) + " and horizon " +
                      std::to_string(h));
  }
  if (targets.empty()) throw ConfigError("linear AR: no target variables");
  for (std::size_t v : targets) {
    if (v >= values.rows()) throw ConfigError("linear AR: target index out of range");
  }
}

void solve_into(LinearARModel& model, const NormalEquations& ne, double lambda) {
  Tensor a = ne.gram;
  const std::size_t p = model.window;
  for (std::size_t j = 0; j < p; ++j) a.at(j, j) += lambda;
  std::vector<double> sol = solve_spd(std::move(a), ne.rhs);
  model.intercepts.push_back(sol[p]);
  sol.resize(p);
  model.coefficients.push_back(std::move(sol));
}

}  // namespace

LinearARModel fit_linear_ar(const Tensor& values, TimeRange range, std::size_t window,
                            double lambda, std::size_t horizon,
                            std::span<const std::size_t> targets) {
  check_fit_args(values, range, window, lambda, horizon, targets);
  LinearARModel model;
  model.window = window;
  model.horizon = horizon;
  model.lambda = lambda;
  model.targets.assign(targets.begin(), targets.end());
  for (std::size_t v : targets) {
    solve_into(model, build_normal_equations(values, range, window, horizon, v), lambda);
  }
  return model;
}

Tensor predict_linear(const LinearARModel& model, const Tensor& history) {
  const std::size_t L = history.rank() == 2 ? history.cols() : 0;
  if (L < model.window) {
    throw DimensionError("predict_linear: history of " + std::to_string(L) +
                         " steps is shorter than window " + std::to_string(model.window));
  }
  Tensor out(Shape{model.targets.size()}, 0.0);
  for (std::size_t k = 0; k < model.targets.size(); ++k) {
    const std::size_t v = model.targets[k];
    if (v >= history.rows()) throw DimensionError("predict_linear: target index out of range");
    double s = 0.0;
    for (std::size_t j = 0; j < model.window; ++j) {
      s += model.coefficients[k][j] * history.at(v, L - 1 - j);
    }
    out[k] = s + model.intercepts[k];
  }
  return out;
}

EvalReport evaluate_linear(const LinearARModel& model, const Tensor& values, TimeRange range,
                           const Scaler& scaler, const EvalOptions& options) {
  const std::size_t p = model.window, h = model.horizon, D = values.rows();
  const std::size_t first = std::max(range.begin, p + h - 1);
  const std::size_t end = std::min(range.end, values.cols());
  if (first >= end) throw ContractError("evaluate_linear: no eligible target times in range");
  const std::size_t K = model.targets.size(), N = end - first;
  Tensor truth(Shape{K, N}, 0.0), pred(Shape{K, N}, 0.0);
  Tensor history(Shape{D, p}, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const std::size_t t = first + j;
    const std::size_t start = t - h - p + 1;
    for (std::size_t v = 0; v < D; ++v)
      for (std::size_t l = 0; l < p; ++l) history.at(v, l) = values.at(v, start + l);
    Tensor target(Shape{K}, 0.0);
    for (std::size_t k = 0; k < K; ++k) target[k] = values.at(model.targets[k], t);
    const Tensor y = scaler.invert_targets(target, model.targets);
    const Tensor yhat = scaler.invert_targets(predict_linear(model, history), model.targets);
    for (std::size_t k = 0; k < K; ++k) {
      truth.at(k, j) = y[k];
      pred.at(k, j) = yhat[k];
    }
  }
  return make_report(std::move(truth), std::move(pred), h, options);
}

LinearSelection select_linear_ar(const Tensor& values, const Split& split, const Scaler& scaler,
                                 std::span<const std::size_t> windows,
                                 std::span<const double> lambdas, std::size_t horizon,
                                 std::span<const std::size_t> targets) {
  if (windows.empty() || lambdas.empty()) throw ConfigError("linear AR grid is empty");
  LinearSelection sel;
  bool have_best = false;
  double best = 0.0;
  for (std::size_t p : windows) {
    std::vector<NormalEquations> eqs;
    bool feasible = true;
    try {
      check_fit_args(values, split.train, p, 0.0, horizon, targets);
      for (std::size_t v : targets) {
        eqs.push_back(build_normal_equations(values, split.train, p, horizon, v));
      }
    } catch (const ConfigError&) {
      feasible = false;
    }
    for (double lambda : lambdas) {
      LinearGridRow row{p, lambda, 0.0, false};
      if (feasible) {
        try {
          LinearARModel m;
          m.window = p;
          m.horizon = horizon;
          m.lambda = lambda;
          m.targets.assign(targets.begin(), targets.end());
          for (const NormalEquations& ne : eqs) solve_into(m, ne, lambda);
          row.valid_rrse = evaluate_linear(m, values, split.valid, scaler).rrse;
          row.ok = true;
          if (!have_best || row.valid_rrse < best) {
            best = row.valid_rrse;
            sel.model = std::move(m);
            have_best = true;
          }
        } catch (const Error&) {
          row.ok = false;
        }
      }
      sel.rows.push_back(row);
    }
  }
  if (!have_best) throw NumericError("linear AR: no grid point could be fitted");
  return sel;
}

std::vector<double> default_ridge_lambdas() {
  std::vector<double> out;
  for (int e = -10; e <= 10; e += 2) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<std::size_t> default_ar_windows() {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e <= 9; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

}  // namespace mtnet
