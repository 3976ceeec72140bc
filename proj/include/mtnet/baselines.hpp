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
#include <span>
#include <vector>

#include "mtnet/data.hpp"
#include "mtnet/evaluation.hpp"

namespace mtnet {

/// Direct h-step linear autoregression, one coefficient vector per target:
/// y_{t+h} = sum_j coefficients[j] * y_{t-j} + intercept.
/// A ridge penalty of zero gives plain least-squares AR.
struct LinearARModel {
  std::size_t window = 1;  // p
  std::size_t horizon = 1;
  double lambda = 0.0;
  std::vector<std::size_t> targets;
  std::vector<std::vector<double>> coefficients;  // [K][p]
  std::vector<double> intercepts;                 // [K]
};

/// Least squares on values[:, range] with penalty lambda * ||coefficients||^2
/// (the intercept is not penalised), solved through the normal equations.
/// Throws NumericError when the system is singular.
LinearARModel fit_linear_ar(const Tensor& values, TimeRange range, std::size_t window,
                            double lambda, std::size_t horizon,
                            std::span<const std::size_t> targets);

/// Evaluates the model on the last `window` columns of history[D x L].
Tensor predict_linear(const LinearARModel& model, const Tensor& history);

/// Rolling evaluation over target times in `range`; values are scaled and
/// metrics are computed after inverting with `scaler`.
EvalReport evaluate_linear(const LinearARModel& model, const Tensor& values, TimeRange range,
                           const Scaler& scaler, const EvalOptions& options = {});

struct LinearGridRow {
  std::size_t window = 0;
  double lambda = 0.0;
  double valid_rrse = 0.0;
  bool ok = false;
};

struct LinearSelection {
  LinearARModel model;
  std::vector<LinearGridRow> rows;
};

/// Fits every (window, lambda) pair on split.train and keeps the lowest
/// validation RRSE, ties broken by grid order.
LinearSelection select_linear_ar(const Tensor& values, const Split& split, const Scaler& scaler,
                                 std::span<const std::size_t> windows,
                                 std::span<const double> lambdas, std::size_t horizon,
                                 std::span<const std::size_t> targets);

/// {2^-10, 2^-8, ..., 2^10}.
std::vector<double> default_ridge_lambdas();
/// {2^0, ..., 2^9}.
std::vector<std::size_t> default_ar_windows();

/// Solves the symmetric positive definite system a x = b in place via
/// Cholesky. Throws NumericError on a non-positive pivot.
std::vector<double> solve_spd(Tensor a, std::vector<double> b);

}  // namespace mtnet
