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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtnet/data.hpp"
#include "mtnet/model.hpp"

namespace mtnet {

double rmse(std::span<const double> truth, std::span<const double> pred);
double mae(std::span<const double> truth, std::span<const double> pred);

/// Root relative squared error over truth/pred[K x N].
///
/// By default the reference is the mean over the whole test matrix; with
/// `per_variable_mean` each row is centred on its own mean instead.
/// Throws NumericError when the denominator is zero.
double rrse(const Tensor& truth, const Tensor& pred, bool per_variable_mean = false);

struct CorrBreakdown {
  double mean = 0.0;
  /// Pearson correlation per variable; NaN where skipped.
  std::vector<double> per_variable;
  /// Variables skipped because truth or prediction had zero variance.
  std::size_t skipped = 0;
};

/// Per-variable Pearson correlation over time (rows of [K x N]) averaged over
/// non-degenerate variables. Throws NumericError if every variable is
/// degenerate.
CorrBreakdown corr_breakdown(const Tensor& truth, const Tensor& pred);
double corr(const Tensor& truth, const Tensor& pred);

struct EvalOptions {
  bool per_variable_rrse = false;
  bool collect_traces = true;
};

struct EvalReport {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  double rmse = 0.0;
  double mae = 0.0;
  double rrse = 0.0;
  double corr = 0.0;
  std::vector<double> per_variable_corr;
  std::size_t corr_skipped = 0;
  std::vector<std::size_t> target_times;
  Tensor truth;  // [K x N], original scale
  Tensor pred;   // [K x N], original scale
  std::vector<AttentionTrace> traces;
  std::string traces_path;
};

/// Fills every metric field from original-scale truth/pred[K x N].
EvalReport make_report(Tensor truth, Tensor pred, std::size_t horizon,
                       const EvalOptions& options = {});

/// Maps one sample to a scaled-space prediction. Models without attention
/// leave the trace weights empty.
using Predictor = std::function<Prediction(const WindowSample&)>;

/// Rolling evaluation: every sample conditions on observed history only.
/// Each sample passes audit_sample before use. Predictions and targets are
/// inverted to the original scale before metrics are taken.
EvalReport evaluate_predictor(const Predictor& predictor, const SampleSet& samples,
                              const Scaler& scaler, const MTNetConfig& cfg,
                              const EvalOptions& options = {});

/// Evaluates an MTNet model. `horizon` must equal the model's horizon.
EvalReport evaluate_model(const MTNetModel& model, const SampleSet& samples, const Scaler& scaler,
                          std::size_t horizon, const EvalOptions& options = {});

/// CSV: target_time, p_1..p_n, then start/end (end exclusive) per block.
std::string traces_to_csv(std::span<const AttentionTrace> traces);
std::vector<AttentionTrace> traces_from_csv(const std::string& text);
/// Writes the CSV to `path`. Throws ContractError on empty input.
void export_traces(std::span<const AttentionTrace> traces, const std::string& path);

std::string report_to_csv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace mtnet
