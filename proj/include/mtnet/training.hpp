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
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtnet/data.hpp"
#include "mtnet/model.hpp"

namespace mtnet {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 200;
  /// Epochs without validation improvement before stopping.
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double grad_clip_norm = 10.0;

  /// Checks the user-facing invariants (learning_rate > 0 among them).
  void validate() const;
};

/// Mean over samples of the summed absolute error across targets.
double l1_loss(std::span<const Tensor> pred, std::span<const Tensor> truth);
/// Differentiable version over predictions recorded on one graph.
Var l1_loss(std::span<const Var> pred, std::span<const Tensor> truth);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

/// Bias-corrected Adam update in name order, then zeroes the gradients.
/// Throws NumericError naming the first parameter with a non-finite grad.
void adam_step(std::span<Parameter* const> params, AdamState& state, double learning_rate);
void adam_step(MTNetParams& params, AdamState& state, double learning_rate);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

/// Tracks the best validation loss and epochs since it last improved.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when `loss` is a new best.
  bool update(double loss);
  bool should_stop() const { return stale_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_loss = 0.0;
  bool stopped_early = false;
};

struct FitResult {
  MTNetParams best;
  TrainHistory history;
};

/// Eval-mode L1 loss over a sample set.
double evaluate_loss(const MTNetModel& model, const SampleSet& samples);

/// Trains with seeded mini-batch Adam and early stopping on validation L1.
/// On return model.params holds the best-validation parameters.
/// A learning rate of 0 is accepted here and freezes the parameters.
FitResult fit(MTNetModel& model, const SampleSet& train, const SampleSet& valid,
              const TrainConfig& cfg);

/// Scaled series plus its chronological split.
struct Dataset {
  std::shared_ptr<const Tensor> values;
  Split split;
};

/// Axes of the hyperparameter grid. Empty axes fall back to the base config.
struct GridSpec {
  std::vector<std::size_t> hidden_sizes;  // applied to both d and d_c
  std::vector<std::size_t> windows;       // T
  std::vector<double> learning_rates;

  static GridSpec defaults();
};

struct GridRow {
  std::size_t index = 0;
  MTNetConfig config;
  TrainConfig train;
  double valid_loss = 0.0;
  bool ok = false;
  std::string error;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;
  MTNetModel best_model;
  TrainHistory best_history;
};

/// Trains one model per grid point (seed + index) and keeps the lowest
/// validation loss, ties broken by grid order. A failing point is recorded
/// in its row and does not stop the search.
GridResult grid_search(const Dataset& data, const MTNetConfig& base, const GridSpec& grid,
                       const TrainConfig& cfg);

}  // namespace mtnet
