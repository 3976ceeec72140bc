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

#include "mtnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtnet/errors.hpp"

namespace mtnet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
}

double l1_loss(std::span<const Tensor> pred, std::span<const Tensor> truth) {
  if (pred.empty()) throw ContractError("l1_loss: empty batch");
  if (pred.size() != truth.size()) throw DimensionError("l1_loss: batch sizes differ");
  double total = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (pred[j].shape() != truth[j].shape()) {
      throw DimensionError("l1_loss: shape mismatch " + pred[j].shape().str() + " vs " +
                           truth[j].shape().str());
    }
    for (std::size_t i = 0; i < pred[j].numel(); ++i) total += std::fabs(pred[j][i] - truth[j][i]);
  }
  return total / static_cast<double>(pred.size());
}

Var l1_loss(std::span<const Var> pred, std::span<const Tensor> truth) {
  if (pred.empty()) throw ContractError("l1_loss: empty batch");
  if (pred.size() != truth.size()) throw DimensionError("l1_loss: batch sizes differ");
  Graph& g = pred[0].graph();
  std::vector<Var> terms;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    terms.push_back(sum(abs(sub(pred[j], g.constant(truth[j])))));
  }
  return scale(sum(concat(terms)), 1.0 / static_cast<double>(pred.size()));
}

void adam_step(std::span<Parameter* const> params, AdamState& s, double lr) {
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("adam: non-finite gradient in parameter " + p->name);
    }
  }
  std::vector<Parameter*> ordered(params.begin(), params.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const Parameter* a, const Parameter* b) { return a->name < b->name; });

  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (Parameter* p : ordered) {
    Tensor& m = s.first_moment[p->name];
    Tensor& v = s.second_moment[p->name];
    if (m.shape() != p->value.shape()) m = Tensor(p->value.shape(), 0.0);
    if (v.shape() != p->value.shape()) v = Tensor(p->value.shape(), 0.0);
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double g = p->grad[i];
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p->value[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
    p->zero_grad();
  }
}

void adam_step(MTNetParams& params, AdamState& state, double lr) {
  const std::vector<Parameter*> list = params.sorted();
  adam_step(list, state, lr);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.data()) g *= factor;
  }
  return norm;
}

bool EarlyStopping::update(double loss) {
  if (!has_best_ || loss < best_) {
    best_ = loss;
    has_best_ = true;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

double evaluate_loss(const MTNetModel& model, const SampleSet& samples) {
  if (samples.empty()) throw ContractError("evaluate_loss: no samples");
  std::vector<Tensor> preds, truth;
  preds.reserve(samples.size());
  truth.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const WindowSample s = samples[i];
    preds.push_back(predict(model, s).value);
    truth.push_back(s.target);
  }
  return l1_loss(preds, truth);
}

FitResult fit(MTNetModel& model, const SampleSet& train, const SampleSet& valid,
              const TrainConfig& cfg) {
  if (train.empty()) throw ContractError("fit: empty training set");
  if (valid.empty()) throw ContractError("fit: empty validation set");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");

  const std::vector<Parameter*> params = model.params.sorted();
  model.params.zero_grad();
  AdamState adam;
  EarlyStopping stopper(cfg.patience);
  FitResult result{model.params, {}};

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(Rng::derive(cfg.seed, 2 * epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    Rng dropout_rng(Rng::derive(cfg.seed, 2 * epoch + 1));

    double epoch_loss = 0.0;
    try {
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t stop = std::min(n, start + cfg.batch_size);
        const double weight = 1.0 / static_cast<double>(stop - start);
        for (std::size_t j = start; j < stop; ++j) {
          const WindowSample sample = train[order[j]];
          Graph g;
          const MTNetVars vars = bind(g, model.params);
          ForwardResult r = forward(g, sample, vars, model.config, true, dropout_rng);
          Var err = sum(abs(sub(r.prediction, g.constant(sample.target))));
          epoch_loss += err.value()[0];
          g.backward(scale(err, weight));
        }
        clip_grad_norm(params, cfg.grad_clip_norm);
        adam_step(params, adam, cfg.learning_rate);
      }
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }

    double valid_loss = 0.0;
    try {
      valid_loss = evaluate_loss(model, valid);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(valid_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         ": validation loss is not finite");
    }

    result.history.epochs.push_back({epoch, epoch_loss / static_cast<double>(n), valid_loss});
    if (stopper.update(valid_loss)) {
      result.best = model.params;
      result.history.best_epoch = epoch;
      result.history.best_valid_loss = valid_loss;
    }
    if (stopper.should_stop()) {
      result.history.stopped_early = true;
      break;
    }
  }
  model.params = result.best;
  model.params.zero_grad();
  return result;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.hidden_sizes = {32, 50, 100};
  for (std::size_t e = 0; e <= 9; ++e) g.windows.push_back(std::size_t{1} << e);
  return g;
}

GridResult grid_search(const Dataset& data, const MTNetConfig& base, const GridSpec& grid,
                       const TrainConfig& cfg) {
  const std::vector<std::size_t> hidden =
      grid.hidden_sizes.empty() ? std::vector<std::size_t>{base.hidden} : grid.hidden_sizes;
  const std::vector<std::size_t> windows =
      grid.windows.empty() ? std::vector<std::size_t>{base.window} : grid.windows;
  const std::vector<double> rates =
      grid.learning_rates.empty() ? std::vector<double>{cfg.learning_rate} : grid.learning_rates;

  GridResult result;
  bool have_best = false;
  for (std::size_t hs : hidden) {
    for (std::size_t win : windows) {
      for (double lr : rates) {
        GridRow row;
        row.index = result.rows.size();
        row.config = base;
        row.config.hidden = hs;
        row.config.filters = hs;
        row.config.window = win;
        // Short windows cannot host the base kernel or AR window.
        row.config.kernel_width = std::min(base.kernel_width, win);
        row.config.ar_window = std::min(base.ar_window, win);
        row.train = cfg;
        row.train.learning_rate = lr;
        row.train.seed = cfg.seed + row.index;
        try {
          row.config.validate();
          const SampleSet train = make_samples(data.values, row.config, data.split.train);
          const SampleSet valid = make_samples(data.values, row.config, data.split.valid);
          MTNetModel model = MTNetModel::create(row.config, row.train.seed);
          FitResult fr = fit(model, train, valid, row.train);
          row.valid_loss = fr.history.best_valid_loss;
          row.ok = true;
          if (!have_best || row.valid_loss < result.rows[result.best].valid_loss) {
            result.best = row.index;
            result.best_model = std::move(model);
            result.best_history = std::move(fr.history);
            have_best = true;
          }
        } catch (const Error& e) {
          row.ok = false;
          row.error = e.what();
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  if (result.rows.empty()) throw ConfigError("grid_search: empty grid");
  if (!have_best) throw Error("grid_search: every grid point failed; first error: " + result.rows[0].error);
  return result;
}

}  // namespace mtnet
