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

#include "mtnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mtnet/errors.hpp"
#include "mtnet/io.hpp"

namespace mtnet {

namespace {

void require_pair(std::span<const double> truth, std::span<const double> pred, const char* what) {
  if (truth.empty()) throw ContractError(std::string(what) + ": empty input");
  if (truth.size() != pred.size()) {
    throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(truth.size()) +
                         " vs " + std::to_string(pred.size()));
  }
}

void require_same(const Tensor& truth, const Tensor& pred, const char* what) {
  if (truth.empty()) throw ContractError(std::string(what) + ": empty input");
  if (truth.shape() != pred.shape() || truth.rank() != 2) {
    throw DimensionError(std::string(what) + ": expected matching [K x N] matrices, got " +
                         truth.shape().str() + " and " + pred.shape().str());
  }
}

bool constant_row(const Tensor& m, std::size_t k) {
  for (std::size_t t = 1; t < m.cols(); ++t) {
    if (m.at(k, t) != m.at(k, 0)) return false;
  }
  return true;
}

}  // namespace

double rmse(std::span<const double> truth, std::span<const double> pred) {
  require_pair(truth, pred, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  return std::sqrt(s / static_cast<double>(truth.size()));
}

double mae(std::span<const double> truth, std::span<const double> pred) {
  require_pair(truth, pred, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::fabs(truth[i] - pred[i]);
  return s / static_cast<double>(truth.size());
}

double rrse(const Tensor& truth, const Tensor& pred, bool per_variable_mean) {
  require_same(truth, pred, "rrse");
  const std::size_t K = truth.rows(), N = truth.cols();
  std::vector<double> centre(K, 0.0);
  if (per_variable_mean) {
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t t = 0; t < N; ++t) s += truth.at(k, t);
      centre[k] = s / static_cast<double>(N);
    }
  } else {
    double s = 0.0;
    for (double v : truth.data()) s += v;
    const double m = s / static_cast<double>(truth.numel());
    for (double& c : centre) c = m;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < N; ++t) {
      const double e = truth.at(k, t) - pred.at(k, t);
      const double d = truth.at(k, t) - centre[k];
      num += e * e;
      den += d * d;
    }
  bool degenerate = true;
  for (std::size_t k = 0; k < K && degenerate; ++k) {
    degenerate = constant_row(truth, k) && (per_variable_mean || truth.at(k, 0) == truth[0]);
  }
  if (degenerate || !(den > 0.0)) {
    throw NumericError("rrse: truth has zero variance, metric undefined");
  }
  return std::sqrt(num) / std::sqrt(den);
}

CorrBreakdown corr_breakdown(const Tensor& truth, const Tensor& pred) {
  require_same(truth, pred, "corr");
  const std::size_t K = truth.rows(), N = truth.cols();
  if (N < 2) throw ContractError("corr: need at least two time steps");
  CorrBreakdown out;
  out.per_variable.assign(K, std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < K; ++k) {
    double mt = 0.0, mp = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      mt += truth.at(k, t);
      mp += pred.at(k, t);
    }
    mt /= static_cast<double>(N);
    mp /= static_cast<double>(N);
    double cov = 0.0, vt = 0.0, vp = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      const double a = truth.at(k, t) - mt;
      const double b = pred.at(k, t) - mp;
      cov += a * b;
      vt += a * a;
      vp += b * b;
    }
    // Constant rows are detected exactly; the rounded mean can leave a
    // spurious nonzero variance behind.
    if (constant_row(truth, k) || constant_row(pred, k) || !(vt > 0.0) || !(vp > 0.0)) {
      ++out.skipped;
      continue;
    }
    // Rounding can push |r| a hair past 1.
    const double r = std::clamp(cov / std::sqrt(vt * vp), -1.0, 1.0);
    out.per_variable[k] = r;
    total += r;
    ++used;
  }
  if (used == 0) throw NumericError("corr: every variable has zero variance");
  out.mean = total / static_cast<double>(used);
  return out;
}

double corr(const Tensor& truth, const Tensor& pred) { return corr_breakdown(truth, pred).mean; }

EvalReport evaluate_predictor(const Predictor& predictor, const SampleSet& samples,
                              const Scaler& scaler, const MTNetConfig& cfg,
                              const EvalOptions& options) {
  if (samples.empty()) throw ContractError("evaluate: no test samples");
  const std::size_t K = cfg.num_targets(), N = samples.size();
  EvalReport r;
  r.horizon = cfg.horizon;
  r.samples = N;
  r.truth = Tensor(Shape{K, N}, 0.0);
  r.pred = Tensor(Shape{K, N}, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const WindowSample s = samples[j];
    audit_sample(s, cfg);
    Prediction p = predictor(s);
    if (p.value.numel() != K) {
      throw DimensionError("evaluate: predictor returned " + std::to_string(p.value.numel()) +
                           " values for " + std::to_string(K) + " targets");
    }
    const Tensor truth = scaler.invert_targets(s.target, cfg.targets);
    const Tensor pred = scaler.invert_targets(p.value, cfg.targets);
    for (std::size_t k = 0; k < K; ++k) {
      r.truth.at(k, j) = truth[k];
      r.pred.at(k, j) = pred[k];
    }
    r.target_times.push_back(s.target_time);
    if (options.collect_traces && !p.trace.weights.empty()) r.traces.push_back(std::move(p.trace));
  }
  EvalReport metrics = make_report(std::move(r.truth), std::move(r.pred), cfg.horizon, options);
  metrics.target_times = std::move(r.target_times);
  metrics.traces = std::move(r.traces);
  return metrics;
}

EvalReport make_report(Tensor truth, Tensor pred, std::size_t horizon, const EvalOptions& options) {
  require_same(truth, pred, "evaluate");
  EvalReport r;
  r.horizon = horizon;
  r.samples = truth.cols();
  r.rmse = rmse(truth.data(), pred.data());
  r.mae = mae(truth.data(), pred.data());
  r.rrse = rrse(truth, pred, options.per_variable_rrse);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.corr = nan;
  r.per_variable_corr.assign(truth.rows(), nan);
  r.corr_skipped = truth.rows();
  // A report stays usable when CORR is undefined (constant predictor, one step).
  if (truth.cols() >= 2) {
    try {
      CorrBreakdown c = corr_breakdown(truth, pred);
      r.corr = c.mean;
      r.per_variable_corr = std::move(c.per_variable);
      r.corr_skipped = c.skipped;
    } catch (const NumericError&) {
    }
  }
  r.truth = std::move(truth);
  r.pred = std::move(pred);
  return r;
}

EvalReport evaluate_model(const MTNetModel& model, const SampleSet& samples, const Scaler& scaler,
                          std::size_t horizon, const EvalOptions& options) {
  if (horizon != model.config.horizon) {
    throw ConfigError("evaluate: model was trained for horizon " +
                      std::to_string(model.config.horizon) + ", requested " +
                      std::to_string(horizon));
  }
  return evaluate_predictor([&model](const WindowSample& s) { return predict(model, s); },
                            samples, scaler, model.config, options);
}

std::string traces_to_csv(std::span<const AttentionTrace> traces) {
  std::ostringstream os;
  const std::size_t n = traces.empty() ? 0 : traces[0].weights.numel();
  os << "target_time";
  for (std::size_t i = 1; i <= n; ++i) os << ",p_" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",block_" << i << "_start,block_" << i << "_end";
  os << '\n';
  for (const AttentionTrace& t : traces) {
    if (t.weights.numel() != n || t.block_time_ranges.size() != n) {
      throw DimensionError("traces: inconsistent block counts");
    }
    os << t.target_time;
    for (double p : t.weights.data()) os << ',' << format_double(p);
    for (const TimeRange& r : t.block_time_ranges) os << ',' << r.begin << ',' << r.end;
    os << '\n';
  }
  return os.str();
}

std::vector<AttentionTrace> traces_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("traces: missing header");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';
  if (cols < 4 || (cols - 1) % 3 != 0) throw ParseError("traces: malformed header");
  const std::size_t n = (cols - 1) / 3;
  std::vector<AttentionTrace> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols) {
      throw ParseError("traces:" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                       " fields");
    }
    AttentionTrace t;
    t.target_time = std::stoull(cells[0]);
    t.weights = Tensor(Shape{n}, 0.0);
    for (std::size_t i = 0; i < n; ++i) t.weights[i] = std::stod(cells[1 + i]);
    for (std::size_t i = 0; i < n; ++i) {
      t.block_time_ranges.push_back(
          {std::stoull(cells[1 + n + 2 * i]), std::stoull(cells[2 + n + 2 * i])});
    }
    out.push_back(std::move(t));
  }
  return out;
}

void export_traces(std::span<const AttentionTrace> traces, const std::string& path) {
  if (traces.empty()) throw ContractError("export_traces: no traces to export");
  atomic_write(path, traces_to_csv(traces));
}

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "horizon,samples,rmse,mae,rrse,corr,corr_skipped\n";
  os << r.horizon << ',' << r.samples << ',' << format_double(r.rmse) << ','
     << format_double(r.mae) << ',' << format_double(r.rrse) << ',' << format_double(r.corr) << ','
     << r.corr_skipped << '\n';
  return os.str();
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["horizon"] = r.horizon;
  j["samples"] = r.samples;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  j["metrics"] = {{"rmse", num(r.rmse)}, {"mae", num(r.mae)}, {"rrse", num(r.rrse)},
                  {"corr", num(r.corr)}};
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (double c : r.per_variable_corr) per.push_back(num(c));
  j["per_variable_corr"] = per;
  j["corr_skipped"] = r.corr_skipped;
  j["traces_path"] = r.traces_path;
  return j.dump(2) + "\n";
}

}  // namespace mtnet
