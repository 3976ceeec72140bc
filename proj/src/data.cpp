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

#include "mtnet/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mtnet/errors.hpp"
#include "mtnet/io.hpp"
#include "mtnet/random.hpp"

namespace mtnet {

// ---------------------------------------------------------------------------
// MTNetConfig

EncoderConfig MTNetConfig::encoder() const {
  EncoderConfig e;
  e.variables = variables;
  e.window = window;
  e.kernel_width = kernel_width;
  e.filters = filters;
  e.hidden = hidden;
  e.dropout_rate = dropout_rate;
  return e;
}

void MTNetConfig::validate() const {
  if (memory_blocks < 1) throw ConfigError("memory_blocks must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (targets.empty() || targets.size() > variables) {
    throw ConfigError("targets: need between 1 and " + std::to_string(variables) +
                      " target variables, got " + std::to_string(targets.size()));
  }
  std::set<std::size_t> seen;
  for (std::size_t t : targets) {
    if (t >= variables) {
      throw ConfigError("targets: index " + std::to_string(t) + " out of range for " +
                        std::to_string(variables) + " variables");
    }
    if (!seen.insert(t).second) throw ConfigError("targets: duplicate index " + std::to_string(t));
  }
  if (ar_window < 1) throw ConfigError("ar_window must be >= 1");
  if (ar_window > window) {
    throw ConfigError("ar_window (" + std::to_string(ar_window) + ") exceeds window (" +
                      std::to_string(window) + ")");
  }
  encoder().validate();
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, delim)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

bool is_missing(const std::string& cell) {
  std::string lower;
  for (char c : cell) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

}  // namespace

RawSeries parse_matrix(std::istream& in, const LoadOptions& options, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  char delim = options.delimiter;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.header;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cells = split_line(line, delim);
    if (header_pending) {
      names = cells;
      header_pending = false;
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& cell = cells[c];
      if (is_missing(cell)) {
        if (!options.forward_fill) {
          throw ParseError(source + ":" + std::to_string(line_no) + ": missing value in column " +
                           std::to_string(c + 1) + " (enable forward fill to impute)");
        }
        if (rows.empty()) {
          throw ParseError(source + ":" + std::to_string(line_no) +
                           ": missing value in the first row cannot be forward-filled");
        }
        row[c] = rows.back()[c];
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v)) {
        throw ParseError(source + ":" + std::to_string(line_no) + ": column " +
                         std::to_string(c + 1) + ": not a number: '" + cell + "'");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");

  const std::size_t T = rows.size();
  Tensor values(Shape{width, T}, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t v = 0; v < width; ++v) values.at(v, t) = rows[t][v];

  RawSeries series;
  series.values = std::move(values);
  if (names.size() == width) {
    series.variable_names = std::move(names);
  } else {
    for (std::size_t v = 0; v < width; ++v) series.variable_names.push_back("v" + std::to_string(v));
  }
  return series;
}

RawSeries load_matrix(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_matrix(in, options, path);
}

void append_calendar_features(RawSeries& series, std::size_t steps_per_day) {
  if (steps_per_day == 0) throw ConfigError("calendar features: steps_per_day must be >= 1");
  const std::size_t D = series.variables(), T = series.length();
  Tensor out(Shape{D + 3, T}, 0.0);
  for (std::size_t v = 0; v < D; ++v)
    for (std::size_t t = 0; t < T; ++t) out.at(v, t) = series.values.at(v, t);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t day = t / steps_per_day;
    out.at(D, t) = 24.0 * static_cast<double>(t % steps_per_day) / static_cast<double>(steps_per_day);
    out.at(D + 1, t) = static_cast<double>(day % 7);
    out.at(D + 2, t) = static_cast<double>(day % 365);
  }
  series.values = std::move(out);
  series.variable_names.resize(D);
  series.variable_names.insert(series.variable_names.end(),
                               {"hour_of_day", "day_of_week", "day_of_year"});
}

RawSeries synthesize(const SynthOptions& o) {
  if (o.length < 1 || o.variables < 1 || o.period < 1) {
    throw ConfigError("synth: length, variables and period must be >= 1");
  }
  Rng rng(o.seed);
  const std::size_t D = o.variables, T = o.length;
  std::vector<double> offsets(D);
  std::vector<std::vector<double>> phases(D, std::vector<double>(o.harmonics));
  for (std::size_t v = 0; v < D; ++v) {
    offsets[v] = rng.uniform(-1.0, 1.0);
    for (double& ph : phases[v]) ph = rng.uniform(0.0, 2.0 * M_PI);
  }
  Tensor values(Shape{D, T}, 0.0);
  const double P = static_cast<double>(o.period);
  for (std::size_t t = 0; t < T; ++t) {
    const double amp = 1.0 + o.drift * static_cast<double>(t) / P;
    for (std::size_t v = 0; v < D; ++v) {
      double s = 0.0;
      for (std::size_t k = 1; k <= o.harmonics; ++k) {
        s += std::sin(2.0 * M_PI * static_cast<double>(k * t) / P + phases[v][k - 1]) /
             static_cast<double>(k);
      }
      values.at(v, t) = amp * s + offsets[v] + o.noise * rng.normal();
    }
  }
  RawSeries series;
  series.values = std::move(values);
  for (std::size_t v = 0; v < D; ++v) series.variable_names.push_back("v" + std::to_string(v));
  series.sample_rate = "synthetic, period " + std::to_string(o.period);
  return series;
}

std::string series_to_csv(const RawSeries& series) {
  std::ostringstream os;
  for (std::size_t t = 0; t < series.length(); ++t) {
    for (std::size_t v = 0; v < series.variables(); ++v) {
      if (v) os << ',';
      os << format_double(series.values.at(v, t));
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Scaler

Scaler::Scaler(std::vector<double> shift, std::vector<double> scale)
    : shift_(std::move(shift)), scale_(std::move(scale)) {
  if (shift_.size() != scale_.size()) throw DimensionError("scaler: shift/scale length mismatch");
  for (double s : scale_) {
    if (!(s > 0.0)) throw ConfigError("scaler: scale must be positive");
  }
}

Scaler Scaler::fit(const Tensor& values, TimeRange range) {
  if (range.size() == 0) throw ConfigError("scaler: cannot fit on an empty range");
  if (range.end > values.cols()) throw DimensionError("scaler: fit range exceeds series length");
  const std::size_t D = values.rows();
  std::vector<double> shift(D), scale(D);
  for (std::size_t v = 0; v < D; ++v) {
    double lo = values.at(v, range.begin), hi = lo;
    for (std::size_t t = range.begin; t < range.end; ++t) {
      lo = std::min(lo, values.at(v, t));
      hi = std::max(hi, values.at(v, t));
    }
    shift[v] = lo;
    scale[v] = hi > lo ? hi - lo : 1.0;
  }
  return Scaler(std::move(shift), std::move(scale));
}

Tensor Scaler::apply(const Tensor& values) const {
  if (values.rows() != shift_.size()) {
    throw DimensionError("scaler: fit on " + std::to_string(shift_.size()) +
                         " variables, applied to " + std::to_string(values.rows()));
  }
  Tensor out = values;
  for (std::size_t v = 0; v < values.rows(); ++v)
    for (std::size_t t = 0; t < values.cols(); ++t)
      out.at(v, t) = (values.at(v, t) - shift_[v]) / scale_[v];
  return out;
}

Tensor Scaler::invert(const Tensor& values) const {
  if (values.rows() != shift_.size()) {
    throw DimensionError("scaler: fit on " + std::to_string(shift_.size()) +
                         " variables, inverting " + std::to_string(values.rows()));
  }
  Tensor out = values;
  for (std::size_t v = 0; v < values.rows(); ++v)
    for (std::size_t t = 0; t < values.cols(); ++t)
      out.at(v, t) = values.at(v, t) * scale_[v] + shift_[v];
  return out;
}

Tensor Scaler::invert_targets(const Tensor& prediction,
                              std::span<const std::size_t> targets) const {
  if (prediction.numel() != targets.size()) {
    throw DimensionError("scaler: prediction length does not match target count");
  }
  Tensor out = prediction;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::size_t v = targets[k];
    if (v >= shift_.size()) throw DimensionError("scaler: target index out of range");
    out[k] = prediction[k] * scale_[v] + shift_[v];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting and windowing

void SplitSpec::validate() const {
  for (double f : {train_fraction, valid_fraction, test_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (std::fabs(train_fraction + valid_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

Split chronological_split(std::size_t total, const SplitSpec& spec) {
  spec.validate();
  // The epsilon absorbs representation error such as 0.6 * 10 = 5.999...
  auto boundary = [total](double f) {
    const auto b = static_cast<std::size_t>(std::floor(f * static_cast<double>(total) + 1e-9));
    return std::min(b, total);
  };
  const std::size_t a = boundary(spec.train_fraction);
  const std::size_t b = std::max(a, boundary(spec.train_fraction + spec.valid_fraction));
  return Split{{0, a}, {a, b}, {b, total}};
}

std::size_t first_target_time(const MTNetConfig& cfg) { return cfg.span() + cfg.horizon - 1; }

namespace {

WindowSample build_sample(const Tensor& values, const MTNetConfig& cfg, std::size_t target_time,
                          bool with_target) {
  const std::size_t D = values.rows();
  const std::size_t T = cfg.window;
  if (D != cfg.variables) {
    throw DimensionError("series has " + std::to_string(D) + " variables, config expects " +
                         std::to_string(cfg.variables));
  }
  const bool past_end = with_target ? target_time >= values.cols()
                                    : target_time - cfg.horizon + 1 > values.cols();
  if (target_time < first_target_time(cfg) || past_end) {
    throw DimensionError("target time " + std::to_string(target_time) +
                         " has no complete history or lies past the series end");
  }
  auto slice = [&](std::size_t start) {
    Tensor w(Shape{D, T}, 0.0);
    for (std::size_t v = 0; v < D; ++v)
      for (std::size_t t = 0; t < T; ++t) w.at(v, t) = values.at(v, start + t);
    return w;
  };

  WindowSample s;
  s.target_time = target_time;
  const std::size_t query_end = target_time - cfg.horizon + 1;
  const std::size_t query_start = query_end - T;
  s.query = slice(query_start);
  s.query_time_range = {query_start, query_end};
  const std::size_t mem_start = query_start - cfg.memory_blocks * T;
  for (std::size_t i = 0; i < cfg.memory_blocks; ++i) {
    const std::size_t b = mem_start + i * T;
    s.blocks.push_back(slice(b));
    s.block_time_ranges.push_back({b, b + T});
  }
  s.target = Tensor(Shape{cfg.targets.size()}, 0.0);
  if (with_target) {
    for (std::size_t k = 0; k < cfg.targets.size(); ++k) {
      s.target[k] = values.at(cfg.targets[k], target_time);
    }
  }
  return s;
}

}  // namespace

WindowSample make_sample(const Tensor& values, const MTNetConfig& cfg, std::size_t target_time) {
  return build_sample(values, cfg, target_time, true);
}

WindowSample make_forecast_sample(const Tensor& values, const MTNetConfig& cfg) {
  return build_sample(values, cfg, values.cols() - 1 + cfg.horizon, false);
}

void audit_sample(const WindowSample& s, const MTNetConfig& cfg) {
  const std::size_t T = cfg.window;
  if (s.blocks.size() != cfg.memory_blocks || s.block_time_ranges.size() != cfg.memory_blocks) {
    throw ContractError("audit: wrong block count");
  }
  if (s.target_time + 1 < cfg.horizon || s.query_time_range.end != s.target_time - cfg.horizon + 1) {
    throw ContractError("audit: query for target " + std::to_string(s.target_time) +
                        " does not end at target_time - h");
  }
  if (s.query_time_range.size() != T) throw ContractError("audit: query length differs from T");
  std::size_t expected_end = s.query_time_range.begin;
  for (std::size_t i = cfg.memory_blocks; i-- > 0;) {
    const TimeRange& r = s.block_time_ranges[i];
    if (r.end != expected_end || r.size() != T) {
      throw ContractError("audit: block " + std::to_string(i) + " does not tile the history");
    }
    expected_end = r.begin;
  }
  if (s.query_time_range.end - expected_end != cfg.span()) {
    throw ContractError("audit: history span differs from (n + 1) * T");
  }
}

SampleSet::SampleSet(std::shared_ptr<const Tensor> values, MTNetConfig cfg,
                     std::vector<std::size_t> target_times)
    : values_(std::move(values)), cfg_(std::move(cfg)), times_(std::move(target_times)) {}

SampleSet::SampleSet(std::vector<WindowSample> samples) : explicit_(std::move(samples)) {
  for (const auto& s : explicit_) times_.push_back(s.target_time);
}

std::size_t SampleSet::size() const { return times_.size(); }

WindowSample SampleSet::operator[](std::size_t i) const {
  if (!values_) return explicit_.at(i);
  return make_sample(*values_, cfg_, times_.at(i));
}

std::size_t SampleSet::target_time(std::size_t i) const { return times_.at(i); }

std::vector<WindowSample> SampleSet::materialize() const {
  std::vector<WindowSample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
  return out;
}

SampleSet make_samples(std::shared_ptr<const Tensor> values, const MTNetConfig& cfg,
                       TimeRange range) {
  const std::size_t end = std::min(range.end, values->cols());
  const std::size_t begin = std::max(range.begin, first_target_time(cfg));
  std::vector<std::size_t> times;
  for (std::size_t t = begin; t < end; ++t) times.push_back(t);
  return SampleSet(std::move(values), cfg, std::move(times));
}

SampleSet make_samples(const Tensor& values, const MTNetConfig& cfg, TimeRange range) {
  return make_samples(std::make_shared<const Tensor>(values), cfg, range);
}

}  // namespace mtnet
