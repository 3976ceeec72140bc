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
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/tensor.hpp"

namespace mtnet {

/// Multivariate series stored variable-major: values[D x T_total].
struct RawSeries {
  Tensor values;
  std::vector<std::string> variable_names;
  std::string sample_rate;

  std::size_t variables() const { return values.rows(); }
  std::size_t length() const { return values.cols(); }
};

struct LoadOptions {
  /// 0 autodetects between ',' and '\t' from the first data line.
  char delimiter = 0;
  bool header = false;
  /// Replace missing cells (empty, NA, NaN) with the previous row's value.
  bool forward_fill = false;
};

/// Reads a delimited text matrix, one row per time stamp, one column per
/// variable.
RawSeries load_matrix(const std::string& path, const LoadOptions& options = {});
RawSeries parse_matrix(std::istream& in, const LoadOptions& options = {},
                       const std::string& source = "<stream>");

/// Appends hour-of-day, day-of-week and day-of-year columns, assuming the
/// first row falls at midnight on day 0 and `steps_per_day` rows per day.
void append_calendar_features(RawSeries& series, std::size_t steps_per_day);

/// Sum-of-sinusoids generator for offline experiments.
struct SynthOptions {
  std::size_t length = 1000;
  std::size_t variables = 1;
  std::size_t period = 24;
  std::size_t harmonics = 2;
  double noise = 0.05;
  /// Relative amplitude growth per period; 0 gives a stationary signal.
  double drift = 0.0;
  std::uint64_t seed = 0;
};

/// Variable v at time t:
///   (1 + drift * t / period) * sum_k sin(2 pi k t / period + phase_vk) / k
///   + offset_v + noise * N(0, 1)
/// with phases and offsets drawn from the seeded generator.
RawSeries synthesize(const SynthOptions& options);

/// Writes one row per time stamp, comma separated.
std::string series_to_csv(const RawSeries& series);

/// Half-open range of time indices.
struct TimeRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool operator==(const TimeRange&) const = default;
};

/// Per-variable min-max scaling fit on the training partition:
/// scaled = (x - shift) / scale.
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> shift, std::vector<double> scale);

  /// Fits on columns [range.begin, range.end) of values[D x T].
  /// Constant variables get scale 1.
  static Scaler fit(const Tensor& values, TimeRange range);

  Tensor apply(const Tensor& values) const;
  Tensor invert(const Tensor& values) const;
  /// Inverts a prediction vector whose entry k belongs to variable targets[k].
  Tensor invert_targets(const Tensor& prediction, std::span<const std::size_t> targets) const;

  const std::vector<double>& shift() const { return shift_; }
  const std::vector<double>& scale() const { return scale_; }
  std::size_t variables() const { return shift_.size(); }

 private:
  std::vector<double> shift_;
  std::vector<double> scale_;
};

struct SplitSpec {
  double train_fraction = 0.6;
  double valid_fraction = 0.2;
  double test_fraction = 0.2;
  void validate() const;
};

struct Split {
  TimeRange train, valid, test;
};

/// Contiguous split with boundaries floor(f_train * T) and
/// floor((f_train + f_valid) * T).
Split chronological_split(std::size_t total, const SplitSpec& spec = {});

/// One training instance. Time ranges are half-open absolute indices.
struct WindowSample {
  std::vector<Tensor> blocks;  // n x [D x T], oldest first
  Tensor query;                // [D x T]
  Tensor target;               // [K]
  std::size_t target_time = 0;
  std::vector<TimeRange> block_time_ranges;
  TimeRange query_time_range;
};

/// Earliest target time with a full history, (n + 1) * T + h - 1.
std::size_t first_target_time(const MTNetConfig& cfg);

/// Builds the sample whose target is values[:, target_time]. The query
/// covers [t - h - T + 1, t - h] and the n blocks tile the n * T steps
/// immediately before it.
WindowSample make_sample(const Tensor& values, const MTNetConfig& cfg, std::size_t target_time);

/// Sample for forecasting past the end of the series: the query ends at the
/// last observed step and the target (unknown, zero) lies h steps later.
WindowSample make_forecast_sample(const Tensor& values, const MTNetConfig& cfg);

/// Throws ContractError unless the sample's inputs end at target_time - h and
/// tile the (n + 1) * T steps before it without gaps or overlaps.
void audit_sample(const WindowSample& sample, const MTNetConfig& cfg);

/// Lazily materialized list of samples over a shared series.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(std::shared_ptr<const Tensor> values, MTNetConfig cfg,
            std::vector<std::size_t> target_times);
  /// Wraps pre-built samples.
  explicit SampleSet(std::vector<WindowSample> samples);

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  WindowSample operator[](std::size_t i) const;
  std::size_t target_time(std::size_t i) const;
  std::vector<WindowSample> materialize() const;

 private:
  std::shared_ptr<const Tensor> values_;
  MTNetConfig cfg_;
  std::vector<std::size_t> times_;
  std::vector<WindowSample> explicit_;
};

/// One sample per eligible target time in `range`, stride 1, ordered by
/// target time. History may reach back before range.begin.
SampleSet make_samples(std::shared_ptr<const Tensor> values, const MTNetConfig& cfg,
                       TimeRange range);
SampleSet make_samples(const Tensor& values, const MTNetConfig& cfg, TimeRange range);

}  // namespace mtnet
