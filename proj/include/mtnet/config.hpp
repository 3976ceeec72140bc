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
#include <vector>

#include "mtnet/encoder.hpp"

namespace mtnet {

/// Hyperparameters of the full model.
///
/// The three encoders share one architecture and differ only in weights.
/// Memory blocks and the query window have the same length.
struct MTNetConfig {
  std::size_t memory_blocks = 7;  // n
  std::size_t window = 24;        // T, length of each block and of the query
  std::size_t horizon = 3;        // h
  std::size_t variables = 1;      // D
  std::vector<std::size_t> targets{0};
  std::size_t hidden = 32;        // d
  std::size_t filters = 32;       // d_c
  std::size_t kernel_width = 3;   // w
  std::size_t ar_window = 8;      // s_ar
  double dropout_rate = 0.2;

  std::size_t num_targets() const { return targets.size(); }
  EncoderConfig encoder() const;
  /// Number of steps spanned by memory plus query, (n + 1) * T.
  std::size_t span() const { return (memory_blocks + 1) * window; }
  void validate() const;
};

}  // namespace mtnet
