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

#include "mtnet/autograd.hpp"
#include "mtnet/config.hpp"
#include "mtnet/data.hpp"
#include "mtnet/encoder.hpp"

namespace mtnet {

/// Every learnable tensor of the model. The three encoders never share
/// weights; the AR weights are shared by all target variables.
struct MTNetParams {
  EncoderParams enc_m;   // memory embedding
  EncoderParams enc_in;  // query embedding
  EncoderParams enc_c;   // memory context
  Parameter dense_w;     // [K x (n + 1) d]
  Parameter dense_b;     // [K]
  Parameter ar_w;        // [s_ar], ar_w[k] multiplies q_{t-k}
  Parameter ar_b;        // scalar

  static MTNetParams init(const MTNetConfig& cfg, Rng& rng);
  static MTNetParams zeros(const MTNetConfig& cfg);

  template <typename F>
  void for_each(F&& f) {
    enc_m.for_each(f);
    enc_in.for_each(f);
    enc_c.for_each(f);
    for (Parameter* p : {&dense_w, &dense_b, &ar_w, &ar_b}) f(*p);
  }
  template <typename F>
  void for_each(F&& f) const {
    enc_m.for_each(f);
    enc_in.for_each(f);
    enc_c.for_each(f);
    for (const Parameter* p : {&dense_w, &dense_b, &ar_w, &ar_b}) f(*p);
  }

  /// All parameters ordered by name.
  std::vector<Parameter*> sorted();
  std::vector<const Parameter*> sorted() const;
  /// Total number of scalar parameters.
  std::size_t count() const;

  void zero_grad();
  /// Zeros encoders and the dense head, leaving only the AR component.
  void zero_neural();
};

struct MTNetModel {
  MTNetConfig config;
  MTNetParams params;

  static MTNetModel create(const MTNetConfig& cfg, std::uint64_t seed);
};

/// Attention over memory blocks for one prediction.
struct AttentionTrace {
  Tensor weights;  // p, [n]
  std::vector<TimeRange> block_time_ranges;
  std::size_t target_time = 0;
};

struct MTNetVars {
  EncoderVars m, in, c;
  Var dense_w, dense_b, ar_w, ar_b;
};

MTNetVars bind(Graph& g, MTNetParams& params);
MTNetVars bind(Graph& g, const MTNetParams& params);

/// m_i = Encoder_m(X_i), order preserved.
std::vector<Var> memory_embed(std::span<const Var> blocks, const MTNetVars& p,
                              const MTNetConfig& cfg, bool training, Rng& rng);
/// u = Encoder_in(Q).
Var query_embed(Var query, const MTNetVars& p, const MTNetConfig& cfg, bool training, Rng& rng);
/// c_i = Encoder_c(X_i).
std::vector<Var> context_embed(std::span<const Var> blocks, const MTNetVars& p,
                               const MTNetConfig& cfg, bool training, Rng& rng);

/// p_i = softmax_i(u . m_i).
Var attention_weights(Var u, std::span<const Var> memory);
/// o_i = p_i * c_i.
std::vector<Var> weighted_outputs(Var p, std::span<const Var> context);
/// W_D [u; o_1; ...; o_n] + b_D.
Var dense_combine(Var u, std::span<const Var> outputs, const MTNetVars& p);
/// For each target i: sum_k w_k q_{T-1-k, i} + b, reading the query only.
Var ar_predict(const Tensor& query, const MTNetVars& p, const MTNetConfig& cfg);

struct ForwardResult {
  Var prediction;  // [K], dense head plus AR
  Var attention;   // [n]
  AttentionTrace trace;
};

/// Records one forward pass on `g`.
ForwardResult forward(Graph& g, const WindowSample& sample, const MTNetVars& p,
                      const MTNetConfig& cfg, bool training, Rng& rng);

struct Prediction {
  Tensor value;
  AttentionTrace trace;
};

/// Eval-mode forward pass; a pure function of (sample, params).
Prediction predict(const MTNetModel& model, const WindowSample& sample);

}  // namespace mtnet
