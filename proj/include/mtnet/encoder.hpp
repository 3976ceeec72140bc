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
#include <string>

#include "mtnet/autograd.hpp"

namespace mtnet {

/// Shape of one encoder: convolution -> temporal attention -> GRU.
struct EncoderConfig {
  std::size_t variables = 1;     // D
  std::size_t window = 24;       // T
  std::size_t kernel_width = 3;  // w
  std::size_t filters = 32;      // d_c
  std::size_t hidden = 32;       // d, also the embedding size
  double dropout_rate = 0.2;

  /// Number of convolution output steps, T - w + 1.
  std::size_t conv_length() const { return window - kernel_width + 1; }
  void validate() const;
};

/// Learnable state of one encoder.
///
/// GRU matrices follow the row-vector convention x_t * W, so input matrices
/// are [d_c x d] and recurrent matrices [d x d].
struct EncoderParams {
  Parameter conv_kernels;  // [d_c x D x w]
  Parameter conv_bias;     // [d_c]
  Parameter attn_v;        // [d_c] scoring vector
  Parameter attn_b;        // scalar scoring bias
  Parameter w_xr, w_hr, b_r;
  Parameter w_xu, w_hu, b_u;
  Parameter w_xc, w_hc, b_c;

  /// Matrices uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static EncoderParams init(const EncoderConfig& cfg, const std::string& prefix, Rng& rng);
  static EncoderParams zeros(const EncoderConfig& cfg, const std::string& prefix);

  template <typename F>
  void for_each(F&& f) {
    for (Parameter* p : {&conv_kernels, &conv_bias, &attn_v, &attn_b, &w_xr, &w_hr, &b_r, &w_xu,
                         &w_hu, &b_u, &w_xc, &w_hc, &b_c}) {
      f(*p);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const Parameter* p : {&conv_kernels, &conv_bias, &attn_v, &attn_b, &w_xr, &w_hr, &b_r,
                               &w_xu, &w_hu, &b_u, &w_xc, &w_hc, &b_c}) {
      f(*p);
    }
  }
};

/// Encoder parameters recorded on a graph.
struct EncoderVars {
  Var conv_kernels, conv_bias, attn_v, attn_b;
  Var w_xr, w_hr, b_r, w_xu, w_hu, b_u, w_xc, w_hc, b_c;
};

/// Binds parameters as differentiable leaves.
EncoderVars bind(Graph& g, EncoderParams& params);
/// Binds parameters as constants (no gradient flow).
EncoderVars bind(Graph& g, const EncoderParams& params);

/// Row k is ReLU(W_k * X + b_k); output [d_c x (T - w + 1)].
Var conv_stage(Var x, const EncoderVars& p);

struct TemporalAttention {
  Var output;   // [d_c x T_c]
  Var weights;  // [T_c], softmax over time
};

/// Scores each column with v.H[:,t] + b, softmaxes over time and returns the
/// columns re-weighted by alpha_t * T_c, so uniform weights are the identity.
TemporalAttention temporal_attention(Var h, const EncoderVars& p);

/// GRU with ReLU candidate activation over the columns of `s`, h_0 = 0.
/// Returns the final hidden state [d].
Var gru_stage(Var s, const EncoderVars& p);

/// Full encoder: gru(dropout(attention(dropout(conv(x))))).
Var encode(Var x, const EncoderVars& p, const EncoderConfig& cfg, bool training, Rng& rng);

/// Eval-mode convenience wrapper.
Tensor encode(const Tensor& x, const EncoderParams& params, const EncoderConfig& cfg);

}  // namespace mtnet
