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

#include "mtnet/encoder.hpp"

#include <cmath>

#include "mtnet/errors.hpp"

namespace mtnet {

void EncoderConfig::validate() const {
  if (variables < 1) throw ConfigError("encoder: variables must be >= 1");
  if (window < 1) throw ConfigError("encoder: window must be >= 1");
  if (kernel_width < 1 || kernel_width > window) {
    throw ConfigError("encoder: kernel_width must lie in [1, window], got " +
                      std::to_string(kernel_width) + " for window " + std::to_string(window));
  }
  if (filters < 1) throw ConfigError("encoder: filters must be >= 1");
  if (hidden < 1) throw ConfigError("encoder: hidden must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("encoder: dropout_rate must lie in [0, 1)");
  }
}

namespace {

Tensor uniform_tensor(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(shape, 0.0);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

EncoderParams EncoderParams::zeros(const EncoderConfig& cfg, const std::string& prefix) {
  cfg.validate();
  const std::size_t D = cfg.variables, w = cfg.kernel_width, dc = cfg.filters, d = cfg.hidden;
  auto z = [&](const char* name, Shape s) { return Parameter(prefix + name, Tensor(s, 0.0)); };
  EncoderParams p;
  p.conv_kernels = z(".conv.kernels", Shape{dc, D, w});
  p.conv_bias = z(".conv.bias", Shape{dc});
  p.attn_v = z(".attn.v", Shape{dc});
  p.attn_b = z(".attn.b", Shape{1});
  p.w_xr = z(".gru.W_xr", Shape{dc, d});
  p.w_hr = z(".gru.W_hr", Shape{d, d});
  p.b_r = z(".gru.b_r", Shape{d});
  p.w_xu = z(".gru.W_xu", Shape{dc, d});
  p.w_hu = z(".gru.W_hu", Shape{d, d});
  p.b_u = z(".gru.b_u", Shape{d});
  p.w_xc = z(".gru.W_xc", Shape{dc, d});
  p.w_hc = z(".gru.W_hc", Shape{d, d});
  p.b_c = z(".gru.b_c", Shape{d});
  return p;
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, const std::string& prefix, Rng& rng) {
  EncoderParams p = zeros(cfg, prefix);
  const std::size_t D = cfg.variables, w = cfg.kernel_width, dc = cfg.filters, d = cfg.hidden;
  p.conv_kernels.value = uniform_tensor(p.conv_kernels.value.shape(), D * w, rng);
  p.attn_v.value = uniform_tensor(p.attn_v.value.shape(), dc, rng);
  for (Parameter* m : {&p.w_xr, &p.w_xu, &p.w_xc}) {
    m->value = uniform_tensor(m->value.shape(), dc, rng);
  }
  for (Parameter* m : {&p.w_hr, &p.w_hu, &p.w_hc}) {
    m->value = uniform_tensor(m->value.shape(), d, rng);
  }
  return p;
}

namespace {

template <typename Params, typename BindFn>
EncoderVars bind_with(Params& p, BindFn&& b) {
  return EncoderVars{b(p.conv_kernels), b(p.conv_bias), b(p.attn_v), b(p.attn_b),
                     b(p.w_xr),         b(p.w_hr),      b(p.b_r),    b(p.w_xu),
                     b(p.w_hu),         b(p.b_u),       b(p.w_xc),   b(p.w_hc),
                     b(p.b_c)};
}

}  // namespace

EncoderVars bind(Graph& g, EncoderParams& params) {
  return bind_with(params, [&g](Parameter& p) { return g.param(p); });
}

EncoderVars bind(Graph& g, const EncoderParams& params) {
  return bind_with(params, [&g](const Parameter& p) { return g.constant(p.value); });
}

Var conv_stage(Var x, const EncoderVars& p) {
  return relu(conv_full_height(x, p.conv_kernels, p.conv_bias));
}

TemporalAttention temporal_attention(Var h, const EncoderVars& p) {
  const std::size_t tc = h.value().cols();
  Var scores = add_scalar(vecmat(p.attn_v, h), p.attn_b);
  // Column weights alpha_t * T_c, so uniform attention leaves h unchanged.
  Var factors = softmax(scores, static_cast<double>(tc));
  return {scale_columns(h, factors), softmax(scores)};
}

Var gru_stage(Var s, const EncoderVars& p) {
  Graph& g = s.graph();
  const std::size_t d = p.b_r.value().numel();
  Var h = g.constant(Tensor(Shape{d}, 0.0));
  for (std::size_t t = 0; t < s.value().cols(); ++t) {
    Var x = column(s, t);
    Var r = sigmoid(add(add(vecmat(x, p.w_xr), vecmat(h, p.w_hr)), p.b_r));
    Var u = sigmoid(add(add(vecmat(x, p.w_xu), vecmat(h, p.w_hu)), p.b_u));
    Var c = relu(add(add(vecmat(x, p.w_xc), mul(r, vecmat(h, p.w_hc))), p.b_c));
    h = add(mul(one_minus(u), h), mul(u, c));
  }
  return h;
}

Var encode(Var x, const EncoderVars& p, const EncoderConfig& cfg, bool training, Rng& rng) {
  const Shape& s = x.value().shape();
  if (s.rank() != 2 || s[0] != cfg.variables || s[1] != cfg.window) {
    throw DimensionError("encode: expected input [" + std::to_string(cfg.variables) + "x" +
                         std::to_string(cfg.window) + "], got " + s.str());
  }
  Var conv = dropout(conv_stage(x, p), cfg.dropout_rate, training, rng);
  Var att = dropout(temporal_attention(conv, p).output, cfg.dropout_rate, training, rng);
  return gru_stage(att, p);
}

Tensor encode(const Tensor& x, const EncoderParams& params, const EncoderConfig& cfg) {
  Graph g;
  EncoderVars vars = bind(g, params);
  Rng unused(0);
  return encode(g.constant(x), vars, cfg, false, unused).value();
}

}  // namespace mtnet
