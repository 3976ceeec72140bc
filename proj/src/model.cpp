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

#include "mtnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "mtnet/errors.hpp"

namespace mtnet {

MTNetParams MTNetParams::zeros(const MTNetConfig& cfg) {
  cfg.validate();
  const EncoderConfig e = cfg.encoder();
  const std::size_t K = cfg.num_targets();
  const std::size_t width = (cfg.memory_blocks + 1) * cfg.hidden;
  MTNetParams p;
  p.enc_m = EncoderParams::zeros(e, "encoder_m");
  p.enc_in = EncoderParams::zeros(e, "encoder_in");
  p.enc_c = EncoderParams::zeros(e, "encoder_c");
  p.dense_w = Parameter("dense.W", Tensor(Shape{K, width}, 0.0));
  p.dense_b = Parameter("dense.b", Tensor(Shape{K}, 0.0));
  p.ar_w = Parameter("ar.w", Tensor(Shape{cfg.ar_window}, 0.0));
  p.ar_b = Parameter("ar.b", Tensor(Shape{1}, 0.0));
  return p;
}

MTNetParams MTNetParams::init(const MTNetConfig& cfg, Rng& rng) {
  MTNetParams p = zeros(cfg);
  const EncoderConfig e = cfg.encoder();
  p.enc_m = EncoderParams::init(e, "encoder_m", rng);
  p.enc_in = EncoderParams::init(e, "encoder_in", rng);
  p.enc_c = EncoderParams::init(e, "encoder_c", rng);
  const std::size_t width = p.dense_w.value.cols();
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  for (double& v : p.dense_w.value.data()) v = rng.uniform(-bound, bound);
  const double ar_bound = 1.0 / std::sqrt(static_cast<double>(cfg.ar_window));
  for (double& v : p.ar_w.value.data()) v = rng.uniform(-ar_bound, ar_bound);
  return p;
}

std::vector<Parameter*> MTNetParams::sorted() {
  std::vector<Parameter*> out;
  for_each([&out](Parameter& p) { out.push_back(&p); });
  std::sort(out.begin(), out.end(),
            [](const Parameter* a, const Parameter* b) { return a->name < b->name; });
  return out;
}

std::vector<const Parameter*> MTNetParams::sorted() const {
  std::vector<const Parameter*> out;
  for_each([&out](const Parameter& p) { out.push_back(&p); });
  std::sort(out.begin(), out.end(),
            [](const Parameter* a, const Parameter* b) { return a->name < b->name; });
  return out;
}

std::size_t MTNetParams::count() const {
  std::size_t n = 0;
  for_each([&n](const Parameter& p) { n += p.value.numel(); });
  return n;
}

void MTNetParams::zero_grad() {
  for_each([](Parameter& p) { p.zero_grad(); });
}

void MTNetParams::zero_neural() {
  for (EncoderParams* e : {&enc_m, &enc_in, &enc_c}) {
    e->for_each([](Parameter& p) { p.value.fill(0.0); });
  }
  dense_w.value.fill(0.0);
  dense_b.value.fill(0.0);
}

MTNetModel MTNetModel::create(const MTNetConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return MTNetModel{cfg, MTNetParams::init(cfg, rng)};
}

MTNetVars bind(Graph& g, MTNetParams& p) {
  return MTNetVars{bind(g, p.enc_m), bind(g, p.enc_in), bind(g, p.enc_c), g.param(p.dense_w),
                   g.param(p.dense_b), g.param(p.ar_w), g.param(p.ar_b)};
}

MTNetVars bind(Graph& g, const MTNetParams& p) {
  return MTNetVars{bind(g, p.enc_m),           bind(g, p.enc_in),         bind(g, p.enc_c),
                   g.constant(p.dense_w.value), g.constant(p.dense_b.value),
                   g.constant(p.ar_w.value),    g.constant(p.ar_b.value)};
}

namespace {

std::vector<Var> embed_all(std::span<const Var> blocks, const EncoderVars& enc,
                           const MTNetConfig& cfg, bool training, Rng& rng) {
  if (blocks.size() != cfg.memory_blocks) {
    throw DimensionError("expected " + std::to_string(cfg.memory_blocks) + " memory blocks, got " +
                         std::to_string(blocks.size()));
  }
  const EncoderConfig e = cfg.encoder();
  std::vector<Var> out;
  out.reserve(blocks.size());
  for (Var b : blocks) out.push_back(encode(b, enc, e, training, rng));
  return out;
}

}  // namespace

std::vector<Var> memory_embed(std::span<const Var> blocks, const MTNetVars& p,
                              const MTNetConfig& cfg, bool training, Rng& rng) {
  return embed_all(blocks, p.m, cfg, training, rng);
}

Var query_embed(Var query, const MTNetVars& p, const MTNetConfig& cfg, bool training, Rng& rng) {
  return encode(query, p.in, cfg.encoder(), training, rng);
}

std::vector<Var> context_embed(std::span<const Var> blocks, const MTNetVars& p,
                               const MTNetConfig& cfg, bool training, Rng& rng) {
  return embed_all(blocks, p.c, cfg, training, rng);
}

Var attention_weights(Var u, std::span<const Var> memory) {
  if (memory.empty()) throw DimensionError("attention_weights: empty memory");
  std::vector<Var> scores;
  scores.reserve(memory.size());
  for (Var m : memory) scores.push_back(dot(u, m));
  return softmax(concat(scores));
}

std::vector<Var> weighted_outputs(Var p, std::span<const Var> context) {
  if (p.value().numel() != context.size()) {
    throw DimensionError("weighted_outputs: " + std::to_string(p.value().numel()) +
                         " weights for " + std::to_string(context.size()) + " context vectors");
  }
  std::vector<Var> out;
  out.reserve(context.size());
  for (std::size_t i = 0; i < context.size(); ++i) out.push_back(scale_by(context[i], element(p, i)));
  return out;
}

Var dense_combine(Var u, std::span<const Var> outputs, const MTNetVars& p) {
  std::vector<Var> parts;
  parts.reserve(outputs.size() + 1);
  parts.push_back(u);
  parts.insert(parts.end(), outputs.begin(), outputs.end());
  return add(matvec(p.dense_w, concat(parts)), p.dense_b);
}

Var ar_predict(const Tensor& query, const MTNetVars& p, const MTNetConfig& cfg) {
  const std::size_t s = cfg.ar_window;
  const std::size_t T = query.cols();
  if (s > T) {
    throw ConfigError("ar_window (" + std::to_string(s) + ") exceeds query length (" +
                      std::to_string(T) + ")");
  }
  const std::size_t K = cfg.num_targets();
  Tensor lags(Shape{K, s}, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < s; ++j) lags.at(k, j) = query.at(cfg.targets[k], T - 1 - j);
  Graph& g = p.ar_w.graph();
  return add_scalar(matvec(g.constant(std::move(lags)), p.ar_w), p.ar_b);
}

ForwardResult forward(Graph& g, const WindowSample& sample, const MTNetVars& p,
                      const MTNetConfig& cfg, bool training, Rng& rng) {
  std::vector<Var> blocks;
  blocks.reserve(sample.blocks.size());
  for (const Tensor& b : sample.blocks) blocks.push_back(g.constant(b));
  Var query = g.constant(sample.query);

  std::vector<Var> memory = memory_embed(blocks, p, cfg, training, rng);
  Var u = query_embed(query, p, cfg, training, rng);
  Var attn = attention_weights(u, memory);
  std::vector<Var> context = context_embed(blocks, p, cfg, training, rng);
  std::vector<Var> outputs = weighted_outputs(attn, context);
  Var neural = dense_combine(u, outputs, p);
  Var linear = ar_predict(sample.query, p, cfg);

  ForwardResult r;
  r.prediction = add(neural, linear);
  r.attention = attn;
  r.trace = AttentionTrace{attn.value(), sample.block_time_ranges, sample.target_time};
  return r;
}

Prediction predict(const MTNetModel& model, const WindowSample& sample) {
  Graph g;
  const MTNetVars vars = bind(g, model.params);
  Rng unused(0);
  ForwardResult r = forward(g, sample, vars, model.config, false, unused);
  return Prediction{r.prediction.value(), std::move(r.trace)};
}

}  // namespace mtnet
