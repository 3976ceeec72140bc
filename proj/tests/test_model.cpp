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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mtnet/errors.hpp"
#include "mtnet/model.hpp"
#include "mtnet/training.hpp"
#include "test_util.hpp"

namespace mtnet {
namespace {

using testing::check_gradients;
using testing::random_sample;
using testing::random_tensor;
using testing::tiny_config;
using testing::valid_attention;

MTNetConfig small_config() {
  MTNetConfig c = tiny_config();
  c.memory_blocks = 3;
  c.variables = 3;
  c.targets = {2, 0};
  c.window = 6;
  c.ar_window = 3;
  c.dropout_rate = 0.0;
  return c;
}

std::vector<Var> constants(Graph& g, const std::vector<Tensor>& ts) {
  std::vector<Var> out;
  for (const Tensor& t : ts) out.push_back(g.constant(t));
  return out;
}

TEST(MTNetConfig, Validation) {
  MTNetConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.memory_blocks = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.targets = {0, 0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.targets = {3};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.targets = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.ar_window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.ar_window = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.horizon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(MTNetParams, ShapesNamesAndDisjointEncoders) {
  const MTNetConfig c = small_config();
  const MTNetModel m = MTNetModel::create(c, 1);
  EXPECT_EQ(m.params.dense_w.value.shape(), (Shape{2, 4 * 2}));
  EXPECT_EQ(m.params.dense_b.value.shape(), (Shape{2}));
  EXPECT_EQ(m.params.ar_w.value.shape(), (Shape{3}));
  EXPECT_EQ(m.params.ar_b.value.shape(), (Shape{1}));
  std::set<std::string> names;
  std::set<const Tensor*> storage;
  m.params.for_each([&](const Parameter& p) {
    EXPECT_TRUE(names.insert(p.name).second) << p.name;
    storage.insert(&p.value);
    EXPECT_EQ(p.value.shape(), p.grad.shape()) << p.name;
  });
  EXPECT_EQ(names.size(), m.params.sorted().size());
  EXPECT_EQ(storage.size(), names.size());
  EXPECT_TRUE(names.count("encoder_m.gru.W_xr"));
  EXPECT_TRUE(names.count("encoder_in.gru.W_xr"));
  EXPECT_TRUE(names.count("encoder_c.gru.W_xr"));
  EXPECT_NE(m.params.enc_m.w_xr.value, m.params.enc_in.w_xr.value);
  const auto sorted = m.params.sorted();
  EXPECT_TRUE(std::is_sorted(sorted.begin(), sorted.end(),
                             [](const Parameter* a, const Parameter* b) { return a->name < b->name; }));
}

TEST(MTNetModel, SameSeedSameParameters) {
  const MTNetConfig c = small_config();
  const MTNetModel a = MTNetModel::create(c, 42), b = MTNetModel::create(c, 42);
  const auto pa = a.params.sorted(), pb = b.params.sorted();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(MemoryEmbed, ZeroEncoderGivesZeroVectors) {
  const MTNetConfig c = small_config();
  Rng rng(1);
  const WindowSample s = random_sample(c, rng);
  const MTNetParams p = MTNetParams::zeros(c);
  Graph g;
  const auto m = memory_embed(constants(g, s.blocks), bind(g, p), c, false, rng);
  ASSERT_EQ(m.size(), 3u);
  for (Var v : m) EXPECT_EQ(v.value(), Tensor(Shape{2}));
}

TEST(MemoryEmbed, EachEmbeddingMatchesStandaloneEncodeAndPermutes) {
  const MTNetConfig c = small_config();
  Rng rng(2);
  const MTNetModel model = MTNetModel::create(c, 2);
  const WindowSample s = random_sample(c, rng);
  Graph g;
  const MTNetVars vars = bind(g, model.params);
  const auto m = memory_embed(constants(g, s.blocks), vars, c, false, rng);
  const auto ctx = context_embed(constants(g, s.blocks), vars, c, false, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m[i].value(), encode(s.blocks[i], model.params.enc_m, c.encoder()));
    EXPECT_EQ(ctx[i].value(), encode(s.blocks[i], model.params.enc_c, c.encoder()));
  }
  const std::vector<Tensor> permuted = {s.blocks[2], s.blocks[0], s.blocks[1]};
  const auto mp = memory_embed(constants(g, permuted), vars, c, false, rng);
  EXPECT_EQ(mp[0].value(), m[2].value());
  EXPECT_EQ(mp[1].value(), m[0].value());
  EXPECT_EQ(mp[2].value(), m[1].value());
  EXPECT_EQ(query_embed(g.constant(s.query), vars, c, false, rng).value(),
            encode(s.query, model.params.enc_in, c.encoder()));
}

TEST(MemoryEmbed, WrongBlockShapeIsDimensionError) {
  const MTNetConfig c = small_config();
  const MTNetParams p = MTNetParams::zeros(c);
  Rng rng(3);
  Graph g;
  const std::vector<Var> bad = {g.constant(Tensor(Shape{3, 5}))};
  EXPECT_THROW(memory_embed(bad, bind(g, p), c, false, rng), DimensionError);
}

TEST(AttentionWeights, IdenticalMemoryOrZeroQueryIsUniform) {
  Rng rng(4);
  Graph g;
  const Tensor m = random_tensor(Shape{4}, rng);
  const std::vector<Var> same = {g.constant(m), g.constant(m), g.constant(m)};
  const Tensor p = attention_weights(g.constant(random_tensor(Shape{4}, rng)), same).value();
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
  const std::vector<Var> mixed = {g.constant(random_tensor(Shape{4}, rng)),
                                  g.constant(random_tensor(Shape{4}, rng))};
  const Tensor q = attention_weights(g.constant(Tensor(Shape{4})), mixed).value();
  for (double v : q.data()) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(AttentionWeights, HandSoftmax) {
  Graph g;
  const std::vector<Var> m = {g.constant(Tensor::vector({1, 0})), g.constant(Tensor::vector({0, 1}))};
  const Tensor p = attention_weights(g.constant(Tensor::vector({1, 0})), m).value();
  EXPECT_NEAR(p[0], 0.7311, 1e-4);
  EXPECT_NEAR(p[1], 0.2689, 1e-4);
}

TEST(WeightedOutputs, UniformOneHotAndRandom) {
  Rng rng(5);
  Graph g;
  const std::vector<Tensor> c = {random_tensor(Shape{3}, rng), random_tensor(Shape{3}, rng)};
  const auto cv = constants(g, c);
  const auto uni = weighted_outputs(g.constant(Tensor::vector({0.5, 0.5})), cv);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(uni[i].value()[k], c[i][k] / 2.0);
  const auto hot = weighted_outputs(g.constant(Tensor::vector({0.0, 1.0})), cv);
  EXPECT_EQ(hot[0].value(), Tensor(Shape{3}));
  EXPECT_EQ(hot[1].value(), c[1]);
  const Tensor p = random_tensor(Shape{2}, rng, 0.0, 1.0);
  const auto rnd = weighted_outputs(g.constant(p), cv);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(rnd[i].value()[k], p[i] * c[i][k]);
  EXPECT_THROW(weighted_outputs(g.constant(Tensor::vector({1.0})), cv), DimensionError);
}

TEST(DenseCombine, ZeroWeightsGiveBias) {
  const MTNetConfig c = small_config();
  MTNetParams p = MTNetParams::zeros(c);
  p.dense_b.value = Tensor::vector({1.5, -2.0});
  Rng rng(6);
  Graph g;
  const std::vector<Var> o = {g.constant(random_tensor(Shape{2}, rng)), g.constant(random_tensor(Shape{2}, rng)),
                              g.constant(random_tensor(Shape{2}, rng))};
  EXPECT_EQ(dense_combine(g.constant(random_tensor(Shape{2}, rng)), o, bind(g, p)).value(),
            Tensor::vector({1.5, -2.0}));
}

TEST(DenseCombine, OnesTimesUnitQuery) {
  MTNetConfig c = small_config();
  c.targets = {0};
  MTNetParams p = MTNetParams::zeros(c);
  p.dense_w.value.fill(1.0);
  Graph g;
  const std::vector<Var> o(3, g.constant(Tensor(Shape{2})));
  EXPECT_EQ(dense_combine(g.constant(Tensor::vector({1, 0})), o, bind(g, p)).value(), Tensor::vector({1.0}));
}

TEST(DenseCombine, MatchesMatrixProduct) {
  const MTNetConfig c = small_config();
  MTNetParams p = MTNetParams::zeros(c);
  Rng rng(7);
  p.dense_w.value = random_tensor(p.dense_w.value.shape(), rng);
  p.dense_b.value = random_tensor(p.dense_b.value.shape(), rng);
  std::vector<Tensor> parts;
  for (int i = 0; i < 4; ++i) parts.push_back(random_tensor(Shape{2}, rng));
  Graph g;
  const std::vector<Var> o = {g.constant(parts[1]), g.constant(parts[2]), g.constant(parts[3])};
  const Tensor y = dense_combine(g.constant(parts[0]), o, bind(g, p)).value();
  for (std::size_t k = 0; k < 2; ++k) {
    double want = p.dense_b.value[k];
    for (std::size_t j = 0; j < 8; ++j) want += p.dense_w.value.at(k, j) * parts[j / 2][j % 2];
    EXPECT_NEAR(y[k], want, 1e-14);
  }
}

TEST(ArPredict, PersistenceConstantAndDotProduct) {
  MTNetConfig c = small_config();
  Rng rng(8);
  const Tensor q = random_tensor(Shape{3, 6}, rng);
  {
    c.ar_window = 1;
    MTNetParams p = MTNetParams::zeros(c);
    p.ar_w.value = Tensor::vector({1.0});
    Graph g;
    EXPECT_EQ(ar_predict(q, bind(g, p), c).value(), Tensor::vector({q.at(2, 5), q.at(0, 5)}));
  }
  {
    c.ar_window = 3;
    MTNetParams p = MTNetParams::zeros(c);
    p.ar_b.value = Tensor::scalar(4.25);
    Graph g;
    EXPECT_EQ(ar_predict(q, bind(g, p), c).value(), Tensor::vector({4.25, 4.25}));
  }
  {
    MTNetParams p = MTNetParams::zeros(c);
    p.ar_w.value = random_tensor(Shape{3}, rng);
    p.ar_b.value = random_tensor(Shape{1}, rng);
    Graph g;
    const Tensor y = ar_predict(q, bind(g, p), c).value();
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t v = c.targets[k];
      const double want = p.ar_w.value[0] * q.at(v, 5) + p.ar_w.value[1] * q.at(v, 4) +
                          p.ar_w.value[2] * q.at(v, 3) + p.ar_b.value[0];
      EXPECT_NEAR(y[k], want, 1e-15);
    }
  }
}

TEST(ArPredict, WindowLongerThanQueryIsConfigError) {
  MTNetConfig c = small_config();
  MTNetParams p = MTNetParams::zeros(c);
  Graph g;
  const MTNetVars vars = bind(g, p);
  EXPECT_THROW(ar_predict(Tensor(Shape{3, 2}), vars, c), ConfigError);
}

TEST(Forward, ZeroNeuralPartEqualsAr) {
  const MTNetConfig c = small_config();
  Rng rng(9);
  MTNetModel m = MTNetModel::create(c, 9);
  m.params.zero_neural();
  for (int i = 0; i < 50; ++i) {
    const WindowSample s = random_sample(c, rng);
    Graph g;
    EXPECT_EQ(predict(m, s).value, ar_predict(s.query, bind(g, m.params), c).value());
  }
}

TEST(Forward, ZeroArEqualsDenseHead) {
  const MTNetConfig c = small_config();
  Rng rng(10);
  MTNetModel m = MTNetModel::create(c, 10);
  m.params.ar_w.value.fill(0.0);
  m.params.ar_b.value.fill(0.0);
  for (int i = 0; i < 20; ++i) {
    const WindowSample s = random_sample(c, rng);
    Graph g;
    const MTNetVars v = bind(g, m.params);
    const auto blocks = constants(g, s.blocks);
    Var u = query_embed(g.constant(s.query), v, c, false, rng);
    Var p = attention_weights(u, memory_embed(blocks, v, c, false, rng));
    const Tensor head = dense_combine(u, weighted_outputs(p, context_embed(blocks, v, c, false, rng)), v).value();
    EXPECT_EQ(predict(m, s).value, head);
  }
}

TEST(Forward, TraceCarriesValidAttentionAndRanges) {
  const MTNetConfig c = small_config();
  Rng rng(11);
  const MTNetModel m = MTNetModel::create(c, 11);
  for (int i = 0; i < 100; ++i) {
    const WindowSample s = random_sample(c, rng, 500 + i);
    const Prediction p = predict(m, s);
    EXPECT_TRUE(valid_attention(p.trace.weights));
    EXPECT_EQ(p.trace.weights.numel(), 3u);
    EXPECT_EQ(p.trace.block_time_ranges, s.block_time_ranges);
    EXPECT_EQ(p.trace.target_time, s.target_time);
  }
}

TEST(Forward, BlockPermutationWithPermutedHeadGivesSamePrediction) {
  const MTNetConfig c = small_config();
  Rng rng(12);
  const MTNetModel m = MTNetModel::create(c, 12);
  const std::size_t perm[] = {2, 0, 1};  // new block j is old block perm[j]
  for (int trial = 0; trial < 20; ++trial) {
    const WindowSample s = random_sample(c, rng);
    WindowSample t = s;
    MTNetModel mp = m;
    const std::size_t d = c.hidden;
    for (std::size_t j = 0; j < 3; ++j) {
      t.blocks[j] = s.blocks[perm[j]];
      for (std::size_t k = 0; k < c.num_targets(); ++k)
        for (std::size_t e = 0; e < d; ++e)
          mp.params.dense_w.value.at(k, (j + 1) * d + e) = m.params.dense_w.value.at(k, (perm[j] + 1) * d + e);
    }
    const Prediction a = predict(m, s), b = predict(mp, t);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b.trace.weights[j], a.trace.weights[perm[j]], 1e-15);
    for (std::size_t k = 0; k < a.value.numel(); ++k) EXPECT_NEAR(a.value[k], b.value[k], 1e-12);
  }
}

TEST(Forward, EvalModeIsPure) {
  MTNetConfig c = small_config();
  c.dropout_rate = 0.3;
  Rng rng(13);
  const MTNetModel m = MTNetModel::create(c, 13);
  const WindowSample s = random_sample(c, rng);
  EXPECT_EQ(predict(m, s).value, predict(m, s).value);
}

TEST(Forward, L1GradientsMatchFiniteDifferencesOnTinyConfig) {
  const MTNetConfig c = tiny_config();
  Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    MTNetModel m = MTNetModel::create(c, 100 + trial);
    m.params.for_each([&](Parameter& p) { p.value = random_tensor(p.value.shape(), rng, -0.9, 0.9); });
    const WindowSample s = random_sample(c, rng);
    m.params.zero_grad();
    {
      Graph g;
      Rng unused(0);
      const ForwardResult r = forward(g, s, bind(g, m.params), c, false, unused);
      const Var preds[] = {r.prediction};
      g.backward(l1_loss(preds, std::span<const Tensor>(&s.target, 1)));
    }
    const auto r = check_gradients(m.params.sorted(), [&] {
      const Tensor y = predict(m, s).value;
      return l1_loss(std::span<const Tensor>(&y, 1), std::span<const Tensor>(&s.target, 1));
    });
    EXPECT_LT(r.max_error, 1e-4) << "worst " << r.worst;
  }
}

}  // namespace
}  // namespace mtnet
