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

#include <cmath>
#include <numeric>

#include "mtnet/baselines.hpp"
#include "mtnet/errors.hpp"
#include "test_util.hpp"

namespace mtnet {
namespace {

using testing::random_tensor;

const std::vector<std::size_t> kFirst = {0};

Tensor ar1_series(std::size_t length, double phi, double start) {
  Tensor v(Shape{1, length});
  v[0] = start;
  for (std::size_t t = 1; t < length; ++t) v[t] = phi * v[t - 1];
  return v;
}

// Stable noiseless AR(2) oscillation with a nonzero mean.
Tensor ar2_series(std::size_t length) {
  Tensor v(Shape{1, length});
  v[0] = 1.0;
  v[1] = 0.4;
  for (std::size_t t = 2; t < length; ++t) v[t] = 0.3 + 1.2 * v[t - 1] - 0.5 * v[t - 2];
  return v;
}

double norm2(const std::vector<double>& c) {
  return std::sqrt(std::inner_product(c.begin(), c.end(), c.begin(), 0.0));
}

double training_residual(const LinearARModel& m, const Tensor& v, TimeRange r) {
  double s = 0.0;
  for (std::size_t t = r.begin + m.window - 1; t + m.horizon < r.end; ++t) {
    double y = m.intercepts[0];
    for (std::size_t j = 0; j < m.window; ++j) y += m.coefficients[0][j] * v.at(0, t - j);
    const double e = v.at(0, t + m.horizon) - y;
    s += e * e;
  }
  return std::sqrt(s);
}

TEST(SolveSpd, SolvesAndRejectsSingular) {
  const std::vector<double> x = solve_spd(Tensor::matrix({{4, 2}, {2, 3}}), {10, 11});
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 3.0, 1e-14);
  try {
    solve_spd(Tensor::matrix({{1, 1}, {1, 1}}), {1, 1});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda > 0"), std::string::npos);
  }
}

TEST(FitLinearAr, RecoversExactAr1) {
  const Tensor v = ar1_series(60, 0.9, 10.0);
  const LinearARModel m = fit_linear_ar(v, {0, 60}, 1, 0.0, 1, kFirst);
  EXPECT_NEAR(m.coefficients[0][0], 0.9, 1e-8);
  EXPECT_NEAR(m.intercepts[0], 0.0, 1e-8);
}

TEST(FitLinearAr, RecoversNoiselessAr2) {
  const Tensor v = ar2_series(200);
  const LinearARModel m = fit_linear_ar(v, {0, 200}, 2, 0.0, 1, kFirst);
  EXPECT_NEAR(m.coefficients[0][0], 1.2, 1e-6);
  EXPECT_NEAR(m.coefficients[0][1], -0.5, 1e-6);
  EXPECT_NEAR(m.intercepts[0], 0.3, 1e-6);
}

TEST(FitLinearAr, HugePenaltyGivesMeanPredictor) {
  Rng rng(1);
  const Tensor v = random_tensor(Shape{1, 80}, rng, 2.0, 4.0);
  const LinearARModel m = fit_linear_ar(v, {0, 80}, 3, 1e9, 2, kFirst);
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 2; t + 2 < 80; ++t, ++count) mean += v.at(0, t + 2);
  mean /= static_cast<double>(count);
  for (double c : m.coefficients[0]) EXPECT_NEAR(c, 0.0, 1e-3);
  EXPECT_NEAR(m.intercepts[0], mean, 1e-3);
}

TEST(FitLinearAr, ConstantSeriesNeedsRidge) {
  const Tensor v(Shape{1, 30}, 5.0);
  EXPECT_THROW(fit_linear_ar(v, {0, 30}, 1, 0.0, 1, kFirst), NumericError);
  const LinearARModel m = fit_linear_ar(v, {0, 30}, 2, 1.0, 1, kFirst);
  const double plain = 5.0;
  for (double c : m.coefficients[0]) EXPECT_LT(std::abs(c), 1.0);
  EXPECT_NEAR(predict_linear(m, Tensor(Shape{1, 2}, 5.0))[0], plain, 1e-2);
}

TEST(FitLinearAr, ArgumentChecks) {
  const Tensor v(Shape{1, 10}, 1.0);
  EXPECT_THROW(fit_linear_ar(v, {0, 10}, 5, 0.1, 5, kFirst), ConfigError);
  EXPECT_THROW(fit_linear_ar(v, {0, 10}, 0, 0.1, 1, kFirst), ConfigError);
  EXPECT_THROW(fit_linear_ar(v, {0, 10}, 1, -1.0, 1, kFirst), ConfigError);
  EXPECT_THROW(fit_linear_ar(v, {0, 10}, 1, 0.1, 1, std::vector<std::size_t>{1}), ConfigError);
}

TEST(FitLinearAr, RidgePathShrinksCoefficientsAndGrowsResidual) {
  Rng rng(2);
  Tensor v = ar2_series(150);
  for (double& x : v.data()) x += 0.05 * rng.normal();
  double prev_norm = std::numeric_limits<double>::infinity();
  double prev_resid = 0.0;
  for (double lambda : {0.0, 0.5, 5.0, 50.0}) {
    const LinearARModel m = fit_linear_ar(v, {0, 150}, 4, lambda, 1, kFirst);
    const double n = norm2(m.coefficients[0]);
    const double r = training_residual(m, v, {0, 150});
    EXPECT_LT(n, prev_norm) << lambda;
    EXPECT_GE(r, prev_resid - 1e-12) << lambda;
    prev_norm = n;
    prev_resid = r;
  }
}

TEST(PredictLinear, PersistenceConstantAndDotProduct) {
  Rng rng(3);
  const Tensor h = random_tensor(Shape{2, 5}, rng);
  LinearARModel m;
  m.window = 1;
  m.targets = {1, 0};
  m.coefficients = {{1.0}, {1.0}};
  m.intercepts = {0.0, 0.0};
  EXPECT_EQ(predict_linear(m, h), Tensor::vector({h.at(1, 4), h.at(0, 4)}));
  m.coefficients = {{0.0}, {0.0}};
  m.intercepts = {2.5, -1.0};
  EXPECT_EQ(predict_linear(m, h), Tensor::vector({2.5, -1.0}));
  m.window = 3;
  m.coefficients = {{0.2, -0.7, 1.1}, {0.5, 0.5, 0.5}};
  const Tensor y = predict_linear(m, h);
  EXPECT_NEAR(y[0], 2.5 + 0.2 * h.at(1, 4) - 0.7 * h.at(1, 3) + 1.1 * h.at(1, 2), 1e-15);
  EXPECT_NEAR(y[1], -1.0 + 0.5 * (h.at(0, 4) + h.at(0, 3) + h.at(0, 2)), 1e-15);
  EXPECT_THROW(predict_linear(m, Tensor(Shape{2, 2})), DimensionError);
}

TEST(SelectLinearAr, PicksWindowThatFitsTheGenerator) {
  Rng rng(4);
  Tensor v(Shape{1, 400});
  for (std::size_t t = 0; t < 400; ++t) v[t] = 1.0 + std::sin(0.3 * static_cast<double>(t)) + 0.01 * rng.normal();
  const Split split = chronological_split(400);
  const Scaler sc = Scaler::fit(v, split.train);
  const Tensor scaled = sc.apply(v);
  const std::vector<std::size_t> windows = {1, 2, 4};
  const std::vector<double> lambdas = {0.0};
  const LinearSelection sel = select_linear_ar(scaled, split, sc, windows, lambdas, 1, kFirst);
  ASSERT_EQ(sel.rows.size(), 3u);
  EXPECT_GE(sel.model.window, 2u);
  const EvalReport r = evaluate_linear(sel.model, scaled, split.test, sc);
  EXPECT_GT(r.corr, 0.99);
  EXPECT_EQ(r.samples, split.test.size());
}

TEST(SelectLinearAr, InfeasibleWindowsAreMarked) {
  const Tensor v = ar2_series(50);
  const Split split = chronological_split(50);
  const Scaler sc = Scaler::fit(v, split.train);
  const std::vector<std::size_t> windows = {2, 64};
  const std::vector<double> lambdas = {0.1, 1.0};
  const LinearSelection sel = select_linear_ar(sc.apply(v), split, sc, windows, lambdas, 1, kFirst);
  ASSERT_EQ(sel.rows.size(), 4u);
  EXPECT_TRUE(sel.rows[0].ok);
  EXPECT_FALSE(sel.rows[3].ok);
  EXPECT_EQ(sel.model.window, 2u);
}

TEST(DefaultGrids, PowersOfTwo) {
  const auto l = default_ridge_lambdas();
  ASSERT_EQ(l.size(), 11u);
  EXPECT_EQ(l.front(), std::ldexp(1.0, -10));
  EXPECT_EQ(l[1], std::ldexp(1.0, -8));
  EXPECT_EQ(l.back(), 1024.0);
  const auto w = default_ar_windows();
  ASSERT_EQ(w.size(), 10u);
  EXPECT_EQ(w.front(), 1u);
  EXPECT_EQ(w.back(), 512u);
}

}  // namespace
}  // namespace mtnet
