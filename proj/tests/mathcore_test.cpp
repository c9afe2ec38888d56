// Copyright 2026 The TAST Engine Authors
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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "tast/errors.hpp"
#include "tast/mathcore.hpp"

using namespace tast;

namespace {

double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(CosineDistance, OrthogonalOppositeAndParallel) {
  EXPECT_DOUBLE_EQ(cosine_distance(Vec{1, 0}, Vec{0, 3}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(Vec{1, 0}, Vec{-2, 0}), 2.0);
  EXPECT_NEAR(cosine_distance(Vec{1, 1}, Vec{2, 2}), 0.0, 1e-15);
}

TEST(CosineDistance, ScaleInvariantAndClamped) {
  Rng rng(RngSeed{3});
  for (int i = 0; i < 100; ++i) {
    Vec a(7), b(7);
    for (double& x : a) x = rng.normal(0, 1);
    for (double& x : b) x = rng.normal(0, 1);
    const double d = cosine_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    Vec a5 = a;
    for (double& x : a5) x *= 5.0;
    EXPECT_NEAR(cosine_distance(a5, b), d, 1e-14);
    EXPECT_GE(cosine_distance(a, a), 0.0);
  }
}

TEST(CosineDistance, ZeroVectorIsAnError) {
  try {
    cosine_distance(Vec{0, 0}, Vec{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNormVector);
  }
  EXPECT_THROW(normalized(Vec{0, 0, 0}), Error);
}

TEST(CosineDistance, DimensionMismatch) {
  EXPECT_THROW(cosine_distance(Vec{1, 0}, Vec{1, 0, 0}), Error);
}

TEST(Softmax, ShiftInvariance) {
  Rng rng(RngSeed{11});
  for (int i = 0; i < 200; ++i) {
    Vec logits(6);
    for (double& x : logits) x = rng.normal(0, 3);
    const double c = rng.uniform(-50, 50);
    Vec shifted = logits;
    for (double& x : shifted) x += c;
    const Vec p = softmax(logits), q = softmax(shifted);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}

TEST(Softmax, FromDistancesMatchesNegatedLogits) {
  const Vec d{0.1, 0.5, 1.7};
  const double tau = 0.1;
  const Vec p = softmax_from_distances(d, tau);
  const Vec q = softmax(Vec{-1.0, -5.0, -17.0});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[k], q[k], 1e-15);
  EXPECT_NEAR(sum(p), 1.0, 1e-15);
}

TEST(Softmax, ExtremeTemperatureStaysFinite) {
  const Vec p = softmax_from_distances(Vec{0.0, 2.0}, 1e-4);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
}

TEST(Entropy, UniformAndOneHot) {
  EXPECT_NEAR(shannon_entropy(Vec{0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-15);
  EXPECT_EQ(shannon_entropy(Vec{0, 1, 0}), 0.0);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  EXPECT_NEAR(cross_entropy(Vec{1, 0}, Vec{0, 1}), -std::log(1e-12), 1e-9);
  EXPECT_NEAR(cross_entropy(Vec{0.5, 0.5}, Vec{0.5, 0.5}), std::log(2.0), 1e-15);
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(Vec{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(argmax(Vec{1, 1, 1}), 0u);
  EXPECT_EQ(argmax(Vec{-3, -1, -2}), 1u);
}

TEST(MatrixOps, MatvecAndTranspose) {
  Matrix m(2, 3);
  m(0, 0) = 1; m(0, 1) = 2; m(0, 2) = 3;
  m(1, 0) = 4; m(1, 1) = 5; m(1, 2) = 6;
  EXPECT_EQ(matvec(m, Vec{1, 0, -1}), (Vec{-2, -2}));
  EXPECT_EQ(matvec_transposed(m, Vec{1, 1}), (Vec{5, 7, 9}));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(RngSeed{42}), b(RngSeed{42}), c(RngSeed{43});
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const double x = a.normal(0, 1);
    EXPECT_EQ(x, b.normal(0, 1));
    differs |= x != c.normal(0, 1);
  }
  EXPECT_TRUE(differs);
}

TEST(Kaiming, VarianceIsTwoOverFanIn) {
  Rng rng(RngSeed{5});
  const Matrix w = kaiming_normal(200, 50, rng);
  double s = 0.0, s2 = 0.0;
  for (double x : w.values()) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 2.0 / 50.0, 0.004);
}

// Hand-rolled reference of the bias-corrected update.
TEST(Adam, MatchesReferenceRecurrence) {
  Vec param{0.5, -1.0, 2.0};
  AdamState st(3);
  Vec ref = param, m(3, 0.0), v(3, 0.0);
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Rng rng(RngSeed{9});
  for (int t = 1; t <= 25; ++t) {
    Vec g(3);
    for (double& x : g) x = rng.normal(0, 1);
    adam_step(param, g, st, lr);
    for (int j = 0; j < 3; ++j) {
      m[j] = b1 * m[j] + (1 - b1) * g[j];
      v[j] = b2 * v[j] + (1 - b2) * g[j] * g[j];
      const double mh = m[j] / (1 - std::pow(b1, t));
      const double vh = v[j] / (1 - std::pow(b2, t));
      ref[j] -= lr * mh / (std::sqrt(vh) + eps);
    }
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(param[j], ref[j], 1e-14);
  }
  EXPECT_EQ(st.t, 25u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Vec param{1.0, 1.0};
  AdamState st(2);
  adam_step(param, Vec{3.0, -0.002}, st, 0.1);
  EXPECT_NEAR(param[0], 0.9, 1e-8);
  EXPECT_NEAR(param[1], 1.1, 1e-5);
}

TEST(Adam, ZeroGradientLeavesParametersAndMomentsUntouched) {
  Vec param{1.0, 2.0};
  AdamState st(2);
  adam_step(param, Vec{0.3, -0.1}, st, 0.01);
  const Vec p0 = param;
  const AdamState s0 = st;
  adam_step(param, Vec{0.0, 0.0}, st, 0.01);
  EXPECT_EQ(param, p0);
  EXPECT_EQ(st.m, s0.m);
  EXPECT_EQ(st.v, s0.v);
  EXPECT_EQ(st.t, s0.t + 1);
}

TEST(Adam, ZeroLearningRateIsIdentity) {
  Vec param{1.0, 2.0};
  AdamState st(2);
  adam_step(param, Vec{5.0, -5.0}, st, 0.0);
  EXPECT_EQ(param, (Vec{1.0, 2.0}));
}

TEST(Adam, ShapeMismatchThrows) {
  Vec param{1.0, 2.0};
  AdamState st(2);
  EXPECT_THROW(adam_step(param, Vec{1.0}, st, 0.1), Error);
}
