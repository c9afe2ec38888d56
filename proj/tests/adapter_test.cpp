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

#include <gtest/gtest.h>

#include "checks.hpp"
#include "oracles.hpp"
#include "tast/adapter.hpp"
#include "tast/errors.hpp"

using namespace tast;

TEST(EnsembleAdapter, DefaultOutputDimIsQuarterOfInput) {
  EXPECT_EQ(EnsembleAdapter::default_output_dim(64), 16u);
  EXPECT_EQ(EnsembleAdapter::default_output_dim(3), 1u);
}

TEST(EnsembleAdapter, InitialFastFactorsAreSigns) {
  const EnsembleAdapter a(12, 3, 5, RngSeed{4});
  for (std::size_t i = 0; i < a.members(); ++i) {
    for (double x : a.fast_r(i)) EXPECT_EQ(std::abs(x), 1.0);
    for (double x : a.fast_s(i)) EXPECT_EQ(std::abs(x), 1.0);
  }
  const EnsembleAdapter b(12, 3, 5, RngSeed{4});
  EXPECT_TRUE(a.same_parameters(b));
}

TEST(EnsembleAdapter, ForwardEqualsMaterializedMemberWeight) {
  Rng rng(RngSeed{21});
  EnsembleAdapter a(9, 4, 3, RngSeed{8});
  for (std::size_t i = 0; i < 3; ++i)
    for (double& x : a.fast_r(i)) x = rng.normal(0, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const Matrix w = a.member_weight(i);
    for (int q = 0; q < 20; ++q) {
      const Vec z = oracle::random_vec(rng, 9);
      const Vec y = a.forward(i, z), ref = matvec(w, z);
      const Vec byhand = oracle::member_forward({a.shared_weight(), a.fast_r(i), a.fast_s(i)}, z);
      for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(y[k], ref[k], 1e-10);
        EXPECT_NEAR(y[k], byhand[k], 1e-10);
      }
    }
  }
}

TEST(EnsembleAdapter, BadMemberOrShapeThrows) {
  EnsembleAdapter a(4, 2, 2, RngSeed{1});
  EXPECT_THROW(a.forward(2, Vec(4, 1.0)), Error);
  EXPECT_THROW(a.forward(0, Vec(3, 1.0)), Error);
  AdapterGradients g{Matrix(2, 3), Vec(2), Vec(4)};
  EXPECT_THROW(a.apply_update(0, g, 0.1), Error);
}

TEST(EnsembleAdapter, ResetFastFactorsMakesMembersIdentical) {
  EnsembleAdapter a(8, 2, 4, RngSeed{3});
  a.reset_fast_factors_to_one();
  const Vec z{0.3, -1.0, 0.2, 0.5, 0.0, 1.5, -0.7, 0.1};
  const Vec y0 = a.forward(0, z);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(a.forward(i, z), y0);
}

TEST(EnsembleAdapter, PrototypesAreCentroidsOfImages) {
  Rng rng(RngSeed{5});
  const LinearHead head = oracle::random_head(rng, 3, 6);
  const SupportSet set = oracle::random_support(rng, head, 12, 4);
  const EnsembleAdapter a(6, 2, 2, RngSeed{6});
  const auto mu = a.compute_prototypes(1, set);
  const auto ref = oracle::centroids(oracle::member_images({a.shared_weight(), a.fast_r(1), a.fast_s(1)}, set));
  for (std::size_t k = 0; k < 3; ++k) {
    ASSERT_EQ(mu[k].has_value(), ref[k].has_value());
    if (!mu[k]) continue;
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR((*mu[k])[j], (*ref[k])[j], 1e-12);
  }
}

TEST(AdapterGradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    double gap = 0.0;
    EXPECT_LT(checks::tast_gradient_error(1000 + seed, &gap), oracle::kGradTolerance) << "seed " << seed;
    EXPECT_LT(gap, 1e-10) << "seed " << seed;
  }
}

TEST(AdapterGradients, PseudoLabelsMatchVote) {
  Rng rng(RngSeed{12});
  const LinearHead head = oracle::random_head(rng, 3, 8);
  const SupportSet set = oracle::random_support(rng, head, 20, 5);
  const EnsembleAdapter a(8, 2, 2, RngSeed{13});
  const auto images = a.embed_support(0, set);
  const auto entry = support_distributions(images, class_centroids(images), 0.1);
  std::vector<NeighborList> nn;
  for (int q = 0; q < 10; ++q) nn.push_back(set.nearest_neighbors(oracle::random_vec(rng, 8), 3));
  const auto ref = oracle::vote_targets({a.shared_weight(), a.fast_r(0), a.fast_s(0)}, set, nn, 0.1);
  for (std::size_t q = 0; q < nn.size(); ++q) {
    const Distribution t = vote(nn[q], entry, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(t[k], ref[q][k], 1e-15);
      // Votes are multiples of 1/N_s.
      EXPECT_NEAR(t[k] * 3.0, std::round(t[k] * 3.0), 1e-12);
    }
  }
}

TEST(AdapterGradients, CosineGradAccumulatesScaled) {
  const Vec a{1.0, 0.0}, b{1.0, 1.0};
  Vec out{1.0, 1.0};
  accumulate_cosine_grad(a, b, 2.0, out);
  // d/da cos = b/(|a||b|) - cos a/|a|^2 = (0, 1/sqrt 2)
  EXPECT_NEAR(out[0], 1.0, 1e-15);
  EXPECT_NEAR(out[1], 1.0 + 2.0 / std::sqrt(2.0), 1e-15);
}
