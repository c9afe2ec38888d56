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
#include "tast/errors.hpp"
#include "tast/head_tuning.hpp"
#include "tast/methods.hpp"

using namespace tast;

TEST(HeadObjectives, EntropyGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 40; ++seed)
    EXPECT_LT(checks::head_gradient_error(500 + seed, false), oracle::kGradTolerance) << "seed " << seed;
}

TEST(HeadObjectives, PseudoLabelGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 40; ++seed)
    EXPECT_LT(checks::head_gradient_error(700 + seed, true), oracle::kGradTolerance) << "seed " << seed;
}

TEST(HeadObjectives, EmptyBatchRejected) {
  Rng rng(RngSeed{1});
  const LinearHead h = oracle::random_head(rng, 3, 4);
  EXPECT_THROW(entropy_objective(h, std::vector<Vec>{}), Error);
  EXPECT_THROW(pseudo_label_objective(h, std::vector<Vec>{}, 0.9), Error);
}

TEST(HeadTuner, PseudoLabelStepIsNoOpWhenNothingIsConfident) {
  Rng rng(RngSeed{2});
  HeadTuner tuner(oracle::random_head(rng, 3, 4));
  const LinearHead before = tuner.head();
  const std::vector<Vec> batch{oracle::unit(oracle::random_vec(rng, 4)), oracle::unit(oracle::random_vec(rng, 4))};
  EXPECT_EQ(tuner.plclf_step(batch, 0.1, 1.01), 0.0);
  EXPECT_EQ(tuner.head().weight, before.weight);
  EXPECT_EQ(tuner.head().bias, before.bias);
}

TEST(HeadTuner, EntropyStepLowersEntropyOnSmallLearningRate) {
  Rng rng(RngSeed{3});
  HeadTuner tuner(oracle::random_head(rng, 4, 6));
  std::vector<Vec> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(oracle::unit(oracle::random_vec(rng, 6)));
  const double before = oracle::entropy_loss(tuner.head(), batch);
  tuner.tentclf_step(batch, 1e-3);
  EXPECT_LT(oracle::entropy_loss(tuner.head(), batch), before);
}

TEST(HeadTuningMethods, FirstBatchIsPredictedWithTheSourceHead) {
  Rng rng(RngSeed{4});
  SourceModel model{oracle::random_head(rng, 3, 5), std::nullopt};
  TastConfig cfg;
  cfg.lr = 0.5;
  cfg.pl_threshold = 0.0;
  std::vector<Vec> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(oracle::random_vec(rng, 5));
  for (Method m : {Method::TentClf, Method::PlClf}) {
    auto method = make_method(m, model, cfg);
    const BatchPrediction first = method->process(batch);
    const auto feats = model.features(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(first.probs[i], model.head.probs(feats[i]));
    // The step taken after the first batch changes the second prediction.
    const BatchPrediction second = method->process(batch);
    EXPECT_NE(second.probs[0], first.probs[0]);
  }
}
