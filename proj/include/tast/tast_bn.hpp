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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tast/engine.hpp"
#include "tast/mathcore.hpp"
#include "tast/prototype.hpp"
#include "tast/support_set.hpp"

namespace tast {

struct BatchNormStats {
  Vec mean;
  Vec var;  // biased (population) variance
};

/// Intermediates of one row through the extractor.
struct BnTrace {
  Vec normalized;  // (a - mean) / sqrt(var + eps)
  Vec hidden;      // gamma o normalized + beta, before ReLU
  Vec output;      // W2 relu(hidden) + b2
};

/// f(x) = W2 ReLU(gamma o BN(W1 x + b1) + beta) + b2.
///
/// At test time only gamma and beta move. `source_stats` holds the
/// normalization statistics of the source data and is what the unadapted
/// network uses.
struct ToyBnExtractor {
  static constexpr double kEps = 1e-5;

  Matrix w1;  // hidden x input
  Vec b1;
  Vec gamma;
  Vec beta;
  Matrix w2;  // output x hidden
  Vec b2;
  BatchNormStats source_stats;

  static ToyBnExtractor random(std::size_t input_dim, std::size_t hidden_dim,
                               std::size_t output_dim, RngSeed seed);

  std::size_t input_dim() const noexcept { return w1.cols(); }
  std::size_t hidden_dim() const noexcept { return w1.rows(); }
  std::size_t output_dim() const noexcept { return w2.rows(); }

  void validate() const;

  Vec preactivation(std::span<const double> x) const;
  /// Statistics of the pre-activations of `rows`. Needs at least two rows.
  BatchNormStats batch_stats(std::span<const Vec> rows) const;
  BnTrace trace(std::span<const double> x, const BatchNormStats& stats) const;
  std::vector<Vec> forward(std::span<const Vec> rows, const BatchNormStats& stats) const;
  /// Forward pass normalized with the statistics of `rows` itself.
  std::vector<Vec> bn_forward(std::span<const Vec> rows) const;
};

/// Unit-norm classifier rows.
Prototypes classifier_prototypes(const LinearHead& head);

struct BnLoss {
  double loss = 0.0;
  Vec grad_gamma;
  Vec grad_beta;
};

/// TAST objective for the BN affine parameters. Batch and support rows are
/// both normalized with `stats`. Prototypes are means of the unit-norm
/// support embeddings unless `fixed_prototypes` is given. The pseudo label
/// is held constant.
BnLoss tast_bn_loss_and_gradients(const ToyBnExtractor& extractor, const BatchNormStats& stats,
                                  std::span<const Vec> batch, const SupportSet& set,
                                  std::span<const NeighborList> neighbors, double tau,
                                  const Prototypes* fixed_prototypes = nullptr);

/// TAST-BN: the support set stores raw inputs, and gamma/beta are fine-tuned
/// with neighbor-vote pseudo labels. There is a single predictor, no ensemble.
class TastBnEngine {
 public:
  TastBnEngine(ToyBnExtractor extractor, LinearHead head, const TastConfig& config);

  BatchPrediction adapt_batch(std::span<const Vec> raw_batch);

  const SupportSet& support() const noexcept { return support_; }
  const ToyBnExtractor& extractor() const noexcept { return extractor_; }
  const LinearHead& head() const noexcept { return head_; }
  const TastConfig& config() const noexcept { return config_; }
  /// Non-empty only in fixed-prototype mode.
  const Prototypes& frozen_prototypes() const noexcept { return fixed_; }

 private:
  SupportEmbeddings embed_support(const BatchNormStats& stats) const;

  ToyBnExtractor extractor_;
  LinearHead head_;
  TastConfig config_;
  SupportSet support_;
  Prototypes fixed_;
  AdamState adam_gamma_;
  AdamState adam_beta_;
};

}  // namespace tast
