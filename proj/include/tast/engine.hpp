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
#include <utility>
#include <vector>

#include "tast/adapter.hpp"
#include "tast/mathcore.hpp"
#include "tast/prototype.hpp"
#include "tast/support_set.hpp"

namespace tast {

/// Hyperparameters shared by every online method. Fields that only one
/// method reads say so.
struct TastConfig {
  int neighbors = 1;        // N_s
  int steps = 1;            // T, gradient steps per batch
  int per_class_cap = 100;  // M, -1 keeps every sample
  int members = 20;         // N_e
  double tau = 0.1;
  double lr = 1e-3;
  RngSeed seed{0};
  int output_dim = 0;              // d_phi; 0 = input_dim / 4
  int global_cap = 150;            // TAST-BN total support size; -1 = unlimited
  bool fixed_prototypes = false;   // TAST-BN: classifier rows as frozen prototypes
  double pl_threshold = 0.9;       // PLClf confidence threshold

  void validate() const;
  bool operator==(const TastConfig&) const = default;
};

/// Predictions for one test batch plus the averaged class distributions.
struct BatchPrediction {
  std::vector<int> labels;
  std::vector<Distribution> probs;
  double mean_loss = 0.0;  // mean adaptation loss over the batch's gradient steps
};

/// TAST over a frozen feature extractor.
///
/// Per batch: the batch joins the support set under the source classifier's
/// labels and is entropy-filtered; neighbors are retrieved once in feature
/// space; then T rounds of sequential per-member updates; finally every
/// member's neighbor-averaged prototype distribution is averaged and argmaxed.
class TastEngine {
 public:
  TastEngine(LinearHead head, const TastConfig& config);

  /// Features may be unnormalized; they are projected to the unit sphere.
  BatchPrediction adapt_batch(std::span<const Vec> features);

  /// Ensemble prediction from precomputed neighbors, without any update.
  std::vector<Distribution> predict(std::span<const NeighborList> neighbors) const;

  const LinearHead& head() const noexcept { return head_; }
  const SupportSet& support() const noexcept { return support_; }
  const EnsembleAdapter& adapter() const noexcept { return adapter_; }
  EnsembleAdapter& adapter() noexcept { return adapter_; }
  const TastConfig& config() const noexcept { return config_; }
  std::size_t batches_seen() const noexcept { return batches_; }

 private:
  LinearHead head_;
  TastConfig config_;
  SupportSet support_;
  EnsembleAdapter adapter_;
  std::size_t batches_ = 0;
};

/// Inserts a batch of unit-norm features under the head's predictions and
/// applies the per-class entropy filter.
void update_support(SupportSet& set, const LinearHead& head, std::span<const Vec> features,
                    int per_class_cap);

/// Nearest class centroid in feature space; ties to the lowest class.
std::size_t t3a_predict(const SupportSet& set, std::span<const double> query);

/// TAST without adaptation modules: neighbor-averaged prototype prediction in
/// feature space.
std::pair<std::size_t, Distribution> tast_n_predict(const SupportSet& set,
                                                    std::span<const double> query, int neighbors,
                                                    double tau);

}  // namespace tast
