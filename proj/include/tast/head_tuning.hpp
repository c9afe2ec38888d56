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

// Last-layer test-time baselines: the linear head is fine-tuned on each test
// batch while the feature extractor stays frozen.

#include <cstddef>
#include <span>

#include "tast/mathcore.hpp"
#include "tast/support_set.hpp"

namespace tast {

struct HeadGradients {
  Matrix weight;
  Vec bias;
};

struct HeadObjective {
  double loss = 0.0;
  HeadGradients grads;
  std::size_t participating = 0;  // rows that contributed to the loss
};

/// Mean prediction entropy H(softmax(W f + b)) over the batch.
HeadObjective entropy_objective(const LinearHead& head, std::span<const Vec> batch);

/// Mean cross-entropy against one-hot argmax pseudo labels, over rows whose
/// top probability reaches `threshold`. Zero loss and gradient if none do.
HeadObjective pseudo_label_objective(const LinearHead& head, std::span<const Vec> batch,
                                     double threshold);

/// A LinearHead with Adam state for W and b.
class HeadTuner {
 public:
  explicit HeadTuner(LinearHead head);

  const LinearHead& head() const noexcept { return head_; }

  /// One Adam step on the entropy objective. Returns the pre-step loss.
  double tentclf_step(std::span<const Vec> batch, double lr);
  /// One Adam step on the confident pseudo-label objective; no-op when no row
  /// qualifies. Returns the pre-step loss.
  double plclf_step(std::span<const Vec> batch, double lr, double threshold = 0.9);

 private:
  void apply(const HeadGradients& grads, double lr);

  LinearHead head_;
  AdamState adam_weight_;
  AdamState adam_bias_;
};

}  // namespace tast
