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

#include "tast/head_tuning.hpp"

#include <cmath>

#include "tast/errors.hpp"

namespace tast {

namespace {

HeadObjective zero_objective(const LinearHead& head) {
  HeadObjective out;
  out.grads.weight = Matrix(head.num_classes(), head.dim());
  out.grads.bias.assign(head.num_classes(), 0.0);
  return out;
}

void accumulate(HeadObjective& out, std::span<const double> f, std::span<const double> glogits) {
  for (std::size_t k = 0; k < glogits.size(); ++k) {
    out.grads.bias[k] += glogits[k];
    auto row = out.grads.weight.row(k);
    for (std::size_t j = 0; j < f.size(); ++j) row[j] += glogits[k] * f[j];
  }
}

void scale(HeadObjective& out, double s) {
  out.loss *= s;
  for (double& x : out.grads.weight.values()) x *= s;
  for (double& x : out.grads.bias) x *= s;
}

}  // namespace

HeadObjective entropy_objective(const LinearHead& head, std::span<const Vec> batch) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "entropy objective on an empty batch");
  HeadObjective out = zero_objective(head);
  for (const auto& f : batch) {
    const Distribution p = head.probs(f);
    const double h = shannon_entropy(p);
    out.loss += h;
    // dH/dlogit_j = -p_j (ln p_j + H)
    Vec g(p.size());
    for (std::size_t j = 0; j < p.size(); ++j)
      g[j] = p[j] > 0.0 ? -p[j] * (std::log(p[j]) + h) : 0.0;
    accumulate(out, f, g);
  }
  out.participating = batch.size();
  scale(out, 1.0 / static_cast<double>(batch.size()));
  return out;
}

HeadObjective pseudo_label_objective(const LinearHead& head, std::span<const Vec> batch,
                                     double threshold) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "pseudo-label objective on an empty batch");
  HeadObjective out = zero_objective(head);
  for (const auto& f : batch) {
    const Distribution p = head.probs(f);
    const std::size_t y = argmax(p);
    if (p[y] < threshold) continue;
    out.loss -= std::log(std::max(p[y], kLogClamp));
    Vec g = p;
    g[y] -= 1.0;
    accumulate(out, f, g);
    ++out.participating;
  }
  if (out.participating > 0) scale(out, 1.0 / static_cast<double>(out.participating));
  return out;
}

HeadTuner::HeadTuner(LinearHead head)
    : head_(std::move(head)),
      adam_weight_(head_.weight.size()),
      adam_bias_(head_.bias.size()) {}

void HeadTuner::apply(const HeadGradients& grads, double lr) {
  adam_step(head_.weight.values(), grads.weight.values(), adam_weight_, lr);
  adam_step(head_.bias, grads.bias, adam_bias_, lr);
}

double HeadTuner::tentclf_step(std::span<const Vec> batch, double lr) {
  const HeadObjective obj = entropy_objective(head_, batch);
  apply(obj.grads, lr);
  return obj.loss;
}

double HeadTuner::plclf_step(std::span<const Vec> batch, double lr, double threshold) {
  const HeadObjective obj = pseudo_label_objective(head_, batch, threshold);
  if (obj.participating == 0) return 0.0;
  apply(obj.grads, lr);
  return obj.loss;
}

}  // namespace tast
