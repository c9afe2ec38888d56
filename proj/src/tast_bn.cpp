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

#include "tast/tast_bn.hpp"

#include <cmath>

#include "tast/adapter.hpp"
#include "tast/errors.hpp"

namespace tast {

ToyBnExtractor ToyBnExtractor::random(std::size_t input_dim, std::size_t hidden_dim,
                                      std::size_t output_dim, RngSeed seed) {
  require(hidden_dim >= 2, ErrorCode::InvalidArgument, "BN hidden width must be at least 2");
  Rng rng(seed);
  ToyBnExtractor e;
  e.w1 = kaiming_normal(hidden_dim, input_dim, rng);
  e.b1.assign(hidden_dim, 0.0);
  e.gamma.assign(hidden_dim, 1.0);
  e.beta.assign(hidden_dim, 0.0);
  e.w2 = kaiming_normal(output_dim, hidden_dim, rng);
  e.b2.assign(output_dim, 0.0);
  e.source_stats = {Vec(hidden_dim, 0.0), Vec(hidden_dim, 1.0)};
  return e;
}

void ToyBnExtractor::validate() const {
  const std::size_t h = hidden_dim();
  require(h >= 2, ErrorCode::InvalidArgument, "BN hidden width must be at least 2");
  require(b1.size() == h && gamma.size() == h && beta.size() == h && w2.cols() == h &&
              b2.size() == output_dim() && source_stats.mean.size() == h &&
              source_stats.var.size() == h,
          ErrorCode::ShapeMismatch, "inconsistent BN extractor shapes");
}

Vec ToyBnExtractor::preactivation(std::span<const double> x) const {
  Vec a = matvec(w1, x);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += b1[j];
  return a;
}

BatchNormStats ToyBnExtractor::batch_stats(std::span<const Vec> rows) const {
  require(rows.size() >= 2, ErrorCode::BatchTooSmall, "batch statistics need at least two rows");
  const std::size_t h = hidden_dim();
  BatchNormStats s{Vec(h, 0.0), Vec(h, 0.0)};
  std::vector<Vec> pre;
  pre.reserve(rows.size());
  for (const auto& x : rows) pre.push_back(preactivation(x));
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (const auto& a : pre)
    for (std::size_t j = 0; j < h; ++j) s.mean[j] += a[j] * inv;
  for (const auto& a : pre)
    for (std::size_t j = 0; j < h; ++j) s.var[j] += (a[j] - s.mean[j]) * (a[j] - s.mean[j]) * inv;
  return s;
}

BnTrace ToyBnExtractor::trace(std::span<const double> x, const BatchNormStats& stats) const {
  require(x.size() == input_dim(), ErrorCode::DimensionMismatch, "BN input dimension mismatch");
  const Vec a = preactivation(x);
  BnTrace t;
  t.normalized.resize(a.size());
  t.hidden.resize(a.size());
  Vec act(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    t.normalized[j] = (a[j] - stats.mean[j]) / std::sqrt(stats.var[j] + kEps);
    t.hidden[j] = gamma[j] * t.normalized[j] + beta[j];
    act[j] = t.hidden[j] > 0.0 ? t.hidden[j] : 0.0;
  }
  t.output = matvec(w2, act);
  for (std::size_t j = 0; j < t.output.size(); ++j) t.output[j] += b2[j];
  return t;
}

std::vector<Vec> ToyBnExtractor::forward(std::span<const Vec> rows, const BatchNormStats& stats) const {
  std::vector<Vec> out;
  out.reserve(rows.size());
  for (const auto& x : rows) out.push_back(trace(x, stats).output);
  return out;
}

std::vector<Vec> ToyBnExtractor::bn_forward(std::span<const Vec> rows) const {
  return forward(rows, batch_stats(rows));
}

Prototypes classifier_prototypes(const LinearHead& head) {
  Prototypes out(head.num_classes());
  for (std::size_t k = 0; k < head.num_classes(); ++k) out[k] = normalized(head.weight.row(k));
  return out;
}

namespace {

/// gamma/beta gradient of one row given dL/d(output).
void backprop_row(const ToyBnExtractor& e, const BnTrace& t, std::span<const double> grad_out,
                  BnLoss& g) {
  const Vec g_act = matvec_transposed(e.w2, grad_out);
  for (std::size_t j = 0; j < g_act.size(); ++j) {
    if (t.hidden[j] <= 0.0) continue;
    g.grad_gamma[j] += g_act[j] * t.normalized[j];
    g.grad_beta[j] += g_act[j];
  }
}

}  // namespace

BnLoss tast_bn_loss_and_gradients(const ToyBnExtractor& extractor, const BatchNormStats& stats,
                                  std::span<const Vec> batch, const SupportSet& set,
                                  std::span<const NeighborList> neighbors, double tau,
                                  const Prototypes* fixed_prototypes) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "loss over an empty batch");
  require(neighbors.size() == batch.size(), ErrorCode::ShapeMismatch,
          "one neighbor list per batch row is required");
  require(set.mode() == SupportMode::RawInput, ErrorCode::InvalidArgument,
          "TAST-BN keeps raw inputs in its support set");
  const std::size_t num_classes = set.num_classes();
  const std::size_t h = extractor.hidden_dim();

  // Support traces and unit-norm embeddings. The batch statistics are those
  // of the test batch; the BN input does not depend on gamma/beta, so no
  // gradient flows through the statistics.
  std::vector<std::vector<BnTrace>> traces(num_classes);
  SupportEmbeddings units(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k)
    for (const auto& e : set.entries(k)) {
      traces[k].push_back(extractor.trace(e.key, stats));
      units[k].push_back(normalized(traces[k].back().output));
    }
  const Prototypes prototypes = fixed_prototypes ? *fixed_prototypes : class_centroids(units);
  const auto entry_probs = support_distributions(units, prototypes, tau);

  BnLoss out;
  out.grad_gamma.assign(h, 0.0);
  out.grad_beta.assign(h, 0.0);
  std::vector<Vec> proto_grad(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k)
    if (prototypes[k]) proto_grad[k].assign(extractor.output_dim(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Distribution target = vote(neighbors[b], entry_probs, num_classes);
    const BnTrace t = extractor.trace(batch[b], stats);
    const Distribution p = proto_distribution(t.output, prototypes, tau);
    out.loss += cross_entropy(target, p) * inv_batch;

    Vec gy(t.output.size(), 0.0);
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (!prototypes[k]) continue;
      const double gcos = (p[k] - target[k]) * inv_batch / tau;
      if (gcos == 0.0) continue;
      accumulate_cosine_grad(t.output, *prototypes[k], gcos, gy);
      if (!fixed_prototypes) accumulate_cosine_grad(*prototypes[k], t.output, gcos, proto_grad[k]);
    }
    backprop_row(extractor, t, gy, out);
  }

  if (!fixed_prototypes) {
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (!prototypes[k]) continue;
      const double inv_n = 1.0 / static_cast<double>(traces[k].size());
      for (std::size_t j = 0; j < traces[k].size(); ++j) {
        // Through n = y / |y|: dn/dy = (I - n n^T) / |y|.
        const Vec& y = traces[k][j].output;
        const Vec& n = units[k][j];
        const double norm = l2_norm(y);
        Vec gn = proto_grad[k];
        for (double& x : gn) x *= inv_n;
        const double proj = dot(n, gn);
        Vec gy(y.size());
        for (std::size_t c = 0; c < y.size(); ++c) gy[c] = (gn[c] - n[c] * proj) / norm;
        backprop_row(extractor, traces[k][j], gy, out);
      }
    }
  }
  return out;
}

TastBnEngine::TastBnEngine(ToyBnExtractor extractor, LinearHead head, const TastConfig& config)
    : extractor_(std::move(extractor)),
      head_(std::move(head)),
      config_(config),
      support_(SupportSet::empty(head_.num_classes(), SupportMode::RawInput)),
      adam_gamma_(extractor_.hidden_dim()),
      adam_beta_(extractor_.hidden_dim()) {
  config_.validate();
  extractor_.validate();
  head_.validate();
  require(head_.dim() == extractor_.output_dim(), ErrorCode::DimensionMismatch,
          "classifier input dimension != extractor output dimension");
  if (config_.global_cap > 0) support_.set_global_cap(static_cast<std::size_t>(config_.global_cap));
  if (config_.fixed_prototypes) fixed_ = classifier_prototypes(head_);
}

SupportEmbeddings TastBnEngine::embed_support(const BatchNormStats& stats) const {
  SupportEmbeddings out(support_.num_classes());
  for (std::size_t k = 0; k < support_.num_classes(); ++k)
    for (const auto& e : support_.entries(k)) out[k].push_back(normalized(extractor_.trace(e.key, stats).output));
  return out;
}

BatchPrediction TastBnEngine::adapt_batch(std::span<const Vec> raw_batch) {
  require(!raw_batch.empty(), ErrorCode::EmptyBatch, "adapt_batch on an empty batch");
  for (const auto& x : raw_batch)
    require(x.size() == extractor_.input_dim(), ErrorCode::DimensionMismatch, "raw input dimension mismatch");
  const BatchNormStats stats = extractor_.batch_stats(raw_batch);

  // (1) Support update with the current network's predictions.
  std::vector<SupportItem> items;
  items.reserve(raw_batch.size());
  for (const auto& x : raw_batch)
    items.push_back({x, head_.probs(normalized(extractor_.trace(x, stats).output))});
  support_.update(items);
  support_.filter_by_entropy(config_.per_class_cap);

  BatchPrediction out;
  if (support_.size() == 0) {
    for (const auto& item : items) {
      out.labels.push_back(static_cast<int>(argmax(item.base_probs)));
      out.probs.push_back(item.base_probs);
    }
    return out;
  }

  // (2) Retrieval in the current embedding space, frozen for the T steps.
  const SupportEmbeddings embedded = embed_support(stats);
  std::vector<NeighborList> neighbors;
  neighbors.reserve(raw_batch.size());
  for (const auto& x : raw_batch)
    neighbors.push_back(
        support_.nearest_neighbors(extractor_.trace(x, stats).output, config_.neighbors, embedded));

  // (3) T gradient steps on gamma and beta.
  const Prototypes* fixed = config_.fixed_prototypes ? &fixed_ : nullptr;
  for (int t = 0; t < config_.steps; ++t) {
    const BnLoss step = tast_bn_loss_and_gradients(extractor_, stats, raw_batch, support_, neighbors,
                                                   config_.tau, fixed);
    adam_step(extractor_.gamma, step.grad_gamma, adam_gamma_, config_.lr);
    adam_step(extractor_.beta, step.grad_beta, adam_beta_, config_.lr);
    out.mean_loss += step.loss;
  }
  if (config_.steps > 0) out.mean_loss /= static_cast<double>(config_.steps);

  // (4) Neighbor-averaged prototype prediction with the updated parameters.
  const SupportEmbeddings units = embed_support(stats);
  const Prototypes prototypes = fixed ? fixed_ : class_centroids(units);
  const auto entry_probs = support_distributions(units, prototypes, config_.tau);
  for (const auto& nn : neighbors) {
    Distribution p = average(nn, entry_probs, support_.num_classes());
    out.labels.push_back(static_cast<int>(argmax(p)));
    out.probs.push_back(std::move(p));
  }
  return out;
}

}  // namespace tast
