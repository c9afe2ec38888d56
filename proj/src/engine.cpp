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

#include "tast/engine.hpp"

#include <limits>

#include "tast/errors.hpp"

namespace tast {

void TastConfig::validate() const {
  require(neighbors >= 1, ErrorCode::InvalidArgument, "N_s must be at least 1");
  require(steps >= 0, ErrorCode::InvalidArgument, "T must be non-negative");
  require(per_class_cap == -1 || per_class_cap >= 1, ErrorCode::InvalidArgument,
          "M must be -1 or at least 1");
  require(members >= 1, ErrorCode::InvalidArgument, "N_e must be at least 1");
  require(tau > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
  require(lr >= 0.0, ErrorCode::InvalidArgument, "learning rate must be non-negative");
  require(output_dim >= 0, ErrorCode::InvalidArgument, "d_phi must be non-negative");
  require(global_cap == -1 || global_cap >= 1, ErrorCode::InvalidArgument,
          "global cap must be -1 or at least 1");
  require(pl_threshold >= 0.0 && pl_threshold <= 1.0, ErrorCode::InvalidArgument,
          "PL threshold must lie in [0, 1]");
}

namespace {
const TastConfig& validated(const TastConfig& c) {
  c.validate();
  return c;
}

std::size_t resolve_output_dim(const TastConfig& c, std::size_t input_dim) {
  return c.output_dim > 0 ? static_cast<std::size_t>(c.output_dim)
                          : EnsembleAdapter::default_output_dim(input_dim);
}
}  // namespace

TastEngine::TastEngine(LinearHead head, const TastConfig& config)
    : head_(std::move(head)),
      config_(validated(config)),
      support_(SupportSet::from_classifier(head_)),
      adapter_(head_.dim(), resolve_output_dim(config_, head_.dim()),
               static_cast<std::size_t>(config_.members), config_.seed) {}

void update_support(SupportSet& set, const LinearHead& head, std::span<const Vec> features,
                    int per_class_cap) {
  std::vector<SupportItem> items;
  items.reserve(features.size());
  for (const auto& f : features) items.push_back({f, head.probs(f)});
  set.update(items);
  set.filter_by_entropy(per_class_cap);
}

BatchPrediction TastEngine::adapt_batch(std::span<const Vec> features) {
  require(!features.empty(), ErrorCode::EmptyBatch, "adapt_batch on an empty batch");
  std::vector<Vec> batch;
  batch.reserve(features.size());
  for (const auto& f : features) {
    require(f.size() == head_.dim(), ErrorCode::DimensionMismatch, "feature dimension mismatch");
    batch.push_back(normalized(f));
  }

  update_support(support_, head_, batch, config_.per_class_cap);

  std::vector<NeighborList> neighbors;
  neighbors.reserve(batch.size());
  for (const auto& z : batch) neighbors.push_back(support_.nearest_neighbors(z, config_.neighbors));

  BatchPrediction out;
  std::size_t loss_terms = 0;
  for (int t = 0; t < config_.steps; ++t) {
    for (std::size_t i = 0; i < adapter_.members(); ++i) {
      AdapterLoss step = loss_and_gradients(adapter_, i, batch, neighbors, support_, config_.tau);
      adapter_.apply_update(i, step.grads, config_.lr);
      out.mean_loss += step.loss;
      ++loss_terms;
    }
  }
  if (loss_terms > 0) out.mean_loss /= static_cast<double>(loss_terms);

  out.probs = predict(neighbors);
  out.labels.reserve(out.probs.size());
  for (const auto& p : out.probs) out.labels.push_back(static_cast<int>(argmax(p)));
  ++batches_;
  return out;
}

std::vector<Distribution> TastEngine::predict(std::span<const NeighborList> neighbors) const {
  const std::size_t num_classes = head_.num_classes();
  std::vector<Distribution> probs(neighbors.size(), Distribution(num_classes, 0.0));
  for (std::size_t i = 0; i < adapter_.members(); ++i) {
    const SupportEmbeddings images = adapter_.embed_support(i, support_);
    const auto entry_probs = support_distributions(images, class_centroids(images), config_.tau);
    for (std::size_t b = 0; b < neighbors.size(); ++b) {
      const Distribution p = average(neighbors[b], entry_probs, num_classes);
      for (std::size_t k = 0; k < num_classes; ++k) probs[b][k] += p[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(adapter_.members());
  for (auto& p : probs)
    for (double& x : p) x *= inv;
  return probs;
}

std::size_t t3a_predict(const SupportSet& set, std::span<const double> query) {
  const Prototypes centroids = class_centroids(support_keys(set));
  std::size_t best = centroids.size();
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    if (!centroids[k]) continue;
    const double d = cosine_distance(query, *centroids[k]);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  require(best < centroids.size(), ErrorCode::EmptySupportSet, "T3A prediction with no support");
  return best;
}

std::pair<std::size_t, Distribution> tast_n_predict(const SupportSet& set,
                                                    std::span<const double> query, int neighbors,
                                                    double tau) {
  const NeighborList nn = set.nearest_neighbors(query, neighbors);
  const SupportEmbeddings keys = support_keys(set);
  Distribution p = member_predict(nn, keys, class_centroids(keys), tau);
  const std::size_t label = argmax(p);
  return {label, std::move(p)};
}

}  // namespace tast
