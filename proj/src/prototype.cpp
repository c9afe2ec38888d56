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

#include "tast/prototype.hpp"

#include "tast/errors.hpp"

namespace tast {

Prototypes class_centroids(const SupportEmbeddings& embeddings) {
  Prototypes out(embeddings.size());
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    const auto& rows = embeddings[k];
    if (rows.empty()) continue;
    Vec mu(rows.front().size(), 0.0);
    for (const auto& r : rows)
      for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += r[j];
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& x : mu) x *= inv;
    out[k] = std::move(mu);
  }
  return out;
}

SupportEmbeddings support_keys(const SupportSet& set) {
  SupportEmbeddings out(set.num_classes());
  for (std::size_t k = 0; k < set.num_classes(); ++k)
    for (const auto& e : set.entries(k)) out[k].push_back(e.key);
  return out;
}

Distribution proto_distribution(std::span<const double> v, const Prototypes& prototypes, double tau) {
  std::vector<std::size_t> present;
  Vec dists;
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    if (!prototypes[k]) continue;
    present.push_back(k);
    dists.push_back(cosine_distance(v, *prototypes[k]));
  }
  require(!present.empty(), ErrorCode::NoPrototypes, "no class has a prototype");
  const Distribution sub = softmax_from_distances(dists, tau);
  Distribution p(prototypes.size(), 0.0);
  for (std::size_t j = 0; j < present.size(); ++j) p[present[j]] = sub[j];
  return p;
}

std::vector<std::vector<Distribution>> support_distributions(const SupportEmbeddings& images,
                                                             const Prototypes& prototypes,
                                                             double tau) {
  std::vector<std::vector<Distribution>> out(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    out[k].reserve(images[k].size());
    for (const auto& img : images[k]) out[k].push_back(proto_distribution(img, prototypes, tau));
  }
  return out;
}

Distribution vote(const NeighborList& neighbors,
                  const std::vector<std::vector<Distribution>>& entry_probs, std::size_t num_classes) {
  require(!neighbors.empty(), ErrorCode::EmptyNeighborList, "pseudo label from no neighbors");
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& n : neighbors)
    ++counts[argmax(entry_probs.at(static_cast<std::size_t>(n.label)).at(n.index))];
  Distribution p(num_classes, 0.0);
  const double total = static_cast<double>(neighbors.size());
  for (std::size_t k = 0; k < num_classes; ++k) p[k] = static_cast<double>(counts[k]) / total;
  return p;
}

Distribution average(const NeighborList& neighbors,
                     const std::vector<std::vector<Distribution>>& entry_probs,
                     std::size_t num_classes) {
  require(!neighbors.empty(), ErrorCode::EmptyNeighborList, "prediction from no neighbors");
  Distribution p(num_classes, 0.0);
  for (const auto& n : neighbors) {
    const auto& q = entry_probs.at(static_cast<std::size_t>(n.label)).at(n.index);
    for (std::size_t k = 0; k < num_classes; ++k) p[k] += q[k];
  }
  const double inv = 1.0 / static_cast<double>(neighbors.size());
  for (double& x : p) x *= inv;
  return p;
}

namespace {
Distribution neighbor_probs(const NeighborRef& n, const SupportEmbeddings& images,
                            const Prototypes& prototypes, double tau) {
  return proto_distribution(images.at(static_cast<std::size_t>(n.label)).at(n.index), prototypes, tau);
}
}  // namespace

Distribution pseudo_label(const NeighborList& neighbors, const SupportEmbeddings& images,
                          const Prototypes& prototypes, double tau) {
  require(!neighbors.empty(), ErrorCode::EmptyNeighborList, "pseudo label from no neighbors");
  Distribution p(prototypes.size(), 0.0);
  for (const auto& n : neighbors) p[argmax(neighbor_probs(n, images, prototypes, tau))] += 1.0;
  const double total = static_cast<double>(neighbors.size());
  for (double& x : p) x /= total;
  return p;
}

Distribution member_predict(const NeighborList& neighbors, const SupportEmbeddings& images,
                            const Prototypes& prototypes, double tau) {
  require(!neighbors.empty(), ErrorCode::EmptyNeighborList, "prediction from no neighbors");
  Distribution p(prototypes.size(), 0.0);
  for (const auto& n : neighbors) {
    const Distribution q = neighbor_probs(n, images, prototypes, tau);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += q[k];
  }
  const double inv = 1.0 / static_cast<double>(neighbors.size());
  for (double& x : p) x *= inv;
  return p;
}

}  // namespace tast
