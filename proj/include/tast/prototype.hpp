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

// Prototype-based classification primitives shared by TAST, TAST-N and
// TAST-BN: class centroids, cosine-softmax predictions, neighbor votes and
// neighbor-averaged predictions.

#include <optional>
#include <span>
#include <vector>

#include "tast/mathcore.hpp"
#include "tast/support_set.hpp"

namespace tast {

/// Indexed by class; classes without support have no prototype.
using Prototypes = std::vector<std::optional<Vec>>;

/// Mean of each class's embeddings.
Prototypes class_centroids(const SupportEmbeddings& embeddings);

/// Keys of every support entry, in SupportEmbeddings layout.
SupportEmbeddings support_keys(const SupportSet& set);

/// Softmax over -d(v, mu_k)/tau for classes that have a prototype; the
/// remaining classes get probability 0.
Distribution proto_distribution(std::span<const double> v, const Prototypes& prototypes, double tau);

/// Hard-vote pseudo label: fraction of neighbors whose prototype prediction
/// has argmax k.
Distribution pseudo_label(const NeighborList& neighbors, const SupportEmbeddings& images,
                          const Prototypes& prototypes, double tau);

/// Soft prediction: mean of the neighbors' prototype distributions.
Distribution member_predict(const NeighborList& neighbors, const SupportEmbeddings& images,
                            const Prototypes& prototypes, double tau);

/// Per-entry prototype distributions, cached so votes and averages reuse them.
std::vector<std::vector<Distribution>> support_distributions(const SupportEmbeddings& images,
                                                             const Prototypes& prototypes,
                                                             double tau);
Distribution vote(const NeighborList& neighbors,
                  const std::vector<std::vector<Distribution>>& entry_probs, std::size_t num_classes);
Distribution average(const NeighborList& neighbors,
                     const std::vector<std::vector<Distribution>>& entry_probs,
                     std::size_t num_classes);

}  // namespace tast
