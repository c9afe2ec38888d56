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

#include "tast/support_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tast/errors.hpp"

namespace tast {

Vec LinearHead::logits(std::span<const double> z) const {
  Vec out = matvec(weight, z);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bias[k];
  return out;
}

Distribution LinearHead::probs(std::span<const double> z) const { return softmax(logits(z)); }

void LinearHead::validate() const {
  require(num_classes() >= 2, ErrorCode::InvalidArgument, "classifier needs at least two classes");
  require(bias.size() == num_classes(), ErrorCode::ShapeMismatch, "bias length != class count");
  for (std::size_t k = 0; k < num_classes(); ++k)
    require(l2_norm(weight.row(k)) >= kMinNorm, ErrorCode::ZeroNormVector,
            "classifier weight row has zero norm");
}

SupportSet SupportSet::from_classifier(const LinearHead& head) {
  head.validate();
  SupportSet set(head.num_classes(), SupportMode::Feature);
  set.dim_ = head.dim();
  for (std::size_t k = 0; k < head.num_classes(); ++k) {
    SupportEntry e;
    e.key = normalized(head.weight.row(k));
    e.label = static_cast<int>(k);
    e.entropy = shannon_entropy(head.probs(e.key));
    e.seq = set.next_seq_++;
    set.classes_[k].push_back(std::move(e));
  }
  return set;
}

SupportSet SupportSet::empty(std::size_t num_classes, SupportMode mode) {
  require(num_classes >= 2, ErrorCode::InvalidArgument, "support set needs at least two classes");
  return SupportSet(num_classes, mode);
}

std::size_t SupportSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : classes_) n += c.size();
  return n;
}

void SupportSet::set_global_cap(std::optional<std::size_t> cap) {
  require(!cap || *cap >= 1, ErrorCode::InvalidArgument, "global cap must be at least 1");
  global_cap_ = cap;
  enforce_global_cap();
}

void SupportSet::update(std::span<const SupportItem> items) {
  for (const auto& item : items) {
    require(item.base_probs.size() == num_classes(), ErrorCode::DimensionMismatch,
            "base distribution length != class count");
    if (dim_ == 0) dim_ = item.key.size();
    require(item.key.size() == dim_, ErrorCode::DimensionMismatch, "support key dimension mismatch");
  }
  for (const auto& item : items) {
    SupportEntry e;
    e.key = mode_ == SupportMode::Feature ? normalized(item.key) : item.key;
    e.label = static_cast<int>(argmax(item.base_probs));
    e.entropy = shannon_entropy(item.base_probs);
    e.seq = next_seq_++;
    classes_[static_cast<std::size_t>(e.label)].push_back(std::move(e));
  }
  enforce_global_cap();
}

void SupportSet::enforce_global_cap() {
  if (!global_cap_) return;
  while (size() > *global_cap_) {
    // Highest entropy goes first; among equals the oldest.
    std::size_t worst_class = 0, worst_index = 0;
    const SupportEntry* worst = nullptr;
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      for (std::size_t j = 0; j < classes_[k].size(); ++j) {
        const SupportEntry& e = classes_[k][j];
        if (!worst || e.entropy > worst->entropy ||
            (e.entropy == worst->entropy && e.seq < worst->seq)) {
          worst = &e;
          worst_class = k;
          worst_index = j;
        }
      }
    }
    classes_[worst_class].erase(classes_[worst_class].begin() +
                                static_cast<std::ptrdiff_t>(worst_index));
  }
}

void SupportSet::filter_by_entropy(int per_class_cap) {
  require(per_class_cap == -1 || per_class_cap >= 1, ErrorCode::InvalidArgument,
          "per-class cap must be -1 or at least 1");
  if (per_class_cap == -1) return;
  const auto cap = static_cast<std::size_t>(per_class_cap);
  for (auto& entries : classes_) {
    if (entries.size() <= cap) continue;
    std::stable_sort(entries.begin(), entries.end(), [](const SupportEntry& a, const SupportEntry& b) {
      return a.entropy < b.entropy || (a.entropy == b.entropy && a.seq < b.seq);
    });
    entries.resize(cap);
    std::sort(entries.begin(), entries.end(),
              [](const SupportEntry& a, const SupportEntry& b) { return a.seq < b.seq; });
  }
}

namespace {
bool closer(const NeighborRef& a, const NeighborRef& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.seq < b.seq);
}
}  // namespace

NeighborList SupportSet::select(std::span<const double> query, int count,
                                const KeyView& key) const {
  require(count >= 1, ErrorCode::InvalidArgument, "neighbor count must be at least 1");
  require(size() > 0, ErrorCode::EmptySupportSet, "nearest neighbors on an empty support set");
  require(l2_norm(query) >= kMinNorm, ErrorCode::ZeroNormVector, "zero-norm query");
  NeighborList pool;
  pool.reserve(size());
  for (std::size_t k = 0; k < classes_.size(); ++k)
    for (std::size_t j = 0; j < classes_[k].size(); ++j)
      pool.push_back({static_cast<int>(k), j, classes_[k][j].seq, cosine_distance(query, key(k, j))});
  const auto keep = std::min(pool.size(), static_cast<std::size_t>(count));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), closer);
  pool.resize(keep);
  return pool;
}

NeighborList SupportSet::nearest_neighbors(std::span<const double> query, int count) const {
  require(mode_ == SupportMode::Feature, ErrorCode::InvalidArgument,
          "raw-input support sets need embeddings for retrieval");
  return select(query, count,
                [this](std::size_t k, std::size_t j) -> std::span<const double> { return classes_[k][j].key; });
}

NeighborList SupportSet::nearest_neighbors(std::span<const double> query, int count,
                                           const SupportEmbeddings& embeddings) const {
  require(embeddings.size() == classes_.size(), ErrorCode::ShapeMismatch,
          "embedding layout does not match the support set");
  for (std::size_t k = 0; k < classes_.size(); ++k)
    require(embeddings[k].size() == classes_[k].size(), ErrorCode::ShapeMismatch,
            "embedding layout does not match the support set");
  return select(query, count,
                [&embeddings](std::size_t k, std::size_t j) -> std::span<const double> { return embeddings[k][j]; });
}

namespace {

NeighborList brute_force(const SupportSet& set, std::span<const double> query, int count,
                         const std::function<const Vec&(std::size_t, std::size_t)>& key) {
  require(count >= 1, ErrorCode::InvalidArgument, "neighbor count must be at least 1");
  require(set.size() > 0, ErrorCode::EmptySupportSet, "nearest neighbors on an empty support set");
  require(l2_norm(query) >= kMinNorm, ErrorCode::ZeroNormVector, "zero-norm query");
  std::vector<NeighborRef> all;
  for (std::size_t k = 0; k < set.num_classes(); ++k)
    for (std::size_t j = 0; j < set.entries(k).size(); ++j)
      all.push_back({static_cast<int>(k), j, set.entries(k)[j].seq, cosine_distance(query, key(k, j))});
  std::vector<bool> taken(all.size(), false);
  NeighborList out;
  while (out.size() < all.size() && out.size() < static_cast<std::size_t>(count)) {
    std::size_t best = all.size();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (taken[i]) continue;
      if (best == all.size() || all[i].distance < all[best].distance ||
          (all[i].distance == all[best].distance && all[i].seq < all[best].seq))
        best = i;
    }
    taken[best] = true;
    out.push_back(all[best]);
  }
  return out;
}

}  // namespace

NeighborList brute_force_neighbors(const SupportSet& set, std::span<const double> query, int count) {
  return brute_force(set, query, count,
                     [&set](std::size_t k, std::size_t j) -> const Vec& { return set.entries(k)[j].key; });
}

NeighborList brute_force_neighbors(const SupportSet& set, std::span<const double> query, int count,
                                   const SupportEmbeddings& embeddings) {
  return brute_force(set, query, count,
                     [&embeddings](std::size_t k, std::size_t j) -> const Vec& { return embeddings.at(k).at(j); });
}

}  // namespace tast
