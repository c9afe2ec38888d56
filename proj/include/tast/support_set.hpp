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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tast/mathcore.hpp"

namespace tast {

/// Source-trained linear classifier g_w(z) = W z + b, one weight row per class.
struct LinearHead {
  Matrix weight;  // K x d
  Vec bias;       // K

  std::size_t num_classes() const noexcept { return weight.rows(); }
  std::size_t dim() const noexcept { return weight.cols(); }

  Vec logits(std::span<const double> z) const;
  Distribution probs(std::span<const double> z) const;
  /// Throws unless K >= 2, the bias has K entries and every row has positive norm.
  void validate() const;
};

enum class SupportMode { Feature, RawInput };

struct SupportEntry {
  Vec key;         // unit-norm feature, or the raw input in RawInput mode
  int label = 0;   // pseudo class
  double entropy = 0.0;
  std::uint64_t seq = 0;
};

struct NeighborRef {
  int label = 0;
  std::size_t index = 0;  // position within the class list at retrieval time
  std::uint64_t seq = 0;
  double distance = 0.0;

  bool operator==(const NeighborRef&) const = default;
};

/// Sorted by (distance, seq); the last distance is the retrieval radius.
using NeighborList = std::vector<NeighborRef>;

/// Embeddings of every support entry, laid out like SupportSet::classes().
using SupportEmbeddings = std::vector<std::vector<Vec>>;

struct SupportItem {
  Vec key;
  Distribution base_probs;
};

/// Per-class cache of pseudo-labelled test samples.
///
/// Entries are appended to the class the base classifier predicts, keep the
/// entropy of that prediction, and are pruned by entropy. Retrieval pools all
/// classes and orders by cosine distance with ties going to the older entry.
class SupportSet {
 public:
  /// One entry per class, key = w_k / |w_k|.
  static SupportSet from_classifier(const LinearHead& head);
  static SupportSet empty(std::size_t num_classes, SupportMode mode);

  SupportMode mode() const noexcept { return mode_; }
  std::size_t num_classes() const noexcept { return classes_.size(); }
  /// Key dimension; 0 until the first entry arrives.
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept;
  const std::vector<SupportEntry>& entries(std::size_t label) const { return classes_.at(label); }
  const std::vector<std::vector<SupportEntry>>& classes() const noexcept { return classes_; }

  std::optional<std::size_t> global_cap() const noexcept { return global_cap_; }
  void set_global_cap(std::optional<std::size_t> cap);

  /// Appends each item to argmax(base_probs). Feature-mode keys are
  /// normalized on insertion. Evicts the highest-entropy entries while the
  /// global cap is exceeded.
  void update(std::span<const SupportItem> items);

  /// Keeps the `per_class_cap` lowest-entropy entries of every class;
  /// -1 keeps everything.
  void filter_by_entropy(int per_class_cap);

  /// N_s nearest entries to `query` under cosine distance. Feature mode only.
  NeighborList nearest_neighbors(std::span<const double> query, int count) const;
  /// Same, comparing against caller-supplied embeddings of the entries.
  NeighborList nearest_neighbors(std::span<const double> query, int count,
                                 const SupportEmbeddings& embeddings) const;

  const SupportEntry& at(const NeighborRef& ref) const {
    return classes_.at(ref.label).at(ref.index);
  }

 private:
  SupportSet(std::size_t num_classes, SupportMode mode)
      : mode_(mode), classes_(num_classes) {}

  void enforce_global_cap();
  using KeyView = std::function<std::span<const double>(std::size_t, std::size_t)>;
  NeighborList select(std::span<const double> query, int count, const KeyView& key) const;

  SupportMode mode_;
  std::size_t dim_ = 0;
  std::uint64_t next_seq_ = 0;
  std::optional<std::size_t> global_cap_;
  std::vector<std::vector<SupportEntry>> classes_;
};

/// Exhaustive reference retrieval: repeated minimum extraction over every
/// entry. Must agree exactly with SupportSet::nearest_neighbors.
NeighborList brute_force_neighbors(const SupportSet& set, std::span<const double> query,
                                   int count);
NeighborList brute_force_neighbors(const SupportSet& set, std::span<const double> query,
                                   int count, const SupportEmbeddings& embeddings);

}  // namespace tast
