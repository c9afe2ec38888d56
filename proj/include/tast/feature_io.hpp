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

// TAFS feature container, little-endian throughout:
//
//   offset 0   char[4]  magic "TAFS"
//          4   u32      version (1)
//          8   u32      n, rows
//         12   u32      d, feature dimension
//         16   u32      K, classes
//         20   u32      flags: bit0 labels present, bit1 head present
//         24   f32      features, n x d row-major
//              i32      labels[n] (-1 = unknown)         if bit0
//              f32      W, K x d row-major; then b[K]    if bit1
//
// The total length is fully determined by the header.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tast/bench.hpp"
#include "tast/support_set.hpp"

namespace tast {

inline constexpr char kFeatureMagic[4] = {'T', 'A', 'F', 'S'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::uint32_t kFlagLabels = 1u << 0;
inline constexpr std::uint32_t kFlagHead = 1u << 1;
inline constexpr std::size_t kFeatureHeaderBytes = 24;

struct FeatureFile {
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::uint32_t num_classes = 0;
  std::vector<float> features;
  std::optional<std::vector<std::int32_t>> labels;
  std::optional<std::vector<float>> head_weight;  // K x d
  std::optional<std::vector<float>> head_bias;    // K
  /// Set on decode when every row already has unit norm (within 1e-6).
  bool unit_norm = false;

  bool operator==(const FeatureFile&) const = default;
};

std::vector<std::byte> encode_features(const FeatureFile& file);
/// Throws BadMagic, TruncatedFile or NonFiniteValue naming the byte offset.
FeatureFile decode_features(std::span<const std::byte> bytes);

FeatureFile read_features(const std::filesystem::path& path);
void write_features(const FeatureFile& file, const std::filesystem::path& path);

/// Rows as doubles, payload unchanged. `normalize` projects rows onto the
/// unit sphere.
std::vector<Vec> feature_rows(const FeatureFile& file, bool normalize = false);
/// Labelled view of the file; rows without labels are rejected.
LabeledRows to_labeled_rows(const FeatureFile& file);
std::optional<LinearHead> embedded_head(const FeatureFile& file);

FeatureFile make_feature_file(const LabeledRows& data, const LinearHead* head = nullptr);

/// Tiny hand-made fixtures: one row per line, `label,f1,...,fd`.
/// Blank lines and lines starting with '#' are skipped.
FeatureFile read_features_csv(const std::filesystem::path& path,
                              std::optional<std::uint32_t> num_classes = std::nullopt);

}  // namespace tast
