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

#include "tast/feature_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "tast/errors.hpp"

namespace tast {

namespace {

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xffu));
}

template <typename T>
T get(std::span<const std::byte> bytes, std::size_t offset) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 4);
  return value;
}

[[noreturn]] void fail_at(ErrorCode code, const std::string& message, std::uint64_t offset) {
  throw Error(code, message, offset);
}

bool rows_unit_norm(const std::vector<float>& f, std::uint32_t dim) {
  if (dim == 0) return false;
  for (std::size_t r = 0; r * dim < f.size(); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += static_cast<double>(f[r * dim + j]) * f[r * dim + j];
    if (std::abs(std::sqrt(s) - 1.0) > 1e-6) return false;
  }
  return true;
}

}  // namespace

std::vector<std::byte> encode_features(const FeatureFile& file) {
  const std::size_t n = file.rows, d = file.dim, K = file.num_classes;
  require(file.features.size() == n * d, ErrorCode::ShapeMismatch, "feature payload != rows x dim");
  require(!file.labels || file.labels->size() == n, ErrorCode::ShapeMismatch, "label count != rows");
  require(file.head_weight.has_value() == file.head_bias.has_value(), ErrorCode::ShapeMismatch,
          "head needs both weight and bias");
  require(!file.head_weight || (file.head_weight->size() == K * d && file.head_bias->size() == K),
          ErrorCode::ShapeMismatch, "head shape != K x d");
  std::uint32_t flags = 0;
  if (file.labels) flags |= kFlagLabels;
  if (file.head_weight) flags |= kFlagHead;

  std::vector<std::byte> out;
  out.reserve(kFeatureHeaderBytes + 4 * (n * d + n + K * d + K));
  for (char c : kFeatureMagic) out.push_back(static_cast<std::byte>(c));
  put(out, kFeatureVersion);
  put(out, file.rows);
  put(out, file.dim);
  put(out, file.num_classes);
  put(out, flags);
  for (float v : file.features) put(out, v);
  if (file.labels)
    for (std::int32_t y : *file.labels) put(out, y);
  if (file.head_weight) {
    for (float v : *file.head_weight) put(out, v);
    for (float v : *file.head_bias) put(out, v);
  }
  return out;
}

FeatureFile decode_features(std::span<const std::byte> bytes) {
  if (bytes.size() < kFeatureHeaderBytes)
    fail_at(ErrorCode::TruncatedFile, "file shorter than the 24-byte header", bytes.size());
  for (int i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<std::byte>(kFeatureMagic[i]))
      fail_at(ErrorCode::BadMagic, "not a TAFS feature file", static_cast<std::uint64_t>(i));
  if (get<std::uint32_t>(bytes, 4) != kFeatureVersion)
    fail_at(ErrorCode::BadMagic, "unsupported TAFS version", 4);

  FeatureFile file;
  file.rows = get<std::uint32_t>(bytes, 8);
  file.dim = get<std::uint32_t>(bytes, 12);
  file.num_classes = get<std::uint32_t>(bytes, 16);
  const auto flags = get<std::uint32_t>(bytes, 20);
  if (flags & ~(kFlagLabels | kFlagHead)) fail_at(ErrorCode::BadMagic, "unknown flag bits", 20);

  const std::uint64_t n = file.rows, d = file.dim, K = file.num_classes;
  std::uint64_t expected = kFeatureHeaderBytes + 4 * n * d;
  if (flags & kFlagLabels) expected += 4 * n;
  if (flags & kFlagHead) expected += 4 * (K * d + K);
  if (bytes.size() < expected)
    fail_at(ErrorCode::TruncatedFile, "payload shorter than the header declares", bytes.size());
  if (bytes.size() > expected) fail_at(ErrorCode::Io, "trailing bytes after payload", expected);

  std::size_t offset = kFeatureHeaderBytes;
  auto read_floats = [&](std::size_t count) {
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i, offset += 4) {
      v[i] = get<float>(bytes, offset);
      if (!std::isfinite(v[i])) fail_at(ErrorCode::NonFiniteValue, "non-finite value", offset);
    }
    return v;
  };
  file.features = read_floats(n * d);
  if (flags & kFlagLabels) {
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i, offset += 4) {
      labels[i] = get<std::int32_t>(bytes, offset);
      if (labels[i] < -1 || labels[i] >= static_cast<std::int64_t>(K))
        fail_at(ErrorCode::InvalidArgument, "label outside [-1, K)", offset);
    }
    file.labels = std::move(labels);
  }
  if (flags & kFlagHead) {
    file.head_weight = read_floats(K * d);
    file.head_bias = read_floats(K);
  }
  file.unit_norm = rows_unit_norm(file.features, file.dim);
  return file;
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_features(std::as_bytes(std::span(raw)));
}

void write_features(const FeatureFile& file, const std::filesystem::path& path) {
  const auto bytes = encode_features(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::vector<Vec> feature_rows(const FeatureFile& file, bool normalize) {
  std::vector<Vec> rows(file.rows, Vec(file.dim));
  for (std::size_t r = 0; r < file.rows; ++r)
    for (std::size_t j = 0; j < file.dim; ++j) rows[r][j] = file.features[r * file.dim + j];
  if (normalize)
    for (auto& row : rows) row = normalized(row);
  return rows;
}

LabeledRows to_labeled_rows(const FeatureFile& file) {
  require(file.labels.has_value(), ErrorCode::InvalidArgument, "feature file carries no labels");
  LabeledRows out;
  out.num_classes = file.num_classes;
  out.rows = feature_rows(file);
  out.labels.assign(file.labels->begin(), file.labels->end());
  require(std::none_of(out.labels.begin(), out.labels.end(), [](int y) { return y < 0; }),
          ErrorCode::InvalidArgument, "feature file has rows with unknown labels");
  return out;
}

std::optional<LinearHead> embedded_head(const FeatureFile& file) {
  if (!file.head_weight) return std::nullopt;
  LinearHead head{Matrix(file.num_classes, file.dim), Vec(file.num_classes)};
  for (std::size_t i = 0; i < head.weight.size(); ++i) head.weight.values()[i] = (*file.head_weight)[i];
  for (std::size_t k = 0; k < file.num_classes; ++k) head.bias[k] = (*file.head_bias)[k];
  return head;
}

FeatureFile make_feature_file(const LabeledRows& data, const LinearHead* head) {
  FeatureFile f;
  f.rows = static_cast<std::uint32_t>(data.rows.size());
  f.dim = data.rows.empty() ? 0u : static_cast<std::uint32_t>(data.rows.front().size());
  f.num_classes = static_cast<std::uint32_t>(data.num_classes);
  f.features.reserve(static_cast<std::size_t>(f.rows) * f.dim);
  for (const auto& r : data.rows) {
    require(r.size() == f.dim, ErrorCode::DimensionMismatch, "inconsistent row dimension");
    for (double v : r) f.features.push_back(static_cast<float>(v));
  }
  if (!data.labels.empty()) f.labels = std::vector<std::int32_t>(data.labels.begin(), data.labels.end());
  if (head) {
    require(head->dim() == f.dim && head->num_classes() == f.num_classes, ErrorCode::ShapeMismatch,
            "head shape does not match the data");
    std::vector<float> w, b;
    for (double v : head->weight.values()) w.push_back(static_cast<float>(v));
    for (double v : head->bias) b.push_back(static_cast<float>(v));
    f.head_weight = std::move(w);
    f.head_bias = std::move(b);
  }
  f.unit_norm = rows_unit_norm(f.features, f.dim);
  return f;
}

FeatureFile read_features_csv(const std::filesystem::path& path, std::optional<std::uint32_t> num_classes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  FeatureFile f;
  std::vector<std::int32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  std::int32_t max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad number on CSV line " + std::to_string(line_no));
      }
    }
    require(values.size() >= 2, ErrorCode::InvalidArgument, "CSV rows need a label and a feature");
    const auto dim = static_cast<std::uint32_t>(values.size() - 1);
    if (f.rows == 0) f.dim = dim;
    require(dim == f.dim, ErrorCode::DimensionMismatch, "CSV rows have different lengths");
    const auto y = static_cast<std::int32_t>(values[0]);
    labels.push_back(y);
    max_label = std::max(max_label, y);
    for (std::size_t j = 1; j < values.size(); ++j) {
      require(std::isfinite(values[j]), ErrorCode::NonFiniteValue, "non-finite CSV value");
      f.features.push_back(static_cast<float>(values[j]));
    }
    ++f.rows;
  }
  f.num_classes = num_classes.value_or(static_cast<std::uint32_t>(max_label + 1));
  for (auto y : labels)
    require(y >= -1 && y < static_cast<std::int64_t>(f.num_classes), ErrorCode::InvalidArgument,
            "CSV label outside [-1, K)");
  f.labels = std::move(labels);
  f.unit_norm = rows_unit_norm(f.features, f.dim);
  return f;
}

}  // namespace tast
