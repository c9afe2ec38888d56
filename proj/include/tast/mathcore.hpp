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

// Numeric kernels shared by every adaptation method. All arithmetic is done in
// double precision; single precision only appears at the file boundary.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tast {

using Vec = std::vector<double>;

/// Length-K probability vector. Entries are non-negative and sum to one.
using Distribution = std::vector<double>;

/// Dense row-major matrix. Only what the engine needs: element access,
/// row views and the two matrix-vector products.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// y = M x
Vec matvec(const Matrix& m, std::span<const double> x);
/// y = M^T x
Vec matvec_transposed(const Matrix& m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
/// Unit-norm copy; throws ZeroNormVector when the norm is below 1e-12.
Vec normalized(std::span<const double> a);

inline constexpr double kMinNorm = 1e-12;
inline constexpr double kLogClamp = 1e-12;

/// d(a, b) = 1 - cos(a, b), in [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// probs[k] proportional to exp(-dists[k] / tau), evaluated after subtracting
/// the minimum distance.
Distribution softmax_from_distances(std::span<const double> dists, double tau);

/// Ordinary softmax over logits.
Distribution softmax(std::span<const double> logits);

/// -sum p ln p with 0 ln 0 = 0.
double shannon_entropy(std::span<const double> p);

/// -sum target ln max(pred, 1e-12).
double cross_entropy(std::span<const double> target, std::span<const double> pred);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct RngSeed {
  std::uint64_t value = 0;
  bool operator==(const RngSeed&) const = default;
};

/// Deterministic random stream. Identical seeds give identical draws.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Uniform over {-1, +1}.
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// He/Kaiming normal init: N(0, 2 / fan_in) with fan_in = cols.
Matrix kaiming_normal(std::size_t rows, std::size_t cols, Rng& rng);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam step in place. An all-zero gradient leaves the
/// parameter and both moments untouched and only advances t.
void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               double lr, const AdamParams& hp = {});

}  // namespace tast
