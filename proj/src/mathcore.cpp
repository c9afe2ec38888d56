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

#include "tast/mathcore.hpp"

#include <algorithm>
#include <cmath>

#include "tast/errors.hpp"

namespace tast {

Vec matvec(const Matrix& m, std::span<const double> x) {
  require(x.size() == m.cols(), ErrorCode::DimensionMismatch, "matvec: input length != cols");
  Vec y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) y[r] = dot(m.row(r), x);
  return y;
}

Vec matvec_transposed(const Matrix& m, std::span<const double> x) {
  require(x.size() == m.rows(), ErrorCode::DimensionMismatch,
          "matvec_transposed: input length != rows");
  Vec y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += xr * row[c];
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vec normalized(std::span<const double> a) {
  const double n = l2_norm(a);
  require(n >= kMinNorm, ErrorCode::ZeroNormVector, "cannot normalize a zero-norm vector");
  Vec out(a.begin(), a.end());
  for (double& x : out) x /= n;
  return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "cosine_distance: length mismatch");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  require(na >= kMinNorm && nb >= kMinNorm, ErrorCode::ZeroNormVector,
          "cosine_distance: zero-norm argument");
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return 1.0 - c;
}

Distribution softmax_from_distances(std::span<const double> dists, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "softmax temperature must be positive");
  require(!dists.empty(), ErrorCode::InvalidArgument, "softmax over empty input");
  const double lo = *std::min_element(dists.begin(), dists.end());
  Distribution p(dists.size());
  double z = 0.0;
  for (std::size_t k = 0; k < dists.size(); ++k) {
    p[k] = std::exp(-(dists[k] - lo) / tau);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

Distribution softmax(std::span<const double> logits) {
  require(!logits.empty(), ErrorCode::InvalidArgument, "softmax over empty input");
  const double hi = *std::max_element(logits.begin(), logits.end());
  Distribution p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - hi);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double cross_entropy(std::span<const double> target, std::span<const double> pred) {
  require(target.size() == pred.size(), ErrorCode::DimensionMismatch,
          "cross_entropy: length mismatch");
  double ce = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k)
    if (target[k] != 0.0) ce -= target[k] * std::log(std::max(pred[k], kLogClamp));
  return ce;
}

std::size_t argmax(std::span<const double> values) {
  require(!values.empty(), ErrorCode::InvalidArgument, "argmax of empty range");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

Matrix kaiming_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "kaiming_normal: empty shape");
  Matrix w(rows, cols);
  const double stddev = std::sqrt(2.0 / static_cast<double>(cols));
  for (double& x : w.values()) x = rng.normal(0.0, stddev);
  return w;
}

void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               double lr, const AdamParams& hp) {
  require(param.size() == grad.size() && state.m.size() == param.size() &&
              state.v.size() == param.size(),
          ErrorCode::ShapeMismatch, "adam_step: parameter, gradient and state shapes differ");
  ++state.t;
  if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) return;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(hp.beta1, t);
  const double c2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t j = 0; j < param.size(); ++j) {
    state.m[j] = hp.beta1 * state.m[j] + (1.0 - hp.beta1) * grad[j];
    state.v[j] = hp.beta2 * state.v[j] + (1.0 - hp.beta2) * grad[j] * grad[j];
    const double m_hat = state.m[j] / c1;
    const double v_hat = state.v[j] / c2;
    param[j] -= lr * m_hat / (std::sqrt(v_hat) + hp.eps);
  }
}

}  // namespace tast
