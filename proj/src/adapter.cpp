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

#include "tast/adapter.hpp"

#include <algorithm>

#include "tast/errors.hpp"

namespace tast {

EnsembleAdapter::EnsembleAdapter(std::size_t input_dim, std::size_t output_dim,
                                 std::size_t members, RngSeed seed) {
  require(input_dim >= 1 && output_dim >= 1, ErrorCode::InvalidArgument,
          "adapter dimensions must be positive");
  require(members >= 1, ErrorCode::InvalidArgument, "adapter needs at least one member");
  Rng rng(seed);
  shared_ = kaiming_normal(output_dim, input_dim, rng);
  fast_r_.assign(members, Vec(output_dim));
  fast_s_.assign(members, Vec(input_dim));
  for (std::size_t i = 0; i < members; ++i) {
    for (double& x : fast_r_[i]) x = rng.sign();
    for (double& x : fast_s_[i]) x = rng.sign();
  }
  adam_shared_ = AdamState(shared_.size());
  adam_r_.assign(members, AdamState(output_dim));
  adam_s_.assign(members, AdamState(input_dim));
}

std::size_t EnsembleAdapter::default_output_dim(std::size_t input_dim) noexcept {
  return std::max<std::size_t>(1, input_dim / 4);
}

void EnsembleAdapter::check_member(std::size_t member) const {
  require(member < members(), ErrorCode::IndexOutOfRange, "adapter member index out of range");
}

Vec EnsembleAdapter::forward(std::size_t member, std::span<const double> z) const {
  check_member(member);
  require(z.size() == input_dim(), ErrorCode::DimensionMismatch, "adapter input dimension mismatch");
  const Vec& s = fast_s_[member];
  const Vec& r = fast_r_[member];
  Vec u(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) u[j] = s[j] * z[j];
  Vec y = matvec(shared_, u);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] *= r[j];
  return y;
}

Matrix EnsembleAdapter::member_weight(std::size_t member) const {
  check_member(member);
  Matrix w = shared_;
  for (std::size_t a = 0; a < w.rows(); ++a)
    for (std::size_t b = 0; b < w.cols(); ++b) w(a, b) *= fast_r_[member][a] * fast_s_[member][b];
  return w;
}

SupportEmbeddings EnsembleAdapter::embed_support(std::size_t member, const SupportSet& set) const {
  require(set.mode() == SupportMode::Feature, ErrorCode::InvalidArgument,
          "adapter prototypes need a feature-mode support set");
  SupportEmbeddings out(set.num_classes());
  for (std::size_t k = 0; k < set.num_classes(); ++k) {
    out[k].reserve(set.entries(k).size());
    for (const auto& e : set.entries(k)) out[k].push_back(forward(member, e.key));
  }
  return out;
}

Prototypes EnsembleAdapter::compute_prototypes(std::size_t member, const SupportSet& set) const {
  return class_centroids(embed_support(member, set));
}

void EnsembleAdapter::apply_update(std::size_t member, const AdapterGradients& grads, double lr) {
  check_member(member);
  require(grads.shared.rows() == shared_.rows() && grads.shared.cols() == shared_.cols() &&
              grads.fast_r.size() == output_dim() && grads.fast_s.size() == input_dim(),
          ErrorCode::ShapeMismatch, "gradient shapes do not match the adapter");
  adam_step(shared_.values(), grads.shared.values(), adam_shared_, lr);
  adam_step(fast_r_[member], grads.fast_r, adam_r_[member], lr);
  adam_step(fast_s_[member], grads.fast_s, adam_s_[member], lr);
}

void EnsembleAdapter::reset_fast_factors_to_one() {
  for (auto& r : fast_r_) std::fill(r.begin(), r.end(), 1.0);
  for (auto& s : fast_s_) std::fill(s.begin(), s.end(), 1.0);
}

bool EnsembleAdapter::same_parameters(const EnsembleAdapter& other) const {
  return shared_ == other.shared_ && fast_r_ == other.fast_r_ && fast_s_ == other.fast_s_;
}

void accumulate_cosine_grad(std::span<const double> a, std::span<const double> b, double scale,
                            std::span<double> out) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  require(na >= kMinNorm && nb >= kMinNorm, ErrorCode::ZeroNormVector, "cosine of zero-norm vector");
  const double c = dot(a, b) / (na * nb);
  const double inv_ab = 1.0 / (na * nb);
  const double inv_aa = 1.0 / (na * na);
  for (std::size_t j = 0; j < a.size(); ++j) out[j] += scale * (b[j] * inv_ab - c * a[j] * inv_aa);
}

namespace {

/// Backward through v = r o (W (s o z)) given dL/dv.
void backprop_member(const Matrix& w, const Vec& r, const Vec& s, std::span<const double> z,
                     std::span<const double> grad_out, AdapterGradients& g) {
  Vec u(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) u[j] = s[j] * z[j];
  const Vec y = matvec(w, u);
  Vec gy(y.size());
  for (std::size_t a = 0; a < y.size(); ++a) {
    g.fast_r[a] += grad_out[a] * y[a];
    gy[a] = grad_out[a] * r[a];
  }
  for (std::size_t a = 0; a < w.rows(); ++a) {
    if (gy[a] == 0.0) continue;
    auto grow = g.shared.row(a);
    for (std::size_t b = 0; b < w.cols(); ++b) grow[b] += gy[a] * u[b];
  }
  const Vec gu = matvec_transposed(w, gy);
  for (std::size_t b = 0; b < z.size(); ++b) g.fast_s[b] += gu[b] * z[b];
}

}  // namespace

AdapterLoss loss_and_gradients(const EnsembleAdapter& adapter, std::size_t member,
                               std::span<const Vec> batch, std::span<const NeighborList> neighbors,
                               const SupportSet& set, double tau) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "loss over an empty batch");
  require(neighbors.size() == batch.size(), ErrorCode::ShapeMismatch,
          "one neighbor list per batch row is required");
  const std::size_t num_classes = set.num_classes();
  const SupportEmbeddings images = adapter.embed_support(member, set);
  const Prototypes prototypes = class_centroids(images);
  const auto entry_probs = support_distributions(images, prototypes, tau);

  AdapterLoss out;
  out.grads.shared = Matrix(adapter.output_dim(), adapter.input_dim());
  out.grads.fast_r.assign(adapter.output_dim(), 0.0);
  out.grads.fast_s.assign(adapter.input_dim(), 0.0);

  std::vector<Vec> proto_grad(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k)
    if (prototypes[k]) proto_grad[k].assign(adapter.output_dim(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Distribution target = vote(neighbors[b], entry_probs, num_classes);
    const Vec v = adapter.forward(member, batch[b]);
    const Distribution p = proto_distribution(v, prototypes, tau);
    out.loss += cross_entropy(target, p) * inv_batch;

    // logit_k = (cos(v, mu_k) - 1) / tau; dCE/dlogit_k = p_k - target_k.
    Vec gv(v.size(), 0.0);
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (!prototypes[k]) continue;
      const double gcos = (p[k] - target[k]) * inv_batch / tau;
      if (gcos == 0.0) continue;
      accumulate_cosine_grad(v, *prototypes[k], gcos, gv);
      accumulate_cosine_grad(*prototypes[k], v, gcos, proto_grad[k]);
    }
    backprop_member(adapter.shared_weight(), adapter.fast_r(member), adapter.fast_s(member),
                    batch[b], gv, out.grads);
  }

  // mu_k is the mean of the member images of class k.
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (!prototypes[k]) continue;
    const auto& entries = set.entries(k);
    Vec g = proto_grad[k];
    const double inv_n = 1.0 / static_cast<double>(entries.size());
    for (double& x : g) x *= inv_n;
    for (const auto& e : entries)
      backprop_member(adapter.shared_weight(), adapter.fast_r(member), adapter.fast_s(member), e.key,
                      g, out.grads);
  }
  return out;
}

}  // namespace tast
