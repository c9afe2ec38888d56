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
#include <span>
#include <vector>

#include "tast/mathcore.hpp"
#include "tast/prototype.hpp"
#include "tast/support_set.hpp"

namespace tast {

struct AdapterGradients {
  Matrix shared;  // d_phi x d_z
  Vec fast_r;     // d_phi
  Vec fast_s;     // d_z
};

/// N_e adaptation modules as one BatchEnsemble linear layer.
///
/// Member i computes h_i(z) = (W o r_i s_i^T) z = r_i o (W (s_i o z)): the
/// shared weight W is Kaiming-initialized, the rank-one fast factors start at
/// random signs. No bias, no nonlinearity.
class EnsembleAdapter {
 public:
  EnsembleAdapter(std::size_t input_dim, std::size_t output_dim, std::size_t members, RngSeed seed);

  /// A quarter of the input dimension, at least 1.
  static std::size_t default_output_dim(std::size_t input_dim) noexcept;

  std::size_t input_dim() const noexcept { return shared_.cols(); }
  std::size_t output_dim() const noexcept { return shared_.rows(); }
  std::size_t members() const noexcept { return fast_r_.size(); }

  Vec forward(std::size_t member, std::span<const double> z) const;
  /// W o r_i s_i^T as an explicit matrix.
  Matrix member_weight(std::size_t member) const;

  /// h_i applied to every support key, in SupportEmbeddings layout.
  SupportEmbeddings embed_support(std::size_t member, const SupportSet& set) const;
  Prototypes compute_prototypes(std::size_t member, const SupportSet& set) const;

  /// Adam on W (one state shared by all members) and on r_i, s_i.
  void apply_update(std::size_t member, const AdapterGradients& grads, double lr);

  /// Sets every fast factor to +1, making all members identical.
  void reset_fast_factors_to_one();

  Matrix& shared_weight() noexcept { return shared_; }
  const Matrix& shared_weight() const noexcept { return shared_; }
  Vec& fast_r(std::size_t member) { return fast_r_.at(member); }
  const Vec& fast_r(std::size_t member) const { return fast_r_.at(member); }
  Vec& fast_s(std::size_t member) { return fast_s_.at(member); }
  const Vec& fast_s(std::size_t member) const { return fast_s_.at(member); }
  const AdamState& shared_adam() const noexcept { return adam_shared_; }

  bool same_parameters(const EnsembleAdapter& other) const;

 private:
  void check_member(std::size_t member) const;

  Matrix shared_;
  std::vector<Vec> fast_r_;
  std::vector<Vec> fast_s_;
  AdamState adam_shared_;
  std::vector<AdamState> adam_r_;
  std::vector<AdamState> adam_s_;
};

struct AdapterLoss {
  double loss = 0.0;
  AdapterGradients grads;
};

/// Mean cross-entropy between each query's neighbor-vote pseudo label
/// (held constant) and its prototype distribution under member i, with exact
/// gradients w.r.t. W, r_i and s_i. Gradients reach the parameters through the
/// query embedding and through every support image behind the prototypes.
///
/// `neighbors[b]` is the retrieval result for `batch[b]` in feature space.
AdapterLoss loss_and_gradients(const EnsembleAdapter& adapter, std::size_t member,
                               std::span<const Vec> batch, std::span<const NeighborList> neighbors,
                               const SupportSet& set, double tau);

/// Gradient of d(cos(a, b))/da scaled by `scale`, accumulated into `out`.
void accumulate_cosine_grad(std::span<const double> a, std::span<const double> b, double scale,
                            std::span<double> out);

}  // namespace tast
