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

// Reference computations written independently of the library internals:
// forward-only losses (differentiated numerically), brute-force geometry and
// random instance builders. Shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "tast/adapter.hpp"
#include "tast/head_tuning.hpp"
#include "tast/mathcore.hpp"
#include "tast/support_set.hpp"
#include "tast/tast_bn.hpp"

namespace oracle {

using tast::Vec;

/// |a - b| / max(|a|, |b|, floor). Components far below the floor are judged
/// on absolute error instead.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;

/// Central difference of f at x[i] with step h; x is restored.
inline double central_difference(const std::function<double()>& f, double& x, double h = kFdStep) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

inline double norm(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline double cos_dist(const Vec& a, const Vec& b) {
  double ab = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) ab += a[j] * b[j];
  return 1.0 - ab / (norm(a) * norm(b));
}

inline Vec unit(const Vec& a) {
  Vec out = a;
  const double n = norm(a);
  for (double& x : out) x /= n;
  return out;
}

inline std::size_t first_max(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

/// softmax(-d_k / tau) over the classes that have a prototype.
inline Vec proto_probs(const Vec& v, const std::vector<std::optional<Vec>>& mu, double tau) {
  Vec logits(mu.size(), -INFINITY);
  double top = -INFINITY;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!mu[k]) continue;
    logits[k] = -cos_dist(v, *mu[k]) / tau;
    top = std::max(top, logits[k]);
  }
  Vec p(mu.size(), 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k)
    if (mu[k]) z += (p[k] = std::exp(logits[k] - top));
  for (double& x : p) x /= z;
  return p;
}

inline std::vector<std::optional<Vec>> centroids(const std::vector<std::vector<Vec>>& images) {
  std::vector<std::optional<Vec>> mu(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].empty()) continue;
    Vec m(images[k][0].size(), 0.0);
    for (const auto& v : images[k])
      for (std::size_t j = 0; j < v.size(); ++j) m[j] += v[j];
    for (double& x : m) x /= static_cast<double>(images[k].size());
    mu[k] = m;
  }
  return mu;
}

// ---- TAST adapter ------------------------------------------------------------

/// Explicit parameters of one adapter member.
struct MemberParams {
  tast::Matrix w;  // d_phi x d_z
  Vec r;           // d_phi
  Vec s;           // d_z
};

inline Vec member_forward(const MemberParams& p, const Vec& z) {
  Vec out(p.w.rows(), 0.0);
  for (std::size_t a = 0; a < p.w.rows(); ++a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < p.w.cols(); ++b) acc += p.w(a, b) * p.s[b] * z[b];
    out[a] = p.r[a] * acc;
  }
  return out;
}

inline std::vector<std::vector<Vec>> member_images(const MemberParams& p, const tast::SupportSet& set) {
  std::vector<std::vector<Vec>> images(set.num_classes());
  for (std::size_t k = 0; k < set.num_classes(); ++k)
    for (const auto& e : set.entries(k)) images[k].push_back(member_forward(p, e.key));
  return images;
}

/// One-hot neighbor vote averaged over the neighbor list.
inline std::vector<Vec> vote_targets(const MemberParams& p, const tast::SupportSet& set,
                                     const std::vector<tast::NeighborList>& neighbors, double tau) {
  const auto images = member_images(p, set);
  const auto mu = centroids(images);
  std::vector<Vec> targets;
  for (const auto& nl : neighbors) {
    Vec t(set.num_classes(), 0.0);
    for (const auto& ref : nl) t[first_max(proto_probs(images[ref.label][ref.index], mu, tau))] += 1.0;
    for (double& x : t) x /= static_cast<double>(nl.size());
    targets.push_back(t);
  }
  return targets;
}

/// Mean CE(target_b, p_proto(x_b)) with the targets held fixed.
inline double tast_loss(const MemberParams& p, const tast::SupportSet& set, const std::vector<Vec>& batch,
                        const std::vector<Vec>& targets, double tau) {
  const auto mu = centroids(member_images(p, set));
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Vec q = proto_probs(member_forward(p, batch[b]), mu, tau);
    for (std::size_t k = 0; k < q.size(); ++k)
      if (targets[b][k] > 0.0) loss -= targets[b][k] * std::log(std::max(q[k], 1e-12));
  }
  return loss / static_cast<double>(batch.size());
}

// ---- TAST-BN -------------------------------------------------------------------

/// Extractor output for `rows`, normalized with the statistics of `stat_rows`.
inline std::vector<Vec> bn_embed(const tast::ToyBnExtractor& e, const std::vector<Vec>& stat_rows,
                                 const std::vector<Vec>& rows) {
  const std::size_t h = e.hidden_dim();
  auto pre = [&](const Vec& x) {
    Vec a(h);
    for (std::size_t i = 0; i < h; ++i) {
      double acc = e.b1[i];
      for (std::size_t j = 0; j < x.size(); ++j) acc += e.w1(i, j) * x[j];
      a[i] = acc;
    }
    return a;
  };
  Vec mean(h, 0.0), var(h, 0.0);
  std::vector<Vec> pa;
  for (const auto& x : stat_rows) pa.push_back(pre(x));
  for (const auto& a : pa)
    for (std::size_t i = 0; i < h; ++i) mean[i] += a[i] / static_cast<double>(pa.size());
  for (const auto& a : pa)
    for (std::size_t i = 0; i < h; ++i) var[i] += (a[i] - mean[i]) * (a[i] - mean[i]) / static_cast<double>(pa.size());
  std::vector<Vec> out;
  for (const auto& x : rows) {
    const Vec a = pre(x);
    Vec relu(h);
    for (std::size_t i = 0; i < h; ++i) {
      const double hat = (a[i] - mean[i]) / std::sqrt(var[i] + tast::ToyBnExtractor::kEps);
      relu[i] = std::max(0.0, e.gamma[i] * hat + e.beta[i]);
    }
    Vec y(e.output_dim());
    for (std::size_t o = 0; o < y.size(); ++o) {
      double acc = e.b2[o];
      for (std::size_t i = 0; i < h; ++i) acc += e.w2(o, i) * relu[i];
      y[o] = acc;
    }
    out.push_back(y);
  }
  return out;
}

struct BnInstance {
  std::vector<Vec> batch;
  std::vector<std::vector<Vec>> support;  // raw inputs per class
};

inline std::vector<std::optional<Vec>> bn_prototypes(const tast::ToyBnExtractor& e, const BnInstance& in,
                                                     std::vector<std::vector<Vec>>* unit_images = nullptr) {
  std::vector<std::vector<Vec>> images(in.support.size());
  for (std::size_t k = 0; k < in.support.size(); ++k)
    if (!in.support[k].empty())
      for (const auto& y : bn_embed(e, in.batch, in.support[k])) images[k].push_back(unit(y));
  if (unit_images) *unit_images = images;
  return centroids(images);
}

inline double tast_bn_loss(const tast::ToyBnExtractor& e, const BnInstance& in, const std::vector<Vec>& targets,
                           double tau, const std::vector<std::optional<Vec>>* fixed = nullptr) {
  const auto mu = fixed ? *fixed : bn_prototypes(e, in);
  const auto q_emb = bn_embed(e, in.batch, in.batch);
  double loss = 0.0;
  for (std::size_t b = 0; b < in.batch.size(); ++b) {
    const Vec q = proto_probs(unit(q_emb[b]), mu, tau);
    for (std::size_t k = 0; k < q.size(); ++k)
      if (targets[b][k] > 0.0) loss -= targets[b][k] * std::log(std::max(q[k], 1e-12));
  }
  return loss / static_cast<double>(in.batch.size());
}

// ---- linear head -------------------------------------------------------------

inline Vec head_probs(const tast::LinearHead& h, const Vec& f) {
  Vec logits(h.num_classes());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    double acc = h.bias[k];
    for (std::size_t j = 0; j < f.size(); ++j) acc += h.weight(k, j) * f[j];
    logits[k] = acc;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& x : logits) z += (x = std::exp(x - top));
  for (double& x : logits) x /= z;
  return logits;
}

inline double entropy_loss(const tast::LinearHead& h, const std::vector<Vec>& batch) {
  double loss = 0.0;
  for (const auto& f : batch)
    for (double p : head_probs(h, f))
      if (p > 0.0) loss -= p * std::log(p);
  return loss / static_cast<double>(batch.size());
}

/// Mean CE against frozen hard labels over the rows in `mask`.
inline double pl_loss(const tast::LinearHead& h, const std::vector<Vec>& batch,
                      const std::vector<int>& labels, const std::vector<bool>& mask) {
  double loss = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (!mask[b]) continue;
    loss -= std::log(std::max(head_probs(h, batch[b])[labels[b]], 1e-12));
    ++n;
  }
  return n == 0 ? 0.0 : loss / static_cast<double>(n);
}

// ---- instance builders ---------------------------------------------------------

inline Vec random_vec(tast::Rng& rng, std::size_t d, double scale = 1.0) {
  Vec v(d);
  for (double& x : v) x = rng.normal(0.0, scale);
  return v;
}

inline tast::LinearHead random_head(tast::Rng& rng, std::size_t k, std::size_t d, double bias_scale = 0.3) {
  tast::LinearHead h{tast::Matrix(k, d), Vec(k)};
  for (double& x : h.weight.values()) x = rng.normal(0.0, 1.0);
  for (double& x : h.bias) x = rng.normal(0.0, bias_scale);
  return h;
}

/// Random BN extractor with a nonzero output bias, so no row can embed to
/// the zero vector through an all-dead ReLU layer.
inline tast::ToyBnExtractor random_extractor(std::size_t in, std::size_t hidden, std::size_t out,
                                             std::uint64_t seed) {
  tast::ToyBnExtractor e = tast::ToyBnExtractor::random(in, hidden, out, tast::RngSeed{seed});
  tast::Rng rng(tast::RngSeed{seed ^ 0x5eedULL});
  for (double& b : e.b2) b = rng.normal(0.0, 0.5);
  return e;
}

/// A feature-mode support set seeded from `head` plus `extra` random
/// samples, then capped at `per_class` entries per class.
inline tast::SupportSet random_support(tast::Rng& rng, const tast::LinearHead& head, std::size_t extra,
                                       int per_class) {
  tast::SupportSet set = tast::SupportSet::from_classifier(head);
  std::vector<tast::SupportItem> items;
  for (std::size_t i = 0; i < extra; ++i) {
    Vec f = unit(random_vec(rng, head.dim()));
    items.push_back({f, head.probs(f)});
  }
  set.update(items);
  set.filter_by_entropy(per_class);
  return set;
}

}  // namespace oracle
