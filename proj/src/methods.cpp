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

#include "tast/methods.hpp"

#include "tast/errors.hpp"
#include "tast/head_tuning.hpp"

namespace tast {

std::vector<Vec> SourceModel::features(std::span<const Vec> rows) const {
  std::vector<Vec> out;
  out.reserve(rows.size());
  if (extractor) {
    for (auto& y : extractor->forward(rows, extractor->source_stats)) out.push_back(normalized(y));
  } else {
    for (const auto& x : rows) {
      require(x.size() == head.dim(), ErrorCode::DimensionMismatch, "feature dimension mismatch");
      out.push_back(normalized(x));
    }
  }
  return out;
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::None: return "none";
    case Method::T3A: return "t3a";
    case Method::Tast: return "tast";
    case Method::TastN: return "tast_n";
    case Method::TastBn: return "tast_bn";
    case Method::TentClf: return "tentclf";
    case Method::PlClf: return "plclf";
  }
  return "unknown";
}

namespace {

BatchPrediction from_distributions(std::vector<Distribution> probs) {
  BatchPrediction out;
  out.labels.reserve(probs.size());
  for (const auto& p : probs) out.labels.push_back(static_cast<int>(argmax(p)));
  out.probs = std::move(probs);
  return out;
}

class NoAdaptation final : public OnlineMethod {
 public:
  explicit NoAdaptation(const SourceModel& model) : model_(model) {}
  BatchPrediction process(std::span<const Vec> rows) override {
    std::vector<Distribution> probs;
    for (const auto& f : model_.features(rows)) probs.push_back(model_.head.probs(f));
    return from_distributions(std::move(probs));
  }
  std::size_t num_classes() const noexcept override { return model_.head.num_classes(); }

 private:
  SourceModel model_;
};

class T3A final : public OnlineMethod {
 public:
  T3A(const SourceModel& model, const TastConfig& config)
      : model_(model), config_(config), support_(SupportSet::from_classifier(model.head)) {}
  BatchPrediction process(std::span<const Vec> rows) override {
    const auto feats = model_.features(rows);
    update_support(support_, model_.head, feats, config_.per_class_cap);
    const Prototypes centroids = class_centroids(support_keys(support_));
    BatchPrediction out;
    for (const auto& f : feats) {
      out.labels.push_back(static_cast<int>(t3a_predict(support_, f)));
      out.probs.push_back(proto_distribution(f, centroids, config_.tau));
    }
    return out;
  }
  std::size_t num_classes() const noexcept override { return model_.head.num_classes(); }

 private:
  SourceModel model_;
  TastConfig config_;
  SupportSet support_;
};

class TastN final : public OnlineMethod {
 public:
  TastN(const SourceModel& model, const TastConfig& config)
      : model_(model), config_(config), support_(SupportSet::from_classifier(model.head)) {}
  BatchPrediction process(std::span<const Vec> rows) override {
    const auto feats = model_.features(rows);
    update_support(support_, model_.head, feats, config_.per_class_cap);
    const SupportEmbeddings keys = support_keys(support_);
    const auto entry_probs = support_distributions(keys, class_centroids(keys), config_.tau);
    std::vector<Distribution> probs;
    for (const auto& f : feats)
      probs.push_back(average(support_.nearest_neighbors(f, config_.neighbors), entry_probs,
                              support_.num_classes()));
    return from_distributions(std::move(probs));
  }
  std::size_t num_classes() const noexcept override { return model_.head.num_classes(); }

 private:
  SourceModel model_;
  TastConfig config_;
  SupportSet support_;
};

class Tast final : public OnlineMethod {
 public:
  Tast(const SourceModel& model, const TastConfig& config) : model_(model), engine_(model.head, config) {}
  BatchPrediction process(std::span<const Vec> rows) override {
    return engine_.adapt_batch(model_.features(rows));
  }
  std::size_t num_classes() const noexcept override { return model_.head.num_classes(); }

 private:
  SourceModel model_;
  TastEngine engine_;
};

class TastBn final : public OnlineMethod {
 public:
  TastBn(const SourceModel& model, const TastConfig& config)
      : engine_(*model.extractor, model.head, config) {}
  BatchPrediction process(std::span<const Vec> rows) override { return engine_.adapt_batch(rows); }
  std::size_t min_batch() const noexcept override { return 2; }
  std::size_t num_classes() const noexcept override { return engine_.head().num_classes(); }

 private:
  TastBnEngine engine_;
};

/// Predicts with the current head, then takes one step on the batch.
class HeadTuning final : public OnlineMethod {
 public:
  HeadTuning(const SourceModel& model, const TastConfig& config, bool pseudo_labels)
      : model_(model), config_(config), tuner_(model.head), pseudo_labels_(pseudo_labels) {}
  BatchPrediction process(std::span<const Vec> rows) override {
    const auto feats = model_.features(rows);
    std::vector<Distribution> probs;
    for (const auto& f : feats) probs.push_back(tuner_.head().probs(f));
    BatchPrediction out = from_distributions(std::move(probs));
    out.mean_loss = pseudo_labels_ ? tuner_.plclf_step(feats, config_.lr, config_.pl_threshold)
                                   : tuner_.tentclf_step(feats, config_.lr);
    return out;
  }
  std::size_t num_classes() const noexcept override { return model_.head.num_classes(); }

 private:
  SourceModel model_;
  TastConfig config_;
  HeadTuner tuner_;
  bool pseudo_labels_;
};

}  // namespace

std::unique_ptr<OnlineMethod> make_method(Method method, const SourceModel& model,
                                          const TastConfig& config) {
  config.validate();
  model.head.validate();
  switch (method) {
    case Method::None: return std::make_unique<NoAdaptation>(model);
    case Method::T3A: return std::make_unique<T3A>(model, config);
    case Method::Tast: return std::make_unique<Tast>(model, config);
    case Method::TastN: return std::make_unique<TastN>(model, config);
    case Method::TastBn:
      require(model.has_extractor(), ErrorCode::InvalidArgument,
              "tast_bn needs a model with a BN feature extractor");
      return std::make_unique<TastBn>(model, config);
    case Method::TentClf: return std::make_unique<HeadTuning>(model, config, false);
    case Method::PlClf: return std::make_unique<HeadTuning>(model, config, true);
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace tast
