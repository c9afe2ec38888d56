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
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tast/engine.hpp"
#include "tast/support_set.hpp"
#include "tast/tast_bn.hpp"

namespace tast {

/// Source classifier: a linear head over either the identity feature map
/// (features are unit-normalized rows) or the toy BN extractor.
struct SourceModel {
  LinearHead head;
  std::optional<ToyBnExtractor> extractor;

  bool has_extractor() const noexcept { return extractor.has_value(); }
  std::size_t input_dim() const noexcept {
    return extractor ? extractor->input_dim() : head.dim();
  }
  /// Unit-norm features of the frozen source network (BN uses source statistics).
  std::vector<Vec> features(std::span<const Vec> rows) const;
};

enum class Method { None, T3A, Tast, TastN, TastBn, TentClf, PlClf };

std::optional<Method> parse_method(std::string_view name);
std::string_view to_string(Method method);
inline constexpr Method kAllMethods[] = {Method::None,   Method::T3A,     Method::Tast,
                                         Method::TastN,  Method::TastBn,  Method::TentClf,
                                         Method::PlClf};

/// An online predictor: sees each test batch once, in order, and must emit
/// its predictions for a batch before any later batch arrives.
class OnlineMethod {
 public:
  virtual ~OnlineMethod() = default;
  virtual BatchPrediction process(std::span<const Vec> rows) = 0;
  /// Smallest batch the method accepts.
  virtual std::size_t min_batch() const noexcept { return 1; }
  virtual std::size_t num_classes() const noexcept = 0;
};

/// Throws InvalidArgument for TAST-BN on a model without a BN extractor.
std::unique_ptr<OnlineMethod> make_method(Method method, const SourceModel& model,
                                          const TastConfig& config);

}  // namespace tast
