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
#include <string>
#include <vector>

#include "tast/engine.hpp"
#include "tast/mathcore.hpp"
#include "tast/methods.hpp"
#include "tast/support_set.hpp"
#include "tast/tast_bn.hpp"

namespace tast {

enum class ShiftKind { Identity, MeanShift, Rotation, GaussianNoise };

std::string_view to_string(ShiftKind kind);
std::optional<ShiftKind> parse_shift(std::string_view name);

/// Gaussian-blob domain-shift benchmark.
///
/// Class means are i.i.d. N(0, mean_scale^2 I); samples add N(0, class_std^2 I).
/// The test domain applies one shift to source samples:
///  - MeanShift: adds shift_scale * class_std * sqrt(dim) * u for a random unit u
///  - Rotation: rotates each coordinate pair (2j, 2j+1) by rotation_deg
///  - GaussianNoise: adds N(0, noise_sigma^2 I)
struct SyntheticSpec {
  std::size_t classes = 5;
  std::size_t dim = 16;
  std::size_t train_per_class = 200;
  std::size_t validation_per_class = 50;
  std::size_t test_count = 2000;
  double mean_scale = 0.7;
  double class_std = 1.0;
  ShiftKind shift = ShiftKind::MeanShift;
  double shift_scale = 1.5;
  double rotation_deg = 0.0;
  double noise_sigma = 0.0;
  RngSeed seed{0};

  void validate() const;
};

struct LabeledRows {
  std::vector<Vec> rows;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return rows.size(); }
};

struct SyntheticBenchmark {
  LabeledRows train;
  LabeledRows validation;  // source distribution, held out
  LabeledRows test;        // shifted, shuffled stream
  Matrix class_means;
  Vec shift_vector;        // MeanShift only
};

SyntheticBenchmark generate(const SyntheticSpec& spec);

struct TrainReport {
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  bool converged = false;
};

/// Multinomial logistic regression on unit-normalized rows by full-batch
/// gradient descent from a zero head.
LinearHead train_source_head(const LabeledRows& train, int epochs, double lr,
                             TrainReport* report = nullptr);

struct BnTrainOptions {
  std::size_t hidden_dim = 32;
  std::size_t output_dim = 16;
  int epochs = 40;
  double lr = 0.01;
  std::size_t batch_size = 64;
  RngSeed seed{0};
};

/// Gradients of the mean source cross-entropy of the BN network + head on one
/// minibatch (BN in training mode, full backward through batch statistics).
struct BnTrainGradients {
  double loss = 0.0;
  ToyBnExtractor d_extractor;  // gradient per parameter, same shapes
  LinearHead d_head;
};
BnTrainGradients bn_training_gradients(const ToyBnExtractor& extractor, const LinearHead& head,
                                       std::span<const Vec> rows, std::span<const int> labels);

/// Joint Adam training of the toy BN network and head; afterwards the
/// extractor's source statistics are set from the whole training set.
SourceModel train_source_bn(const LabeledRows& train, const BnTrainOptions& options,
                            TrainReport* report = nullptr);

/// Accuracy of the unadapted model (BN models use source statistics).
double source_accuracy(const SourceModel& model, const LabeledRows& data);

struct BatchRecord {
  std::size_t index = 0;
  std::size_t size = 0;
  std::size_t correct = 0;
  double batch_accuracy = 0.0;
  double cumulative_accuracy = 0.0;
  double mean_loss = 0.0;
  double wall_ms = 0.0;
};

struct RunRecord {
  Method method = Method::None;
  TastConfig config;
  std::size_t batch_size = 0;
  std::vector<BatchRecord> batches;

  double final_accuracy() const noexcept {
    return batches.empty() ? 0.0 : batches.back().cumulative_accuracy;
  }
};

/// Streams `test` once, in order. The method only ever sees rows; labels are
/// consulted after each batch's predictions are returned. Methods that need
/// two rows per batch get a trailing single row folded into the previous
/// batch.
RunRecord run_online(Method method, const SourceModel& model, const LabeledRows& test,
                     std::size_t batch_size, const TastConfig& config);

struct GridSpec {
  std::vector<int> neighbors{1, 2, 4, 8};
  std::vector<int> steps{1, 3};
  std::vector<int> per_class_caps{1, 5, 20, 50, 100, -1};
};

/// Configurations in lexicographic (N_s, T, M) order, other fields from `base`.
std::vector<TastConfig> expand_grid(const GridSpec& grid, const TastConfig& base);

struct GridResult {
  TastConfig best;
  double best_accuracy = 0.0;
  std::vector<double> accuracies;  // one per grid entry, grid order
};

/// Exhaustive evaluation on a labelled source-domain validation stream; the
/// first configuration with the highest accuracy wins. `threads` = 0 uses
/// default_grid_threads().
GridResult grid_search(Method method, const SourceModel& model, const LabeledRows& validation,
                       std::span<const TastConfig> grid, std::size_t batch_size,
                       std::size_t threads = 0);

/// TAFS_THREADS if set and positive, else the hardware concurrency.
std::size_t default_grid_threads();

}  // namespace tast
