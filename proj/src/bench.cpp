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

#include "tast/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <thread>

#include "tast/errors.hpp"

namespace tast {

std::string_view to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::Identity: return "identity";
    case ShiftKind::MeanShift: return "meanshift";
    case ShiftKind::Rotation: return "rotation";
    case ShiftKind::GaussianNoise: return "noise";
  }
  return "unknown";
}

std::optional<ShiftKind> parse_shift(std::string_view name) {
  for (ShiftKind k : {ShiftKind::Identity, ShiftKind::MeanShift, ShiftKind::Rotation,
                      ShiftKind::GaussianNoise})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void SyntheticSpec::validate() const {
  require(classes >= 2, ErrorCode::InvalidArgument, "need at least two classes");
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
  require(train_per_class >= 10, ErrorCode::InvalidArgument, "need at least 10 training rows per class");
  require(test_count >= classes * 10, ErrorCode::InvalidArgument, "need at least 10 test rows per class");
  require(class_std > 0.0 && mean_scale > 0.0, ErrorCode::InvalidArgument, "scales must be positive");
  require(noise_sigma >= 0.0 && shift_scale >= 0.0, ErrorCode::InvalidArgument,
          "shift magnitudes must be non-negative");
}

namespace {

Vec sample(const Matrix& means, std::size_t label, double stddev, Rng& rng) {
  Vec x(means.cols());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = means(label, j) + rng.normal(0.0, stddev);
  return x;
}

void rotate_pairs(Vec& x, double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  for (std::size_t j = 0; j + 1 < x.size(); j += 2) {
    const double u = x[j], v = x[j + 1];
    x[j] = c * u - s * v;
    x[j + 1] = s * u + c * v;
  }
}

LabeledRows draw_balanced(const Matrix& means, std::size_t per_class, double stddev, Rng& rng) {
  LabeledRows out;
  out.num_classes = means.rows();
  for (std::size_t k = 0; k < means.rows(); ++k)
    for (std::size_t n = 0; n < per_class; ++n) {
      out.rows.push_back(sample(means, k, stddev, rng));
      out.labels.push_back(static_cast<int>(k));
    }
  return out;
}

}  // namespace

SyntheticBenchmark generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticBenchmark b;
  b.class_means = Matrix(spec.classes, spec.dim);
  for (double& x : b.class_means.values()) x = rng.normal(0.0, spec.mean_scale);

  b.train = draw_balanced(b.class_means, spec.train_per_class, spec.class_std, rng);
  b.validation = draw_balanced(b.class_means, spec.validation_per_class, spec.class_std, rng);

  b.shift_vector.assign(spec.dim, 0.0);
  if (spec.shift == ShiftKind::MeanShift) {
    Vec u(spec.dim);
    for (double& x : u) x = rng.normal(0.0, 1.0);
    u = normalized(u);
    const double magnitude = spec.shift_scale * spec.class_std * std::sqrt(static_cast<double>(spec.dim));
    for (std::size_t j = 0; j < spec.dim; ++j) b.shift_vector[j] = magnitude * u[j];
  }

  b.test.num_classes = spec.classes;
  std::vector<int> labels(spec.test_count);
  for (std::size_t n = 0; n < spec.test_count; ++n) labels[n] = static_cast<int>(n % spec.classes);
  std::shuffle(labels.begin(), labels.end(), rng.engine());
  for (int y : labels) {
    Vec x = sample(b.class_means, static_cast<std::size_t>(y), spec.class_std, rng);
    switch (spec.shift) {
      case ShiftKind::Identity: break;
      case ShiftKind::MeanShift:
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += b.shift_vector[j];
        break;
      case ShiftKind::Rotation: rotate_pairs(x, spec.rotation_deg); break;
      case ShiftKind::GaussianNoise:
        for (double& v : x) v += rng.normal(0.0, spec.noise_sigma);
        break;
    }
    b.test.rows.push_back(std::move(x));
    b.test.labels.push_back(y);
  }
  return b;
}

namespace {

void check_labeled(const LabeledRows& data) {
  require(!data.rows.empty(), ErrorCode::EmptyBatch, "no training rows");
  require(data.labels.size() == data.rows.size(), ErrorCode::ShapeMismatch, "one label per row required");
  require(data.num_classes >= 2, ErrorCode::InvalidArgument, "need at least two classes");
  for (int y : data.labels)
    require(y >= 0 && static_cast<std::size_t>(y) < data.num_classes, ErrorCode::InvalidArgument,
            "label out of range");
  std::vector<bool> seen(data.num_classes, false);
  for (int y : data.labels) seen[static_cast<std::size_t>(y)] = true;
  require(std::count(seen.begin(), seen.end(), true) >= 2, ErrorCode::InvalidArgument,
          "training data covers fewer than two classes");
}

}  // namespace

LinearHead train_source_head(const LabeledRows& train, int epochs, double lr, TrainReport* report) {
  check_labeled(train);
  require(epochs >= 0 && lr >= 0.0, ErrorCode::InvalidArgument, "epochs and lr must be non-negative");
  const std::size_t K = train.num_classes;
  const std::size_t d = train.rows.front().size();
  std::vector<Vec> feats;
  feats.reserve(train.size());
  for (const auto& x : train.rows) {
    require(x.size() == d, ErrorCode::DimensionMismatch, "inconsistent row dimension");
    feats.push_back(normalized(x));
  }

  LinearHead head{Matrix(K, d), Vec(K, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(feats.size());
  double loss = 0.0, prev_loss = 0.0;
  bool converged = false;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Matrix gw(K, d);
    Vec gb(K, 0.0);
    loss = 0.0;
    for (std::size_t n = 0; n < feats.size(); ++n) {
      Distribution p = head.probs(feats[n]);
      const auto y = static_cast<std::size_t>(train.labels[n]);
      loss -= std::log(std::max(p[y], kLogClamp)) * inv_n;
      p[y] -= 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        gb[k] += p[k] * inv_n;
        auto row = gw.row(k);
        for (std::size_t j = 0; j < d; ++j) row[j] += p[k] * feats[n][j] * inv_n;
      }
    }
    for (std::size_t i = 0; i < gw.size(); ++i) head.weight.values()[i] -= lr * gw.values()[i];
    for (std::size_t k = 0; k < K; ++k) head.bias[k] -= lr * gb[k];
    if (epoch > 0 && std::abs(prev_loss - loss) < 1e-7) converged = true;
    prev_loss = loss;
  }
  if (report) {
    std::size_t correct = 0;
    for (std::size_t n = 0; n < feats.size(); ++n)
      correct += argmax(head.probs(feats[n])) == static_cast<std::size_t>(train.labels[n]);
    report->final_loss = loss;
    report->train_accuracy = static_cast<double>(correct) * inv_n;
    report->converged = converged;
  }
  return head;
}

namespace {

ToyBnExtractor zeros_like(const ToyBnExtractor& e) {
  ToyBnExtractor z;
  z.w1 = Matrix(e.w1.rows(), e.w1.cols());
  z.b1.assign(e.b1.size(), 0.0);
  z.gamma.assign(e.gamma.size(), 0.0);
  z.beta.assign(e.beta.size(), 0.0);
  z.w2 = Matrix(e.w2.rows(), e.w2.cols());
  z.b2.assign(e.b2.size(), 0.0);
  z.source_stats = e.source_stats;
  return z;
}

}  // namespace

BnTrainGradients bn_training_gradients(const ToyBnExtractor& e, const LinearHead& head,
                                       std::span<const Vec> rows, std::span<const int> labels) {
  require(rows.size() == labels.size(), ErrorCode::ShapeMismatch, "one label per row required");
  const BatchNormStats stats = e.batch_stats(rows);
  const std::size_t B = rows.size();
  const std::size_t H = e.hidden_dim();
  const double inv_b = 1.0 / static_cast<double>(B);

  BnTrainGradients g;
  g.d_extractor = zeros_like(e);
  g.d_head = LinearHead{Matrix(head.num_classes(), head.dim()), Vec(head.num_classes(), 0.0)};

  std::vector<BnTrace> traces;
  std::vector<Vec> g_norm(B, Vec(H, 0.0));  // dL/d(normalized)
  traces.reserve(B);
  for (std::size_t n = 0; n < B; ++n) {
    traces.push_back(e.trace(rows[n], stats));
    const BnTrace& t = traces.back();
    const double ynorm = l2_norm(t.output);
    require(ynorm >= kMinNorm, ErrorCode::ZeroNormVector, "zero embedding during training");
    Vec unit = t.output;
    for (double& x : unit) x /= ynorm;
    Distribution p = head.probs(unit);
    const auto y = static_cast<std::size_t>(labels[n]);
    g.loss -= std::log(std::max(p[y], kLogClamp)) * inv_b;
    p[y] -= 1.0;
    for (double& x : p) x *= inv_b;
    for (std::size_t k = 0; k < p.size(); ++k) {
      g.d_head.bias[k] += p[k];
      auto row = g.d_head.weight.row(k);
      for (std::size_t j = 0; j < unit.size(); ++j) row[j] += p[k] * unit[j];
    }
    const Vec g_unit = matvec_transposed(head.weight, p);
    const double proj = dot(unit, g_unit);
    Vec gy(unit.size());
    for (std::size_t j = 0; j < gy.size(); ++j) gy[j] = (g_unit[j] - unit[j] * proj) / ynorm;
    for (std::size_t j = 0; j < gy.size(); ++j) {
      g.d_extractor.b2[j] += gy[j];
      auto row = g.d_extractor.w2.row(j);
      for (std::size_t c = 0; c < H; ++c) row[c] += gy[j] * std::max(t.hidden[c], 0.0);
    }
    const Vec g_act = matvec_transposed(e.w2, gy);
    for (std::size_t c = 0; c < H; ++c) {
      if (t.hidden[c] <= 0.0) continue;
      g.d_extractor.gamma[c] += g_act[c] * t.normalized[c];
      g.d_extractor.beta[c] += g_act[c];
      g_norm[n][c] = g_act[c] * e.gamma[c];
    }
  }

  // BN backward through the batch mean and variance.
  Vec sum_g(H, 0.0), sum_gx(H, 0.0);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t c = 0; c < H; ++c) {
      sum_g[c] += g_norm[n][c];
      sum_gx[c] += g_norm[n][c] * traces[n].normalized[c];
    }
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t c = 0; c < H; ++c) {
      const double inv_std = 1.0 / std::sqrt(stats.var[c] + ToyBnExtractor::kEps);
      const double ga = inv_std * (g_norm[n][c] - inv_b * sum_g[c] - traces[n].normalized[c] * inv_b * sum_gx[c]);
      g.d_extractor.b1[c] += ga;
      auto row = g.d_extractor.w1.row(c);
      for (std::size_t j = 0; j < rows[n].size(); ++j) row[j] += ga * rows[n][j];
    }
  }
  return g;
}

SourceModel train_source_bn(const LabeledRows& train, const BnTrainOptions& options, TrainReport* report) {
  check_labeled(train);
  require(options.batch_size >= 2, ErrorCode::BatchTooSmall, "BN training batches need two rows");
  require(options.epochs >= 0 && options.lr >= 0.0, ErrorCode::InvalidArgument,
          "epochs and lr must be non-negative");
  const std::size_t d = train.rows.front().size();
  Rng rng(options.seed);
  ToyBnExtractor e = ToyBnExtractor::random(d, options.hidden_dim, options.output_dim, {rng.next()});
  LinearHead head{kaiming_normal(train.num_classes, options.output_dim, rng), Vec(train.num_classes, 0.0)};

  struct Slot {
    std::span<double> param;
    AdamState state;
  };
  std::vector<Slot> slots;
  auto add = [&slots](std::span<double> p) { slots.push_back({p, AdamState(p.size())}); };
  add(e.w1.values()); add(e.b1); add(e.gamma); add(e.beta); add(e.w2.values()); add(e.b2);
  add(head.weight.values()); add(head.bias);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double last_loss = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      std::vector<Vec> rows;
      std::vector<int> labels;
      for (std::size_t n = start; n < end; ++n) {
        rows.push_back(train.rows[order[n]]);
        labels.push_back(train.labels[order[n]]);
      }
      if (rows.size() < 2) break;
      BnTrainGradients g = bn_training_gradients(e, head, rows, labels);
      std::span<const double> grads[] = {g.d_extractor.w1.values(), g.d_extractor.b1, g.d_extractor.gamma,
                                         g.d_extractor.beta, g.d_extractor.w2.values(), g.d_extractor.b2,
                                         g.d_head.weight.values(), g.d_head.bias};
      for (std::size_t s = 0; s < slots.size(); ++s) adam_step(slots[s].param, grads[s], slots[s].state, options.lr);
      epoch_loss += g.loss;
      ++batches;
    }
    if (batches > 0) last_loss = epoch_loss / static_cast<double>(batches);
  }
  if (train.size() >= 2) e.source_stats = e.batch_stats(train.rows);

  SourceModel model{std::move(head), std::move(e)};
  if (report) {
    report->final_loss = last_loss;
    report->train_accuracy = source_accuracy(model, train);
    report->converged = options.epochs > 0;
  }
  return model;
}

double source_accuracy(const SourceModel& model, const LabeledRows& data) {
  if (data.rows.empty()) return 0.0;
  const auto feats = model.features(data.rows);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < feats.size(); ++n)
    correct += static_cast<int>(argmax(model.head.logits(feats[n]))) == data.labels[n];
  return static_cast<double>(correct) / static_cast<double>(feats.size());
}

RunRecord run_online(Method method, const SourceModel& model, const LabeledRows& test,
                     std::size_t batch_size, const TastConfig& config) {
  require(batch_size >= 1, ErrorCode::InvalidArgument, "batch size must be positive");
  require(!test.rows.empty(), ErrorCode::EmptyBatch, "empty test stream");
  require(test.labels.size() == test.rows.size(), ErrorCode::ShapeMismatch,
          "the scorer needs one held-out label per test row");
  auto runner = make_method(method, model, config);

  RunRecord record;
  record.method = method;
  record.config = config;
  record.batch_size = batch_size;

  const std::size_t n = test.rows.size();
  const std::size_t min_batch = runner->min_batch();
  require(n >= min_batch, ErrorCode::BatchTooSmall, "test stream shorter than the method's minimum batch");
  std::size_t correct_total = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = std::min(n, start + std::max(batch_size, min_batch));
    if (n - end < min_batch) end = n;
    const std::span<const Vec> rows(test.rows.data() + start, end - start);

    const auto t0 = std::chrono::steady_clock::now();
    const BatchPrediction pred = runner->process(rows);
    const auto t1 = std::chrono::steady_clock::now();

    BatchRecord br;
    br.index = record.batches.size();
    br.size = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) br.correct += pred.labels[i] == test.labels[start + i];
    correct_total += br.correct;
    br.batch_accuracy = static_cast<double>(br.correct) / static_cast<double>(br.size);
    br.cumulative_accuracy = static_cast<double>(correct_total) / static_cast<double>(end);
    br.mean_loss = pred.mean_loss;
    br.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    record.batches.push_back(br);
    start = end;
  }
  return record;
}

std::vector<TastConfig> expand_grid(const GridSpec& grid, const TastConfig& base) {
  std::vector<TastConfig> out;
  for (int ns : grid.neighbors)
    for (int t : grid.steps)
      for (int m : grid.per_class_caps) {
        TastConfig c = base;
        c.neighbors = ns;
        c.steps = t;
        c.per_class_cap = m;
        out.push_back(c);
      }
  return out;
}

std::size_t default_grid_threads() {
  if (const char* env = std::getenv("TAFS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

GridResult grid_search(Method method, const SourceModel& model, const LabeledRows& validation,
                       std::span<const TastConfig> grid, std::size_t batch_size, std::size_t threads) {
  require(!grid.empty(), ErrorCode::EmptyGrid, "grid search over an empty grid");
  GridResult result;
  result.accuracies.assign(grid.size(), 0.0);
  const std::size_t workers = std::min(grid.size(), threads == 0 ? default_grid_threads() : threads);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < grid.size(); i = next++)
        result.accuracies[i] = run_online(method, model, validation, batch_size, grid[i]).final_accuracy();
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (result.accuracies[i] > result.accuracies[best]) best = i;
  result.best = grid[best];
  result.best_accuracy = result.accuracies[best];
  return result;
}

}  // namespace tast
