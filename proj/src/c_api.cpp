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

#include "tast/tast.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tast/bench.hpp"
#include "tast/errors.hpp"
#include "tast/feature_io.hpp"
#include "tast/methods.hpp"
#include "tast/model_io.hpp"
#include "tast/results.hpp"

struct tast_dataset {
  tast::FeatureFile file;
};

struct tast_model {
  tast::SourceModel model;
};

struct tast_engine {
  std::unique_ptr<tast::OnlineMethod> method;
};

struct tast_run {
  tast::RunRecord record;
};

namespace {

thread_local std::string g_last_error;

tast_status status_of(tast::ErrorCode code) {
  using tast::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return TAST_INVALID_ARGUMENT;
    case ErrorCode::ZeroNormVector: return TAST_ZERO_NORM_VECTOR;
    case ErrorCode::DimensionMismatch: return TAST_DIMENSION_MISMATCH;
    case ErrorCode::ShapeMismatch: return TAST_SHAPE_MISMATCH;
    case ErrorCode::IndexOutOfRange: return TAST_INDEX_OUT_OF_RANGE;
    case ErrorCode::EmptySupportSet: return TAST_EMPTY_SUPPORT_SET;
    case ErrorCode::NoPrototypes: return TAST_NO_PROTOTYPES;
    case ErrorCode::EmptyBatch: return TAST_EMPTY_BATCH;
    case ErrorCode::EmptyNeighborList: return TAST_EMPTY_NEIGHBOR_LIST;
    case ErrorCode::BatchTooSmall: return TAST_BATCH_TOO_SMALL;
    case ErrorCode::EmptyGrid: return TAST_EMPTY_GRID;
    case ErrorCode::BadMagic: return TAST_BAD_MAGIC;
    case ErrorCode::TruncatedFile: return TAST_TRUNCATED_FILE;
    case ErrorCode::NonFiniteValue: return TAST_NON_FINITE_VALUE;
    case ErrorCode::Io: return TAST_IO;
  }
  return TAST_INTERNAL;
}

template <typename F>
tast_status guarded(F&& body) noexcept {
  g_last_error.clear();
  try {
    body();
    return TAST_OK;
  } catch (const tast::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TAST_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TAST_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) tast::fail(tast::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

tast::TastConfig to_cpp(const tast_config& c) {
  tast::TastConfig out;
  out.neighbors = c.neighbors;
  out.steps = c.steps;
  out.per_class_cap = c.per_class_cap;
  out.members = c.members;
  out.tau = c.tau;
  out.lr = c.lr;
  out.seed = tast::RngSeed{c.seed};
  out.output_dim = c.output_dim;
  out.global_cap = c.global_cap;
  out.fixed_prototypes = c.fixed_prototypes != 0;
  out.pl_threshold = c.pl_threshold;
  return out;
}

tast_config to_c(const tast::TastConfig& c) {
  tast_config out;
  out.neighbors = c.neighbors;
  out.steps = c.steps;
  out.per_class_cap = c.per_class_cap;
  out.members = c.members;
  out.tau = c.tau;
  out.lr = c.lr;
  out.seed = c.seed.value;
  out.output_dim = c.output_dim;
  out.global_cap = c.global_cap;
  out.fixed_prototypes = c.fixed_prototypes ? 1 : 0;
  out.pl_threshold = c.pl_threshold;
  return out;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tast::Method method_named(const char* name) {
  need(name, "method");
  const auto m = tast::parse_method(name);
  if (!m) tast::fail(tast::ErrorCode::InvalidArgument, std::string("unknown method '") + name + "'");
  return *m;
}

tast_dataset* wrap(tast::LabeledRows rows) {
  return new tast_dataset{tast::make_feature_file(rows)};
}

}  // namespace

extern "C" {

const char* tast_status_name(tast_status status) {
  switch (status) {
    case TAST_OK: return "Ok";
    case TAST_INTERNAL: return "Internal";
    default: break;
  }
  if (status > TAST_OK && status < TAST_INTERNAL)
    return tast::to_string(static_cast<tast::ErrorCode>(status - 1));
  return "Unknown";
}

const char* tast_last_error(void) { return g_last_error.c_str(); }

void tast_string_free(char* s) { std::free(s); }

void tast_config_default(tast_config* out) {
  if (out) *out = to_c(tast::TastConfig{});
}

tast_status tast_config_from_json(const char* json, tast_config* config, size_t* batch_size) {
  return guarded([&] {
    need(json, "json");
    need(config, "config");
    *config = to_c(tast::config_from_json(json, to_cpp(*config), batch_size));
  });
}

tast_status tast_config_to_json(const tast_config* config, size_t batch_size, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = dup_string(tast::config_to_json(to_cpp(*config), batch_size));
  });
}

tast_status tast_dataset_read(const char* path, tast_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new tast_dataset{tast::read_features(path)};
  });
}

tast_status tast_dataset_read_csv(const char* path, uint32_t num_classes, tast_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::optional<std::uint32_t> k;
    if (num_classes > 0) k = num_classes;
    *out = new tast_dataset{tast::read_features_csv(path, k)};
  });
}

tast_status tast_dataset_write(const tast_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    tast::write_features(ds->file, path);
  });
}

tast_status tast_dataset_create(uint32_t rows, uint32_t dim, uint32_t num_classes,
                                const float* features, const int32_t* labels, tast_dataset** out) {
  return guarded([&] {
    need(out, "out");
    if (rows > 0) need(features, "features");
    tast::FeatureFile f;
    f.rows = rows;
    f.dim = dim;
    f.num_classes = num_classes;
    const std::size_t n = static_cast<std::size_t>(rows) * dim;
    f.features.assign(features, features + n);
    if (labels) f.labels = std::vector<std::int32_t>(labels, labels + rows);
    // Round-trip through the codec so a handle is always a valid file.
    f = tast::decode_features(tast::encode_features(f));
    *out = new tast_dataset{std::move(f)};
  });
}

void tast_dataset_free(tast_dataset* ds) { delete ds; }

uint32_t tast_dataset_rows(const tast_dataset* ds) { return ds ? ds->file.rows : 0; }
uint32_t tast_dataset_dim(const tast_dataset* ds) { return ds ? ds->file.dim : 0; }
uint32_t tast_dataset_classes(const tast_dataset* ds) { return ds ? ds->file.num_classes : 0; }
int tast_dataset_has_labels(const tast_dataset* ds) { return ds && ds->file.labels ? 1 : 0; }
int tast_dataset_has_head(const tast_dataset* ds) { return ds && ds->file.head_weight ? 1 : 0; }
int tast_dataset_unit_norm(const tast_dataset* ds) { return ds && ds->file.unit_norm ? 1 : 0; }

tast_status tast_dataset_set_head(tast_dataset* ds, const tast_model* model) {
  return guarded([&] {
    need(ds, "dataset");
    if (!model) {
      ds->file.head_weight.reset();
      ds->file.head_bias.reset();
      return;
    }
    tast::require(!model->model.has_extractor(), tast::ErrorCode::InvalidArgument,
                  "only a linear head can be embedded in a feature file");
    const auto& head = model->model.head;
    tast::require(head.dim() == ds->file.dim && head.num_classes() == ds->file.num_classes,
                  tast::ErrorCode::ShapeMismatch, "head shape does not match the dataset");
    ds->file.head_weight = std::vector<float>(head.weight.values().begin(), head.weight.values().end());
    ds->file.head_bias = std::vector<float>(head.bias.begin(), head.bias.end());
  });
}

tast_status tast_dataset_copy_features(const tast_dataset* ds, float* out, size_t capacity) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    tast::require(capacity >= ds->file.features.size(), tast::ErrorCode::ShapeMismatch,
                  "output buffer smaller than rows x dim");
    std::copy(ds->file.features.begin(), ds->file.features.end(), out);
  });
}

void tast_synth_spec_default(tast_synth_spec* out) {
  if (!out) return;
  const tast::SyntheticSpec s;
  *out = tast_synth_spec{s.classes,    s.dim,
                         s.train_per_class, s.validation_per_class,
                         s.test_count, s.mean_scale,
                         s.class_std,  static_cast<tast_shift>(s.shift),
                         s.shift_scale, s.rotation_deg,
                         s.noise_sigma, s.seed.value};
}

tast_status tast_shift_parse(const char* name, tast_shift* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    const auto k = tast::parse_shift(name);
    if (!k) tast::fail(tast::ErrorCode::InvalidArgument, std::string("unknown shift '") + name + "'");
    *out = static_cast<tast_shift>(*k);
  });
}

tast_status tast_synth_generate(const tast_synth_spec* spec, tast_dataset** train,
                                tast_dataset** validation, tast_dataset** test) {
  return guarded([&] {
    need(spec, "spec");
    tast::SyntheticSpec s;
    s.classes = spec->classes;
    s.dim = spec->dim;
    s.train_per_class = spec->train_per_class;
    s.validation_per_class = spec->validation_per_class;
    s.test_count = spec->test_count;
    s.mean_scale = spec->mean_scale;
    s.class_std = spec->class_std;
    if (spec->shift < TAST_SHIFT_IDENTITY || spec->shift > TAST_SHIFT_NOISE)
      tast::fail(tast::ErrorCode::InvalidArgument, "unknown shift kind");
    s.shift = static_cast<tast::ShiftKind>(spec->shift);
    s.shift_scale = spec->shift_scale;
    s.rotation_deg = spec->rotation_deg;
    s.noise_sigma = spec->noise_sigma;
    s.seed = tast::RngSeed{spec->seed};
    auto bench = tast::generate(s);
    std::unique_ptr<tast_dataset> a(wrap(std::move(bench.train)));
    std::unique_ptr<tast_dataset> b(wrap(std::move(bench.validation)));
    std::unique_ptr<tast_dataset> c(wrap(std::move(bench.test)));
    if (train) *train = a.release();
    if (validation) *validation = b.release();
    if (test) *test = c.release();
  });
}

void tast_bn_options_default(tast_bn_options* out) {
  if (!out) return;
  const tast::BnTrainOptions o;
  *out = tast_bn_options{o.hidden_dim, o.output_dim, o.epochs, o.lr, o.batch_size, o.seed.value};
}

tast_status tast_model_train_linear(const tast_dataset* train, int epochs, double lr,
                                    tast_model** out, double* train_accuracy) {
  return guarded([&] {
    need(train, "train");
    need(out, "out");
    tast::TrainReport report;
    auto head = tast::train_source_head(tast::to_labeled_rows(train->file), epochs, lr, &report);
    *out = new tast_model{tast::SourceModel{std::move(head), std::nullopt}};
    if (train_accuracy) *train_accuracy = report.train_accuracy;
  });
}

tast_status tast_model_train_bn(const tast_dataset* train, const tast_bn_options* options,
                                tast_model** out, double* train_accuracy) {
  return guarded([&] {
    need(train, "train");
    need(out, "out");
    tast::BnTrainOptions o;
    if (options) {
      o.hidden_dim = options->hidden_dim;
      o.output_dim = options->output_dim;
      o.epochs = options->epochs;
      o.lr = options->lr;
      o.batch_size = options->batch_size;
      o.seed = tast::RngSeed{options->seed};
    }
    tast::TrainReport report;
    *out = new tast_model{tast::train_source_bn(tast::to_labeled_rows(train->file), o, &report)};
    if (train_accuracy) *train_accuracy = report.train_accuracy;
  });
}

tast_status tast_model_from_dataset(const tast_dataset* ds, tast_model** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    auto head = tast::embedded_head(ds->file);
    if (!head) tast::fail(tast::ErrorCode::InvalidArgument, "feature file has no embedded head");
    *out = new tast_model{tast::SourceModel{std::move(*head), std::nullopt}};
  });
}

tast_status tast_model_load(const char* path, tast_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new tast_model{tast::load_model(path)};
  });
}

tast_status tast_model_save(const tast_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    tast::save_model(model->model, path);
  });
}

tast_status tast_model_accuracy(const tast_model* model, const tast_dataset* ds, double* out) {
  return guarded([&] {
    need(model, "model");
    need(ds, "dataset");
    need(out, "out");
    *out = tast::source_accuracy(model->model, tast::to_labeled_rows(ds->file));
  });
}

int tast_model_has_extractor(const tast_model* model) {
  return model && model->model.has_extractor() ? 1 : 0;
}
size_t tast_model_input_dim(const tast_model* model) { return model ? model->model.input_dim() : 0; }
size_t tast_model_classes(const tast_model* model) {
  return model ? model->model.head.num_classes() : 0;
}
void tast_model_free(tast_model* model) { delete model; }

tast_status tast_engine_create(const char* method, const tast_model* model, const tast_config* config,
                               tast_engine** out) {
  return guarded([&] {
    need(model, "model");
    need(config, "config");
    need(out, "out");
    *out = new tast_engine{tast::make_method(method_named(method), model->model, to_cpp(*config))};
  });
}

tast_status tast_engine_process(tast_engine* engine, const double* rows, size_t n, size_t dim,
                                int32_t* labels_out, double* probs_out, double* mean_loss) {
  return guarded([&] {
    need(engine, "engine");
    need(rows, "rows");
    need(labels_out, "labels_out");
    std::vector<tast::Vec> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i].assign(rows + i * dim, rows + (i + 1) * dim);
    const auto pred = engine->method->process(batch);
    const std::size_t K = engine->method->num_classes();
    for (std::size_t i = 0; i < n; ++i) {
      labels_out[i] = pred.labels[i];
      if (probs_out) std::copy(pred.probs[i].begin(), pred.probs[i].end(), probs_out + i * K);
    }
    if (mean_loss) *mean_loss = pred.mean_loss;
  });
}

size_t tast_engine_classes(const tast_engine* engine) {
  return engine ? engine->method->num_classes() : 0;
}
size_t tast_engine_min_batch(const tast_engine* engine) {
  return engine ? engine->method->min_batch() : 0;
}
void tast_engine_free(tast_engine* engine) { delete engine; }

tast_status tast_run_online(const char* method, const tast_model* model, const tast_dataset* test,
                            size_t batch_size, const tast_config* config, tast_run** out) {
  return guarded([&] {
    need(model, "model");
    need(test, "test");
    need(config, "config");
    need(out, "out");
    *out = new tast_run{tast::run_online(method_named(method), model->model,
                                         tast::to_labeled_rows(test->file), batch_size,
                                         to_cpp(*config))};
  });
}

double tast_run_final_accuracy(const tast_run* run) { return run ? run->record.final_accuracy() : 0.0; }
size_t tast_run_batches(const tast_run* run) { return run ? run->record.batches.size() : 0; }

tast_status tast_run_write(const tast_run* run, const char* path, int append) {
  return guarded([&] {
    need(run, "run");
    need(path, "path");
    tast::write_results(run->record, path, append != 0);
  });
}

void tast_run_free(tast_run* run) { delete run; }

tast_status tast_grid_search(const char* method, const tast_model* model,
                             const tast_dataset* validation, const tast_grid* grid,
                             const tast_config* base, size_t batch_size, size_t threads,
                             tast_config* best, double* best_accuracy, size_t* evaluated) {
  return guarded([&] {
    need(model, "model");
    need(validation, "validation");
    need(base, "base");
    need(best, "best");
    tast::GridSpec spec;
    if (grid) {
      if (grid->neighbors) spec.neighbors.assign(grid->neighbors, grid->neighbors + grid->neighbors_count);
      if (grid->steps) spec.steps.assign(grid->steps, grid->steps + grid->steps_count);
      if (grid->per_class_caps)
        spec.per_class_caps.assign(grid->per_class_caps,
                                   grid->per_class_caps + grid->per_class_caps_count);
    }
    const auto configs = tast::expand_grid(spec, to_cpp(*base));
    const auto result = tast::grid_search(method_named(method), model->model,
                                          tast::to_labeled_rows(validation->file), configs,
                                          batch_size, threads);
    *best = to_c(result.best);
    if (best_accuracy) *best_accuracy = result.best_accuracy;
    if (evaluated) *evaluated = result.accuracies.size();
  });
}

tast_status tast_report(const char* results_path, char** table, char** csv) {
  return guarded([&] {
    need(results_path, "results_path");
    const auto rows = tast::summarize_results(results_path);
    std::string t = tast::format_report_table(rows);
    std::string c = tast::format_report_csv(rows);
    char* tp = table ? dup_string(t) : nullptr;
    if (csv) {
      try {
        *csv = dup_string(c);
      } catch (...) {
        std::free(tp);
        throw;
      }
    }
    if (table) *table = tp;
  });
}

}  // extern "C"
