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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tast/tast.h"

namespace fs = std::filesystem;

namespace {

struct Bench {
  tast_dataset* train = nullptr;
  tast_dataset* val = nullptr;
  tast_dataset* test = nullptr;
  tast_model* model = nullptr;

  Bench() {
    tast_synth_spec spec;
    tast_synth_spec_default(&spec);
    spec.classes = 3;
    spec.dim = 8;
    spec.train_per_class = 40;
    spec.validation_per_class = 20;
    spec.test_count = 240;
    spec.seed = 3;
    EXPECT_EQ(tast_synth_generate(&spec, &train, &val, &test), TAST_OK);
    EXPECT_EQ(tast_model_train_linear(train, 200, 0.5, &model, nullptr), TAST_OK);
  }
  ~Bench() {
    tast_model_free(model);
    tast_dataset_free(train);
    tast_dataset_free(val);
    tast_dataset_free(test);
  }
};

std::string temp_file(const char* name) { return (fs::temp_directory_path() / (std::string("tast_capi_") + name)).string(); }

}  // namespace

TEST(CApi, StatusNamesAndLastError) {
  EXPECT_STREQ(tast_status_name(TAST_OK), "Ok");
  EXPECT_STREQ(tast_status_name(TAST_BAD_MAGIC), "BadMagic");
  tast_dataset* ds = nullptr;
  EXPECT_EQ(tast_dataset_read("/nonexistent/file.tafs", &ds), TAST_IO);
  EXPECT_EQ(ds, nullptr);
  EXPECT_NE(std::strstr(tast_last_error(), "nonexistent"), nullptr);
  EXPECT_EQ(tast_dataset_read(nullptr, &ds), TAST_INVALID_ARGUMENT);
}

TEST(CApi, ConfigJsonRoundTrip) {
  tast_config c;
  tast_config_default(&c);
  EXPECT_EQ(c.neighbors, 1);
  EXPECT_EQ(c.members, 20);
  EXPECT_DOUBLE_EQ(c.tau, 0.1);
  c.neighbors = 4;
  c.per_class_cap = -1;
  char* json = nullptr;
  ASSERT_EQ(tast_config_to_json(&c, 64, &json), TAST_OK);
  tast_config back;
  tast_config_default(&back);
  size_t batch = 0;
  ASSERT_EQ(tast_config_from_json(json, &back, &batch), TAST_OK);
  tast_string_free(json);
  EXPECT_EQ(back.neighbors, 4);
  EXPECT_EQ(back.per_class_cap, -1);
  EXPECT_EQ(batch, 64u);
  EXPECT_EQ(tast_config_from_json("{\"bogus\": 1}", &back, nullptr), TAST_INVALID_ARGUMENT);
}

TEST(CApi, DatasetCreateWriteReadAndCopy) {
  const float feats[] = {3.0f, 4.0f, 0.0f, 2.0f};
  const int32_t labels[] = {1, 0};
  tast_dataset* ds = nullptr;
  ASSERT_EQ(tast_dataset_create(2, 2, 2, feats, labels, &ds), TAST_OK);
  EXPECT_EQ(tast_dataset_rows(ds), 2u);
  EXPECT_EQ(tast_dataset_dim(ds), 2u);
  EXPECT_TRUE(tast_dataset_has_labels(ds));
  EXPECT_FALSE(tast_dataset_has_head(ds));
  EXPECT_FALSE(tast_dataset_unit_norm(ds));
  const std::string path = temp_file("ds.tafs");
  ASSERT_EQ(tast_dataset_write(ds, path.c_str()), TAST_OK);
  tast_dataset* back = nullptr;
  ASSERT_EQ(tast_dataset_read(path.c_str(), &back), TAST_OK);
  float out[4];
  ASSERT_EQ(tast_dataset_copy_features(back, out, 4), TAST_OK);
  EXPECT_EQ(std::memcmp(out, feats, sizeof feats), 0);
  EXPECT_EQ(tast_dataset_copy_features(back, out, 3), TAST_SHAPE_MISMATCH);
  tast_dataset_free(back);
  tast_dataset_free(ds);
  fs::remove(path);

  const int32_t bad_labels[] = {0, 5};
  EXPECT_NE(tast_dataset_create(2, 2, 2, feats, bad_labels, &ds), TAST_OK);
}

TEST(CApi, EmbeddedHeadDrivesTheModel) {
  Bench b;
  ASSERT_EQ(tast_dataset_set_head(b.test, b.model), TAST_OK);
  EXPECT_TRUE(tast_dataset_has_head(b.test));
  EXPECT_TRUE(tast_dataset_has_labels(b.test));
  tast_model* embedded = nullptr;
  ASSERT_EQ(tast_model_from_dataset(b.test, &embedded), TAST_OK);
  double a = 0.0, e = 0.0;
  ASSERT_EQ(tast_model_accuracy(b.model, b.test, &a), TAST_OK);
  ASSERT_EQ(tast_model_accuracy(embedded, b.test, &e), TAST_OK);
  // The embedded head is stored in single precision.
  EXPECT_NEAR(a, e, 1.0 / 240.0 + 1e-12);
  tast_model_free(embedded);
  ASSERT_EQ(tast_dataset_set_head(b.test, nullptr), TAST_OK);
  EXPECT_FALSE(tast_dataset_has_head(b.test));
  EXPECT_EQ(tast_model_from_dataset(b.test, &embedded), TAST_INVALID_ARGUMENT);
}

TEST(CApi, ModelSaveLoad) {
  Bench b;
  const std::string path = temp_file("model.json");
  ASSERT_EQ(tast_model_save(b.model, path.c_str()), TAST_OK);
  tast_model* m = nullptr;
  ASSERT_EQ(tast_model_load(path.c_str(), &m), TAST_OK);
  EXPECT_EQ(tast_model_input_dim(m), 8u);
  EXPECT_EQ(tast_model_classes(m), 3u);
  EXPECT_FALSE(tast_model_has_extractor(m));
  tast_model_free(m);
  fs::remove(path);
}

TEST(CApi, EngineProcessesBatches) {
  Bench b;
  tast_config cfg;
  tast_config_default(&cfg);
  cfg.members = 3;
  tast_engine* eng = nullptr;
  ASSERT_EQ(tast_engine_create("tast", b.model, &cfg, &eng), TAST_OK);
  EXPECT_EQ(tast_engine_classes(eng), 3u);
  EXPECT_EQ(tast_engine_min_batch(eng), 1u);
  std::vector<double> rows(4 * 8);
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = std::sin(static_cast<double>(i));
  int32_t labels[4];
  double probs[12], loss = -1.0;
  ASSERT_EQ(tast_engine_process(eng, rows.data(), 4, 8, labels, probs, &loss), TAST_OK);
  for (int n = 0; n < 4; ++n) {
    EXPECT_NEAR(probs[3 * n] + probs[3 * n + 1] + probs[3 * n + 2], 1.0, 1e-9);
    EXPECT_GE(labels[n], 0);
    EXPECT_LT(labels[n], 3);
  }
  EXPECT_GE(loss, 0.0);
  EXPECT_EQ(tast_engine_process(eng, rows.data(), 4, 7, labels, nullptr, nullptr), TAST_DIMENSION_MISMATCH);
  tast_engine_free(eng);
  EXPECT_EQ(tast_engine_create("magic", b.model, &cfg, &eng), TAST_INVALID_ARGUMENT);
  EXPECT_EQ(tast_engine_create("tast_bn", b.model, &cfg, &eng), TAST_INVALID_ARGUMENT);
}

TEST(CApi, OnlineRunWriteAndReport) {
  Bench b;
  tast_config cfg;
  tast_config_default(&cfg);
  tast_run* run = nullptr;
  ASSERT_EQ(tast_run_online("none", b.model, b.test, 32, &cfg, &run), TAST_OK);
  EXPECT_EQ(tast_run_batches(run), 8u);
  double acc = 0.0;
  ASSERT_EQ(tast_model_accuracy(b.model, b.test, &acc), TAST_OK);
  EXPECT_DOUBLE_EQ(tast_run_final_accuracy(run), acc);
  const std::string path = temp_file("run.jsonl");
  ASSERT_EQ(tast_run_write(run, path.c_str(), 0), TAST_OK);
  tast_run_free(run);
  char* table = nullptr;
  char* csv = nullptr;
  ASSERT_EQ(tast_report(path.c_str(), &table, &csv), TAST_OK);
  EXPECT_EQ(std::strncmp(csv, "method,N_s,T,M,N_e,tau,lr,batch_size,seed,final_accuracy\nnone,", 62), 0);
  EXPECT_NE(std::strstr(table, "none"), nullptr);
  tast_string_free(table);
  tast_string_free(csv);
  fs::remove(path);
  EXPECT_EQ(tast_report(path.c_str(), nullptr, nullptr), TAST_IO);
}

TEST(CApi, GridSearchOverCustomGrid) {
  Bench b;
  tast_config base, best;
  tast_config_default(&base);
  base.members = 2;
  const int ns[] = {1, 4};
  const int caps[] = {5, -1};
  tast_grid grid{ns, 2, nullptr, 0, caps, 2};
  double best_acc = 0.0;
  size_t evaluated = 0;
  ASSERT_EQ(tast_grid_search("tast_n", b.model, b.val, &grid, &base, 16, 2, &best, &best_acc, &evaluated), TAST_OK);
  EXPECT_EQ(evaluated, 8u);
  EXPECT_GT(best_acc, 0.3);
  EXPECT_EQ(best.members, 2);
  const int empty[] = {0};
  tast_grid none{empty, 0, nullptr, 0, nullptr, 0};
  EXPECT_EQ(tast_grid_search("tast_n", b.model, b.val, &none, &base, 16, 2, &best, &best_acc, &evaluated),
            TAST_EMPTY_GRID);
}

TEST(CApi, BnModelAndShiftParsing) {
  Bench b;
  tast_shift s;
  ASSERT_EQ(tast_shift_parse("meanshift", &s), TAST_OK);
  EXPECT_EQ(s, TAST_SHIFT_MEAN);
  EXPECT_EQ(tast_shift_parse("sideways", &s), TAST_INVALID_ARGUMENT);
  tast_bn_options opt;
  tast_bn_options_default(&opt);
  opt.hidden_dim = 8;
  opt.output_dim = 4;
  opt.epochs = 5;
  tast_model* bn = nullptr;
  double train_acc = 0.0;
  ASSERT_EQ(tast_model_train_bn(b.train, &opt, &bn, &train_acc), TAST_OK);
  EXPECT_TRUE(tast_model_has_extractor(bn));
  EXPECT_GT(train_acc, 0.0);
  tast_config cfg;
  tast_config_default(&cfg);
  tast_run* run = nullptr;
  ASSERT_EQ(tast_run_online("tast_bn", bn, b.test, 32, &cfg, &run), TAST_OK);
  EXPECT_GT(tast_run_final_accuracy(run), 0.0);
  tast_run_free(run);
  EXPECT_EQ(tast_dataset_set_head(b.test, bn), TAST_INVALID_ARGUMENT);
  tast_model_free(bn);
}
