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

// Command-line driver over the C interface.
//
//   tast gen           synthetic benchmark (or CSV import) -> feature files
//   tast train-source  labelled features -> model file
//   tast run           one method over a feature stream -> result file
//   tast grid          select a config on validation, then run it on test
//   tast report        result file -> aligned table and CSV
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tast/tast.h"

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct DataError {
  std::string message;
};

void check(tast_status status, const std::string& context) {
  if (status != TAST_OK) throw DataError{context + ": " + tast_last_error()};
}

struct DatasetDeleter {
  void operator()(tast_dataset* p) const { tast_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(tast_model* p) const { tast_model_free(p); }
};
struct RunDeleter {
  void operator()(tast_run* p) const { tast_run_free(p); }
};
using Dataset = std::unique_ptr<tast_dataset, DatasetDeleter>;
using Model = std::unique_ptr<tast_model, ModelDeleter>;
using Run = std::unique_ptr<tast_run, RunDeleter>;

Dataset read_dataset(const std::string& path) {
  tast_dataset* ds = nullptr;
  check(tast_dataset_read(path.c_str(), &ds), path);
  return Dataset(ds);
}

const std::vector<std::string> kMethods{"none", "t3a", "tast", "tast_n", "tast_bn", "tentclf", "plclf"};

// Hyperparameter flags shared by `run` and `grid`. Explicit flags override
// --config-json, which overrides the defaults.
struct ConfigFlags {
  std::string json;
  int ns = 0, steps = 0, m = 0, ne = 0, d_phi = 0, global_cap = 0;
  double tau = 0.0, lr = 0.0, pl_threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  bool fixed_prototypes = false;

  CLI::Option* o_ns = nullptr;
  CLI::Option* o_steps = nullptr;
  CLI::Option* o_m = nullptr;
  CLI::Option* o_ne = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_lr = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_d_phi = nullptr;
  CLI::Option* o_global_cap = nullptr;
  CLI::Option* o_pl = nullptr;
  CLI::Option* o_fixed = nullptr;
  CLI::Option* o_batch = nullptr;

  void attach(CLI::App* app, bool with_search_flags) {
    app->add_option("--config-json", json, "config as inline JSON or a path to a JSON file");
    if (with_search_flags) {
      o_ns = app->add_option("--ns", ns, "neighbors N_s")->check(CLI::PositiveNumber);
      o_steps = app->add_option("--steps", steps, "gradient steps T per batch")->check(CLI::NonNegativeNumber);
      o_m = app->add_option("--m", m, "per-class support cap M (-1 = unlimited)");
    }
    o_ne = app->add_option("--ne", ne, "ensemble members N_e")->check(CLI::PositiveNumber);
    o_tau = app->add_option("--tau", tau, "prototype softmax temperature")->check(CLI::PositiveNumber);
    o_lr = app->add_option("--lr", lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    o_seed = app->add_option("--seed", seed, "adapter initialization seed");
    o_d_phi = app->add_option("--d-phi", d_phi, "adapter output dim (0 = input dim / 4)");
    o_global_cap = app->add_option("--global-cap", global_cap, "TAST-BN support size (-1 = unlimited)");
    o_pl = app->add_option("--pl-threshold", pl_threshold, "PLClf confidence threshold");
    o_fixed = app->add_flag("--fixed-prototypes", fixed_prototypes, "TAST-BN: classifier rows as prototypes");
    o_batch = app->add_option("--batch-size", batch_size, "test batch size")->check(CLI::PositiveNumber);
  }

  tast_config resolve(std::size_t* batch_out) const {
    tast_config c;
    tast_config_default(&c);
    std::size_t batch = batch_size;
    if (!json.empty()) {
      std::string text = json;
      if (text.find('{') == std::string::npos) {
        std::ifstream in(text);
        if (!in) throw DataError{"cannot open config file " + text};
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      check(tast_config_from_json(text.c_str(), &c, &batch), "--config-json");
    }
    auto set = [](const CLI::Option* o) { return o != nullptr && o->count() > 0; };
    if (set(o_ns)) c.neighbors = ns;
    if (set(o_steps)) c.steps = steps;
    if (set(o_m)) c.per_class_cap = m;
    if (set(o_ne)) c.members = ne;
    if (set(o_tau)) c.tau = tau;
    if (set(o_lr)) c.lr = lr;
    if (set(o_seed)) c.seed = seed;
    if (set(o_d_phi)) c.output_dim = d_phi;
    if (set(o_global_cap)) c.global_cap = global_cap;
    if (set(o_pl)) c.pl_threshold = pl_threshold;
    if (set(o_fixed)) c.fixed_prototypes = fixed_prototypes ? 1 : 0;
    if (set(o_batch) || json.empty()) batch = batch_size;
    if (batch == 0) batch = batch_size;
    *batch_out = batch;
    return c;
  }
};

Model load_or_embedded(const std::string& model_path, const tast_dataset* features) {
  tast_model* m = nullptr;
  if (!model_path.empty()) {
    check(tast_model_load(model_path.c_str(), &m), model_path);
  } else {
    check(tast_model_from_dataset(features, &m), "no --model given and the feature file");
  }
  return Model(m);
}

std::string config_json(const tast_config& c, std::size_t batch) {
  char* s = nullptr;
  check(tast_config_to_json(&c, batch, &s), "config");
  std::string out(s);
  tast_string_free(s);
  return out;
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  tast_synth_spec spec{};
  std::string shift = "meanshift";
  std::string out_dir = ".";
  std::string from_csv;
  std::string out_file;
  std::uint32_t csv_classes = 0;
};

int cmd_gen(const GenArgs& a) {
  if (!a.from_csv.empty()) {
    if (a.out_file.empty()) throw CLI::RequiredError("--out is required with --from-csv");
    tast_dataset* ds = nullptr;
    check(tast_dataset_read_csv(a.from_csv.c_str(), a.csv_classes, &ds), a.from_csv);
    Dataset owned(ds);
    check(tast_dataset_write(ds, a.out_file.c_str()), a.out_file);
    std::cout << "wrote " << a.out_file << " (" << tast_dataset_rows(ds) << " rows, d="
              << tast_dataset_dim(ds) << ", K=" << tast_dataset_classes(ds) << ")\n";
    return 0;
  }
  tast_synth_spec spec = a.spec;
  check(tast_shift_parse(a.shift.c_str(), &spec.shift), "--shift");
  tast_dataset *train = nullptr, *val = nullptr, *test = nullptr;
  check(tast_synth_generate(&spec, &train, &val, &test), "gen");
  Dataset t(train), v(val), s(test);
  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  for (auto [name, ds] : {std::pair{"train.tafs", t.get()}, {"val.tafs", v.get()}, {"test.tafs", s.get()}}) {
    const auto path = (dir / name).string();
    check(tast_dataset_write(ds, path.c_str()), path);
    std::cout << "wrote " << path << " (" << tast_dataset_rows(ds) << " rows)\n";
  }
  return 0;
}

// ---- train-source ---------------------------------------------------------

struct TrainArgs {
  std::string train, val, out, kind = "linear";
  std::vector<std::string> embed;
  int epochs = 300;
  double lr = 0.5;
  tast_bn_options bn{};
};

int cmd_train(TrainArgs a, const CLI::App& sub) {
  Dataset train = read_dataset(a.train);
  tast_model* raw = nullptr;
  double train_acc = 0.0;
  if (a.kind == "bn") {
    if (sub.get_option("--epochs")->count()) a.bn.epochs = a.epochs;
    if (sub.get_option("--lr")->count()) a.bn.lr = a.lr;
    check(tast_model_train_bn(train.get(), &a.bn, &raw, &train_acc), "train-source");
  } else {
    check(tast_model_train_linear(train.get(), a.epochs, a.lr, &raw, &train_acc), "train-source");
  }
  Model model(raw);
  check(tast_model_save(model.get(), a.out.c_str()), a.out);
  std::printf("train_accuracy %.6f\n", train_acc);
  if (!a.val.empty()) {
    Dataset val = read_dataset(a.val);
    double acc = 0.0;
    check(tast_model_accuracy(model.get(), val.get(), &acc), a.val);
    std::printf("validation_accuracy %.6f\n", acc);
  }
  for (const auto& path : a.embed) {
    Dataset ds = read_dataset(path);
    check(tast_dataset_set_head(ds.get(), model.get()), path);
    check(tast_dataset_write(ds.get(), path.c_str()), path);
    std::printf("embedded head into %s\n", path.c_str());
  }
  return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string method, features, model, out;
  bool append = false;
  ConfigFlags cfg;
};

int cmd_run(const RunArgs& a) {
  std::size_t batch = 0;
  const tast_config config = a.cfg.resolve(&batch);
  Dataset test = read_dataset(a.features);
  Model model = load_or_embedded(a.model, test.get());
  tast_run* raw = nullptr;
  check(tast_run_online(a.method.c_str(), model.get(), test.get(), batch, &config, &raw), "run");
  Run run(raw);
  check(tast_run_write(run.get(), a.out.c_str(), a.append ? 1 : 0), a.out);
  std::printf("method %s batches %zu final_accuracy %.6f\n", a.method.c_str(), tast_run_batches(run.get()),
              tast_run_final_accuracy(run.get()));
  return 0;
}

// ---- grid -----------------------------------------------------------------

struct GridArgs {
  std::string method, val, test, model, out;
  std::size_t threads = 0;
  std::vector<int> ns, steps, m;
  ConfigFlags cfg;
};

int cmd_grid(const GridArgs& a) {
  std::size_t batch = 0;
  const tast_config base = a.cfg.resolve(&batch);
  Dataset val = read_dataset(a.val);
  Dataset test = read_dataset(a.test);
  Model model = load_or_embedded(a.model, val.get());
  tast_grid grid{a.ns.empty() ? nullptr : a.ns.data(), a.ns.size(),
                 a.steps.empty() ? nullptr : a.steps.data(), a.steps.size(),
                 a.m.empty() ? nullptr : a.m.data(), a.m.size()};
  tast_config best;
  double best_acc = 0.0;
  std::size_t evaluated = 0;
  check(tast_grid_search(a.method.c_str(), model.get(), val.get(), &grid, &base, batch, a.threads, &best,
                         &best_acc, &evaluated),
        "grid");
  std::printf("evaluated %zu configs; best validation_accuracy %.6f\n", evaluated, best_acc);
  std::printf("best_config %s\n", config_json(best, batch).c_str());
  tast_run* raw = nullptr;
  check(tast_run_online(a.method.c_str(), model.get(), test.get(), batch, &best, &raw), "run");
  Run run(raw);
  check(tast_run_write(run.get(), a.out.c_str(), 0), a.out);
  std::printf("test final_accuracy %.6f\n", tast_run_final_accuracy(run.get()));
  return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string results, csv_out, format = "table";
};

int cmd_report(const ReportArgs& a) {
  char* table = nullptr;
  char* csv = nullptr;
  check(tast_report(a.results.c_str(), &table, &csv), a.results);
  const std::string t(table), c(csv);
  tast_string_free(table);
  tast_string_free(csv);
  if (a.format == "csv") std::cout << c;
  else std::cout << t;
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out, std::ios::trunc);
    if (!out) throw DataError{"cannot write " + a.csv_out};
    out << c;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time adaptation engine over frozen features"};
  app.require_subcommand(1);

  GenArgs gen;
  tast_synth_spec_default(&gen.spec);
  auto* g = app.add_subcommand("gen", "generate a synthetic benchmark or import a CSV");
  g->add_option("--classes", gen.spec.classes)->check(CLI::PositiveNumber);
  g->add_option("--dim", gen.spec.dim)->check(CLI::PositiveNumber);
  g->add_option("--train-per-class", gen.spec.train_per_class);
  g->add_option("--val-per-class", gen.spec.validation_per_class);
  g->add_option("--test-count", gen.spec.test_count);
  g->add_option("--mean-scale", gen.spec.mean_scale);
  g->add_option("--class-std", gen.spec.class_std);
  g->add_option("--shift", gen.shift)->check(CLI::IsMember({"identity", "meanshift", "rotation", "noise"}));
  g->add_option("--shift-scale", gen.spec.shift_scale);
  g->add_option("--rotation-deg", gen.spec.rotation_deg);
  g->add_option("--noise-sigma", gen.spec.noise_sigma);
  g->add_option("--seed", gen.spec.seed);
  g->add_option("--out-dir", gen.out_dir, "writes train.tafs, val.tafs, test.tafs");
  auto* from_csv = g->add_option("--from-csv", gen.from_csv, "convert `label,f1,...` rows instead");
  g->add_option("--out", gen.out_file, "output file for --from-csv")->needs(from_csv);
  g->add_option("--csv-classes", gen.csv_classes, "K for --from-csv (default: max label + 1)")->needs(from_csv);

  TrainArgs tr;
  tast_bn_options_default(&tr.bn);
  auto* t = app.add_subcommand("train-source", "train the source model on labelled features");
  t->add_option("--train", tr.train)->required();
  t->add_option("--out", tr.out, "model file")->required();
  t->add_option("--val", tr.val, "labelled validation features");
  t->add_option("--kind", tr.kind)->check(CLI::IsMember({"linear", "bn"}));
  t->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  t->add_option("--lr", tr.lr)->check(CLI::NonNegativeNumber);
  t->add_option("--hidden", tr.bn.hidden_dim, "bn: hidden width");
  t->add_option("--embed-dim", tr.bn.output_dim, "bn: embedding width");
  t->add_option("--batch-size", tr.bn.batch_size, "bn: minibatch size");
  t->add_option("--seed", tr.bn.seed, "bn: initialization seed");
  t->add_option("--embed", tr.embed, "feature files to rewrite with the trained head (linear only)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "run one method over a feature stream");
  r->add_option("--method", run.method)->required()->check(CLI::IsMember(kMethods));
  r->add_option("--features,--test", run.features, "test feature file")->required();
  r->add_option("--model", run.model, "model file (default: head embedded in the feature file)");
  r->add_option("--out", run.out, "result file (JSON lines)")->required();
  r->add_flag("--append", run.append, "append to the result file");
  run.cfg.attach(r, true);

  GridArgs grid;
  auto* gr = app.add_subcommand("grid", "select (N_s, T, M) on validation, then run on test");
  gr->add_option("--method", grid.method)->required()->check(CLI::IsMember(kMethods));
  gr->add_option("--val", grid.val, "labelled source-domain validation features")->required();
  gr->add_option("--test", grid.test, "test feature file")->required();
  gr->add_option("--model", grid.model, "model file (default: head embedded in --val)");
  gr->add_option("--out", grid.out, "result file for the selected config")->required();
  gr->add_option("--threads", grid.threads, "workers (0 = TAFS_THREADS or all cores)");
  gr->add_option("--grid-ns", grid.ns)->delimiter(',');
  gr->add_option("--grid-steps", grid.steps)->delimiter(',');
  gr->add_option("--grid-m", grid.m)->delimiter(',');
  grid.cfg.attach(gr, false);

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "summarize a result file");
  rp->add_option("results", rep.results)->required();
  rp->add_option("--csv", rep.csv_out, "also write the CSV summary here");
  rp->add_option("--format", rep.format)->check(CLI::IsMember({"table", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (t->parsed()) return cmd_train(tr, *t);
    if (r->parsed()) return cmd_run(run);
    if (gr->parsed()) return cmd_grid(grid);
    if (rp->parsed()) return cmd_report(rep);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
