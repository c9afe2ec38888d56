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

// Result files are JSON Lines, one object per processed batch:
//   {"method", "config", "batch_index", "batch_accuracy",
//    "cumulative_accuracy", "mean_loss", "wall_ms"}
// "config" carries the hyperparameters and the batch size. wall_ms is the
// only field that is not reproducible run to run.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tast/bench.hpp"
#include "tast/engine.hpp"

namespace tast {

std::string config_to_json(const TastConfig& config, std::size_t batch_size = 0);
/// Unknown keys are rejected; missing keys keep `base` values. A
/// "batch_size" key is stored in `batch_size` when given.
TastConfig config_from_json(const std::string& text, const TastConfig& base = {},
                            std::size_t* batch_size = nullptr);

/// One line per batch, each terminated by '\n'.
std::string result_lines(const RunRecord& record);
void write_results(const RunRecord& record, const std::filesystem::path& path, bool append = false);

/// Drops "wall_ms" from every line; what determinism checks compare.
std::string strip_wall_time(const std::string& jsonl);

struct ReportRow {
  std::string method;
  int neighbors = 0;
  int steps = 0;
  int per_class_cap = 0;
  int members = 0;
  double tau = 0.0;
  double lr = 0.0;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  std::size_t batches = 0;
};

/// One row per distinct (method, config) in file order, with the last
/// cumulative accuracy seen. Throws Io for an empty or malformed file.
std::vector<ReportRow> summarize_results(const std::filesystem::path& path);

inline constexpr const char* kReportCsvHeader =
    "method,N_s,T,M,N_e,tau,lr,batch_size,seed,final_accuracy";
std::string format_report_csv(const std::vector<ReportRow>& rows);
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace tast
