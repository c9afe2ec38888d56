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

#include "tast/results.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tast/errors.hpp"

namespace tast {

using json = nlohmann::ordered_json;

namespace {

json config_object(const TastConfig& c, std::size_t batch_size) {
  json j;
  j["N_s"] = c.neighbors;
  j["T"] = c.steps;
  j["M"] = c.per_class_cap;
  j["N_e"] = c.members;
  j["tau"] = c.tau;
  j["lr"] = c.lr;
  j["batch_size"] = batch_size;
  j["seed"] = c.seed.value;
  j["d_phi"] = c.output_dim;
  j["global_cap"] = c.global_cap;
  j["fixed_prototypes"] = c.fixed_prototypes;
  j["pl_threshold"] = c.pl_threshold;
  return j;
}

}  // namespace

std::string config_to_json(const TastConfig& config, std::size_t batch_size) {
  return config_object(config, batch_size).dump();
}

TastConfig config_from_json(const std::string& text, const TastConfig& base, std::size_t* batch_size) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::InvalidArgument, "config must be a JSON object");
  TastConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "N_s") c.neighbors = value.get<int>();
      else if (key == "T") c.steps = value.get<int>();
      else if (key == "M") c.per_class_cap = value.get<int>();
      else if (key == "N_e") c.members = value.get<int>();
      else if (key == "tau") c.tau = value.get<double>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "seed") c.seed.value = value.get<std::uint64_t>();
      else if (key == "d_phi") c.output_dim = value.get<int>();
      else if (key == "global_cap") c.global_cap = value.get<int>();
      else if (key == "fixed_prototypes") c.fixed_prototypes = value.get<bool>();
      else if (key == "pl_threshold") c.pl_threshold = value.get<double>();
      else if (key == "batch_size") {
        if (batch_size) *batch_size = value.get<std::size_t>();
      } else {
        fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string result_lines(const RunRecord& record) {
  std::string out;
  const json config = config_object(record.config, record.batch_size);
  for (const auto& b : record.batches) {
    json line;
    line["method"] = std::string(to_string(record.method));
    line["config"] = config;
    line["batch_index"] = b.index;
    line["batch_accuracy"] = b.batch_accuracy;
    line["cumulative_accuracy"] = b.cumulative_accuracy;
    line["mean_loss"] = b.mean_loss;
    line["wall_ms"] = b.wall_ms;
    out += line.dump();
    out += '\n';
  }
  return out;
}

void write_results(const RunRecord& record, const std::filesystem::path& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << result_lines(record);
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::string strip_wall_time(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    j.erase("wall_ms");
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ReportRow> summarize_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<ReportRow> rows;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const json& c = j.at("config");
      const std::string key = j.at("method").get<std::string>() + c.dump();
      auto [it, inserted] = index.try_emplace(key, rows.size());
      if (inserted) {
        ReportRow r;
        r.method = j.at("method").get<std::string>();
        r.neighbors = c.at("N_s").get<int>();
        r.steps = c.at("T").get<int>();
        r.per_class_cap = c.at("M").get<int>();
        r.members = c.at("N_e").get<int>();
        r.tau = c.at("tau").get<double>();
        r.lr = c.at("lr").get<double>();
        r.batch_size = c.at("batch_size").get<std::size_t>();
        r.seed = c.at("seed").get<std::uint64_t>();
        rows.push_back(r);
      }
      ReportRow& r = rows[it->second];
      r.final_accuracy = j.at("cumulative_accuracy").get<double>();
      ++r.batches;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Io, "malformed result line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  require(!rows.empty(), ErrorCode::Io, "result file has no records");
  return rows;
}

namespace {
std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
}  // namespace

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.neighbors) + "," + std::to_string(r.steps) + "," +
           std::to_string(r.per_class_cap) + "," + std::to_string(r.members) + "," + fmt("%g", r.tau) +
           "," + fmt("%g", r.lr) + "," + std::to_string(r.batch_size) + "," + std::to_string(r.seed) +
           "," + fmt("%.6f", r.final_accuracy) + "\n";
  }
  return out;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  const std::vector<std::string> header{"method", "N_s", "T", "M", "N_e", "tau", "lr", "batch", "seed", "batches", "accuracy"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows)
    cells.push_back({r.method, std::to_string(r.neighbors), std::to_string(r.steps),
                     std::to_string(r.per_class_cap), std::to_string(r.members), fmt("%g", r.tau),
                     fmt("%g", r.lr), std::to_string(r.batch_size), std::to_string(r.seed),
                     std::to_string(r.batches), fmt("%.4f", r.final_accuracy)});
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) out += "  ";
      const std::string& s = cells[r][c];
      // First column left-aligned, numbers right-aligned.
      if (c == 0) out += s + std::string(width[c] - s.size(), ' ');
      else out += std::string(width[c] - s.size(), ' ') + s;
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace tast
