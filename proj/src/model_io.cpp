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

#include "tast/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tast/errors.hpp"

namespace tast {

using json = nlohmann::ordered_json;

namespace {

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  require(data.size() == m.size(), ErrorCode::ShapeMismatch, "matrix data length != rows x cols");
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

}  // namespace

std::string model_to_json(const SourceModel& model) {
  json j;
  j["kind"] = model.extractor ? "bn" : "linear";
  j["head"] = {{"weight", matrix_json(model.head.weight)}, {"bias", model.head.bias}};
  if (model.extractor) {
    const ToyBnExtractor& e = *model.extractor;
    j["extractor"] = {{"w1", matrix_json(e.w1)},
                      {"b1", e.b1},
                      {"gamma", e.gamma},
                      {"beta", e.beta},
                      {"w2", matrix_json(e.w2)},
                      {"b2", e.b2},
                      {"source_mean", e.source_stats.mean},
                      {"source_var", e.source_stats.var}};
  }
  return j.dump(1);
}

SourceModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SourceModel model;
    model.head.weight = matrix_from(j.at("head").at("weight"));
    model.head.bias = j.at("head").at("bias").get<Vec>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bn") {
      const json& x = j.at("extractor");
      ToyBnExtractor e;
      e.w1 = matrix_from(x.at("w1"));
      e.b1 = x.at("b1").get<Vec>();
      e.gamma = x.at("gamma").get<Vec>();
      e.beta = x.at("beta").get<Vec>();
      e.w2 = matrix_from(x.at("w2"));
      e.b2 = x.at("b2").get<Vec>();
      e.source_stats.mean = x.at("source_mean").get<Vec>();
      e.source_stats.var = x.at("source_var").get<Vec>();
      e.validate();
      model.extractor = std::move(e);
    } else {
      require(kind == "linear", ErrorCode::InvalidArgument, "unknown model kind");
    }
    model.head.validate();
    require(model.head.dim() == (model.extractor ? model.extractor->output_dim() : model.head.dim()),
            ErrorCode::ShapeMismatch, "head input dimension != extractor output dimension");
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const SourceModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

SourceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace tast
