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

#include <filesystem>
#include <string>

#include "tast/methods.hpp"

namespace tast {

/// JSON model file: {"kind": "linear"|"bn", "head": {...}, "extractor": {...}}.
std::string model_to_json(const SourceModel& model);
SourceModel model_from_json(const std::string& text);

void save_model(const SourceModel& model, const std::filesystem::path& path);
SourceModel load_model(const std::filesystem::path& path);

}  // namespace tast
