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

#include "tast/errors.hpp"

namespace tast {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptySupportSet: return "EmptySupportSet";
    case ErrorCode::NoPrototypes: return "NoPrototypes";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyNeighborList: return "EmptyNeighborList";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::uint64_t> offset) {
  std::string out = std::string(to_string(code)) + ": " + message;
  if (offset) out += " (byte offset " + std::to_string(*offset) + ")";
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::uint64_t> byte_offset)
    : std::runtime_error(decorate(code, message, byte_offset)),
      code_(code),
      offset_(byte_offset) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace tast
