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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tast {

enum class ErrorCode {
  InvalidArgument,
  ZeroNormVector,
  DimensionMismatch,
  ShapeMismatch,
  IndexOutOfRange,
  EmptySupportSet,
  NoPrototypes,
  EmptyBatch,
  EmptyNeighborList,
  BatchTooSmall,
  EmptyGrid,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine. File-format errors carry the byte
/// offset at which decoding stopped.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::uint64_t> byte_offset = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::uint64_t> byte_offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> offset_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace tast
