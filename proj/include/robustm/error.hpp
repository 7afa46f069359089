// Copyright 2026 The robustm Authors
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

#include <stdexcept>
#include <string>

namespace robustm {

/// Error categories. The numeric values are part of the C API contract
/// (see robustm.h) and must stay in sync with rm_status.
enum class ErrorCode : int {
  kConfig = 2,
  kIo = 3,
  kShape = 4,
  kUnsupported = 5,
  kRankDeficient = 6,
  kDegenerate = 7,
  kUndefined = 8,
  kInternal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define ROBUSTM_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  };

ROBUSTM_DEFINE_ERROR(ConfigError, ErrorCode::kConfig)
ROBUSTM_DEFINE_ERROR(IoError, ErrorCode::kIo)
ROBUSTM_DEFINE_ERROR(ShapeError, ErrorCode::kShape)
ROBUSTM_DEFINE_ERROR(UnsupportedError, ErrorCode::kUnsupported)
ROBUSTM_DEFINE_ERROR(RankError, ErrorCode::kRankDeficient)
ROBUSTM_DEFINE_ERROR(DegenerateError, ErrorCode::kDegenerate)
ROBUSTM_DEFINE_ERROR(UndefinedError, ErrorCode::kUndefined)

#undef ROBUSTM_DEFINE_ERROR

}  // namespace robustm
