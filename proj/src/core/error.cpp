// Copyright 2026 The stprivacy Authors
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

#include "error.hpp"

namespace stp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateEvent: return "DegenerateEvent";
    case ErrorCode::DegeneratePrior: return "DegeneratePrior";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace stp
