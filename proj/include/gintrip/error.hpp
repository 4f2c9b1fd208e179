// Copyright 2026 The GINTRIP Authors
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

#ifndef GINTRIP_ERROR_HPP
#define GINTRIP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gintrip {

enum class ErrorKind {
  kInvalidArgument,
  kShapeMismatch,
  kIo,
  kNumeric,
};

/// Library-wide exception. The kind decides the CLI exit code
/// (numeric failures exit 3, everything else 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::kInvalidArgument, message);
}

}  // namespace gintrip

#endif  // GINTRIP_ERROR_HPP
