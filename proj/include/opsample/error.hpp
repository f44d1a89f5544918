// Copyright 2026 The opsample Authors
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

#ifndef OPSAMPLE_ERROR_HPP_
#define OPSAMPLE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace opsample {

// All library failures surface as this exception. `code` is a short
// machine-readable tag ("invalid_argument", "parse", "io", ...) that the CLI
// forwards into its JSON error payload.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail("invalid_argument", message);
}

}  // namespace opsample

#endif  // OPSAMPLE_ERROR_HPP_
