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

#ifndef OPSAMPLE_CLI_HPP_
#define OPSAMPLE_CLI_HPP_

#include <ostream>

namespace opsample {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "OPSAMPLE_OUTPUT_DIR";

/// Entry point of the `opsample` command. Returns the process exit code;
/// failures print a JSON error object on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opsample

#endif  // OPSAMPLE_CLI_HPP_
