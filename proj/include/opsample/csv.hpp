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

#ifndef OPSAMPLE_CSV_HPP_
#define OPSAMPLE_CSV_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opsample::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

/// RFC-4180-ish: comma separated, optional double quotes, CRLF tolerated.
Table parse(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::optional<double> to_double(std::string_view field);
std::optional<long long> to_integer(std::string_view field);

/// Shortest text that round-trips to the same double.
std::string format_real(double value);

std::string escape(std::string_view field);

}  // namespace opsample::csv

#endif  // OPSAMPLE_CSV_HPP_
