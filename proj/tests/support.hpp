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

#ifndef OPSAMPLE_TESTS_SUPPORT_HPP_
#define OPSAMPLE_TESTS_SUPPORT_HPP_

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "opsample/population.hpp"
#include "opsample/random.hpp"

namespace opsample::testing {

// Classification population with z given directly and one raw aux column.
inline Population classification(const std::vector<int>& z, const std::vector<double>& chi,
                                 const std::string& aux = "score") {
  std::vector<PopulationRecord> records(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    records[i].id = i;
    records[i].true_label = 0;
    records[i].predicted_label = z[i];
    records[i].aux = {chi.empty() ? 1.0 : chi[i]};
  }
  return Population(Task::kClassification, std::move(records), {aux});
}

inline Population regression(const std::vector<double>& delta, const std::vector<double>& chi,
                             const std::string& aux = "score") {
  std::vector<PopulationRecord> records(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    records[i].id = i;
    records[i].predicted_value = 1.0;
    records[i].true_value = 1.0 + delta[i];
    records[i].aux = {chi.empty() ? 1.0 : chi[i]};
  }
  return Population(Task::kRegression, std::move(records), {aux});
}

inline double mean_target(const Population& pop) {
  double s = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) s += target_value(pop.task(), pop[i]);
  return s / static_cast<double>(pop.size());
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("opsample_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace opsample::testing

#endif  // OPSAMPLE_TESTS_SUPPORT_HPP_
