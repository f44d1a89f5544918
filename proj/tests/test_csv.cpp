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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "opsample/csv.hpp"
#include "opsample/error.hpp"

namespace opsample {
namespace {

TEST(Csv, ParsesQuotesAndCrlf) {
  const auto t = csv::parse("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n2,,z\r\n");
  ASSERT_EQ(t.header.size(), 3u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x,y");
  EXPECT_EQ(t.rows[0][2], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.column("c"), 2u);
  EXPECT_FALSE(t.column("d").has_value());
}

TEST(Csv, MissingTrailingNewline) {
  const auto t = csv::parse("a\n1\n2");
  EXPECT_EQ(t.rows.size(), 2u);
}

TEST(Csv, FieldCountMismatchIsAnError) {
  EXPECT_THROW(csv::parse("a,b\n1\n"), Error);
}

TEST(Csv, Numbers) {
  EXPECT_EQ(csv::to_double("0.25"), 0.25);
  EXPECT_EQ(csv::to_double(" 3 "), 3.0);
  EXPECT_FALSE(csv::to_double("abc").has_value());
  EXPECT_FALSE(csv::to_double("").has_value());
  EXPECT_TRUE(std::isnan(*csv::to_double("nan")));
  EXPECT_EQ(csv::to_integer("-12"), -12);
  EXPECT_FALSE(csv::to_integer("1.5").has_value());
}

TEST(Csv, FormatRealRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0, 0.9}) {
    EXPECT_EQ(*csv::to_double(csv::format_real(v)), v);
  }
  EXPECT_EQ(csv::format_real(0.5), "0.5");
}

TEST(Csv, Escape) {
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("q\""), "\"q\"\"\"");
}

}  // namespace
}  // namespace opsample
