// Copyright 2026 The sergap Authors.
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

#include <filesystem>
#include <functional>

#include <gtest/gtest.h>

#include "support/properties.hpp"

namespace sergap::testing {
namespace {

constexpr std::uint64_t kCases = 1000;

// Runs seeds until kCases checks were evaluated; skipped seeds do not count.
void RunCases(const std::function<Outcome(std::uint64_t)>& check) {
  std::uint64_t evaluated = 0;
  for (std::uint64_t seed = 0; evaluated < kCases && seed < 5 * kCases; ++seed) {
    const Outcome o = check(seed);
    ASSERT_TRUE(o.ok()) << "seed " << seed << ": " << o.detail;
    evaluated += o.status == Outcome::Pass;
  }
  EXPECT_EQ(evaluated, kCases);
}

TEST(PropertyTest, GroupSwapNegatesSignedMetrics) { RunCases(check_group_swap); }
TEST(PropertyTest, ClassPermutationEquivariance) { RunCases(check_class_permutation); }
TEST(PropertyTest, SpeatAntisymmetry) { RunCases(check_speat_antisymmetry); }
TEST(PropertyTest, UniformWeightsMatchMean) { RunCases(check_uniform_weights); }
TEST(PropertyTest, GapMetricsMatchOracle) { RunCases(check_gap_oracle); }
TEST(PropertyTest, SpeatMatchesOracle) { RunCases(check_speat_oracle); }
TEST(PropertyTest, PearsonMatchesOracle) { RunCases(check_pearson_oracle); }

TEST(PropertyTest, SynthFixturesMatchOracle) {
  const auto root = std::filesystem::path(::testing::TempDir()) / "sergap_prop_fixtures";
  std::size_t passed = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Outcome o = check_synth_fixture(seed, root / std::to_string(seed));
    ASSERT_TRUE(o.ok()) << "seed " << seed << ": " << o.detail;
    passed += o.status == Outcome::Pass;
  }
  std::filesystem::remove_all(root);
  EXPECT_GE(passed, 30u);
}

}  // namespace
}  // namespace sergap::testing
