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

#pragma once

// Seeded property checks shared by the unit suite and the acceptance
// binary. Each returns an Outcome whose detail names the first violated
// relation.

#include <cstdint>
#include <filesystem>
#include <string>

namespace sergap::testing {

struct Outcome {
  enum Status { Pass, Fail, Skip } status = Pass;
  std::string detail;

  static Outcome fail(std::string why) { return {Fail, std::move(why)}; }
  static Outcome skip(std::string why) { return {Skip, std::move(why)}; }
  bool ok() const { return status != Fail; }
};

// Group swap negates d_e, d_v, d_d and keeps d_c.
Outcome check_group_swap(std::uint64_t seed);
// Permuting the class order permutes d_e and d_d and keeps d_c, d_v.
Outcome check_class_permutation(std::uint64_t seed);
// Swapping X with Y, or A with B, negates d_s.
Outcome check_speat_antisymmetry(std::uint64_t seed);
// Weighted aggregation with uniform weights reproduces Mean aggregation.
Outcome check_uniform_weights(std::uint64_t seed);
// Optimized metrics against the straight-line oracle on random records.
Outcome check_gap_oracle(std::uint64_t seed);
Outcome check_speat_oracle(std::uint64_t seed);
Outcome check_pearson_oracle(std::uint64_t seed);
// Writes a random synthetic fixture under `dir`, reloads it from disk and
// compares every metric with the fixture's expected values. Skips specs the
// generator rejects as unachievable.
Outcome check_synth_fixture(std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace sergap::testing
