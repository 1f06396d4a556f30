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

// Seeded generators for property tests. Everything draws from the portable
// synth::NoiseSource so a failing case can be replayed from its seed alone.

#include <cstdint>
#include <vector>

#include "sergap/data_model.hpp"
#include "sergap/ingestion.hpp"
#include "sergap/synth.hpp"

namespace sergap::testing {

struct RandomAudit {
  EmotionSchema schema;
  GroupPair pair;
  std::vector<UtteranceRecord> records;
  std::vector<UtteranceRecord> training;
};

// 2-8 classes with mixed valences, both groups populated, every gold
// positive of a both-valence class tagged.
RandomAudit random_audit(std::uint64_t seed);

// Soft distribution whose entries exceed 1/n exactly on `set` (|set| < n).
std::vector<double> random_distribution(const std::vector<std::size_t>& set, std::size_t n,
                                        synth::NoiseSource& rng);

StimulusEmbeddings random_stimuli(std::uint64_t seed);
StimulusEmbeddings random_stimuli(std::uint64_t seed, std::size_t layers, std::size_t dim);

// Feasible synthetic-fixture spec with exact counts and a noisy embedding
// section. Some seeds describe unachievable plans; callers skip those.
synth::SynthSpec random_synth_spec(std::uint64_t seed);

// Rearranges every distribution in `records` so new class j is old order[j].
std::vector<UtteranceRecord> permute_records(const std::vector<UtteranceRecord>& records,
                                             const std::vector<std::size_t>& order);

std::vector<std::size_t> random_permutation(std::size_t n, synth::NoiseSource& rng);

}  // namespace sergap::testing
