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

#include <string>

#include "json.hpp"

namespace sergap {

// Compact JSON with sorted object keys, no whitespace, and floating-point
// numbers printed with 9 significant digits ("%.9g"). Integers print
// verbatim. This is the byte-exact form every file writer emits.
std::string canonical_dump(const nlohmann::json& value);

// "%.9g" rendering of one double; throws ValidationError on NaN/inf.
std::string format_float(double value);

}  // namespace sergap
