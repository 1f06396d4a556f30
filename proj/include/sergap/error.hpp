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

#include <stdexcept>
#include <string>
#include <string_view>

namespace sergap {

enum class ErrorKind {
  EmptyAnnotation,
  SchemaMismatch,
  ManifestError,
  ValidationError,
  GroupEmpty,
  MetricUndefined,
  MissingValenceTags,
  DegenerateWeights,
  ZeroVector,
  DegenerateAssociations,
  DegenerateSeries,
  SpecError,
  NothingToRender,
  UsageError,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

// Process exit code for the CLI: 2 usage, 3 validation, 4 undefined/degenerate.
int exit_code_for(ErrorKind kind) noexcept;

// All toolkit failures surface as this one exception type; callers switch on
// kind() rather than on a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace sergap
