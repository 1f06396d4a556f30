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

#include "sergap/error.hpp"

namespace sergap {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyAnnotation: return "EmptyAnnotation";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::GroupEmpty: return "GroupEmpty";
    case ErrorKind::MetricUndefined: return "MetricUndefined";
    case ErrorKind::MissingValenceTags: return "MissingValenceTags";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DegenerateAssociations: return "DegenerateAssociations";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::SpecError: return "SpecError";
    case ErrorKind::NothingToRender: return "NothingToRender";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UsageError:
      return 2;
    case ErrorKind::GroupEmpty:
    case ErrorKind::MetricUndefined:
    case ErrorKind::DegenerateWeights:
    case ErrorKind::DegenerateAssociations:
    case ErrorKind::DegenerateSeries:
    case ErrorKind::NothingToRender:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace sergap
