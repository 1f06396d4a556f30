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

// Dense double-precision vector kernels used by the embedding and statistics
// code. Every kernel has a scalar reference implementation; vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64) are selected once at runtime
// from the host CPU and can be pinned with set_isa() for equivalence testing.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sergap::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

// Variants compiled into this binary and runnable on this CPU.
std::vector<Isa> available_isas();

Isa active_isa() noexcept;

// Pins the dispatch table to `isa`; std::nullopt restores autodetection.
// Returns false (and leaves dispatch unchanged) when `isa` is unavailable.
bool set_isa(std::optional<Isa> isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y *= alpha
void scale(double alpha, std::span<double> y);
double sum(std::span<const double> a);

// Per-ISA entry points. Lengths are assumed equal; the dispatching wrappers
// above check them.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace scalar

#if defined(SERGAP_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace avx2
#endif

#if defined(SERGAP_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace neon
#endif

}  // namespace sergap::kernels
