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

#include <atomic>
#include <string>

#include "sergap/error.hpp"
#include "sergap/kernels.hpp"

namespace sergap::kernels {
namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

constexpr Table kScalar{Isa::Scalar, scalar::dot, scalar::squared_norm, scalar::axpy,
                        scalar::scale, scalar::sum};
#if defined(SERGAP_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2, avx2::dot, avx2::squared_norm, avx2::axpy, avx2::scale,
                      avx2::sum};
#endif
#if defined(SERGAP_HAVE_NEON)
constexpr Table kNeon{Isa::Neon, neon::dot, neon::squared_norm, neon::axpy, neon::scale,
                      neon::sum};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(SERGAP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(SERGAP_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &kScalar;
#if defined(SERGAP_HAVE_AVX2)
    case Isa::Avx2:
      return &kAvx2;
#endif
#if defined(SERGAP_HAVE_NEON)
    case Isa::Neon:
      return &kNeon;
#endif
    default:
      return &kScalar;
  }
}

const Table* detect() {
  if (cpu_supports(Isa::Avx2)) return table_for(Isa::Avx2);
  if (cpu_supports(Isa::Neon)) return table_for(Isa::Neon);
  return &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{detect()};
  return table;
}

const Table& active() { return *current().load(std::memory_order_acquire); }

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    raise(ErrorKind::SchemaMismatch,
          "vector length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

Isa active_isa() noexcept { return active().isa; }

bool set_isa(std::optional<Isa> isa) {
  if (!isa) {
    current().store(detect(), std::memory_order_release);
    return true;
  }
  if (!cpu_supports(*isa)) return false;
  current().store(table_for(*isa), std::memory_order_release);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_length(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) {
  return active().squared_norm(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_length(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> y) { active().scale(alpha, y.data(), y.size()); }

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace sergap::kernels
