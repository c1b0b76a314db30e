// Copyright 2026 The eigentrack Authors
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
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels.hpp"

namespace eigentrack::simd {

namespace {

bool cpu_has_avx2() {
#if defined(EIGENTRACK_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const char* env = std::getenv("EIGENTRACK_ISA");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool avx2_supported() {
  static const bool ok = cpu_has_avx2();
  return ok;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported()) {
    throw std::invalid_argument("set_isa: AVX2 kernels unavailable on this build or CPU");
  }
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void dot_columns(std::span<const std::complex<double>> a, const SplitColumns& b, std::size_t n,
                 double* out_re, double* out_im) {
#if defined(EIGENTRACK_BUILD_AVX2)
  if (active_isa() == Isa::avx2) {
    detail::dot_columns_avx2(a, b, n, out_re, out_im);
    return;
  }
#endif
  reference::dot_columns(a, b, n, out_re, out_im);
}

std::complex<double> trapezoid(const double* re, const double* im, std::size_t n, double dt) {
#if defined(EIGENTRACK_BUILD_AVX2)
  if (active_isa() == Isa::avx2) return detail::trapezoid_avx2(re, im, n, dt);
#endif
  return reference::trapezoid(re, im, n, dt);
}

}  // namespace eigentrack::simd
