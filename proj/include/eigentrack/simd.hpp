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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eigentrack::simd {

enum class Isa { scalar, avx2 };

/// True when the AVX2 kernels were compiled in and the CPU reports AVX2+FMA.
bool avx2_supported();

/// Kernel set currently used by the dispatching entry points. Defaults to
/// the best supported set; EIGENTRACK_ISA=scalar in the environment forces
/// the reference kernels.
Isa active_isa();
void set_isa(Isa isa);
const char* isa_name(Isa isa);

/// Split-complex column block: element (l, j) of `count` columns of length
/// `length`, stored at index l * count + j.
struct SplitColumns {
  std::size_t length = 0;
  std::size_t count = 0;
  std::vector<double> re;
  std::vector<double> im;

  void resize(std::size_t len, std::size_t cols);
  void set(std::size_t l, std::size_t j, std::complex<double> v);
  std::complex<double> get(std::size_t l, std::size_t j) const;
};

/// out[j] = sum_l a[l] * b(l, j) for j < n, written as split re/im arrays.
void dot_columns(std::span<const std::complex<double>> a, const SplitColumns& b, std::size_t n,
                 double* out_re, double* out_im);

/// Trapezoid rule over uniformly spaced split samples v[0..n-1].
std::complex<double> trapezoid(const double* re, const double* im, std::size_t n, double dt);

namespace reference {
void dot_columns(std::span<const std::complex<double>> a, const SplitColumns& b, std::size_t n,
                 double* out_re, double* out_im);
std::complex<double> trapezoid(const double* re, const double* im, std::size_t n, double dt);
}  // namespace reference

}  // namespace eigentrack::simd
