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

#include "kernels.hpp"

#include <immintrin.h>

#include <stdexcept>

namespace eigentrack::simd::detail {

void dot_columns_avx2(std::span<const std::complex<double>> a, const SplitColumns& b,
                      std::size_t n, double* out_re, double* out_im) {
  if (a.size() != b.length || n > b.count) {
    throw std::invalid_argument("dot_columns: shape mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    out_re[j] = 0.0;
    out_im[j] = 0.0;
  }
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t l = 0; l < b.length; ++l) {
    const double ar = a[l].real();
    const double ai = a[l].imag();
    const __m256d var = _mm256_set1_pd(ar);
    const __m256d vai = _mm256_set1_pd(ai);
    const double* br = b.re.data() + l * b.count;
    const double* bi = b.im.data() + l * b.count;
    std::size_t j = 0;
    for (; j < n4; j += 4) {
      const __m256d xr = _mm256_loadu_pd(br + j);
      const __m256d xi = _mm256_loadu_pd(bi + j);
      __m256d orr = _mm256_loadu_pd(out_re + j);
      __m256d oii = _mm256_loadu_pd(out_im + j);
      orr = _mm256_fmadd_pd(var, xr, orr);
      orr = _mm256_fnmadd_pd(vai, xi, orr);
      oii = _mm256_fmadd_pd(var, xi, oii);
      oii = _mm256_fmadd_pd(vai, xr, oii);
      _mm256_storeu_pd(out_re + j, orr);
      _mm256_storeu_pd(out_im + j, oii);
    }
    for (; j < n; ++j) {
      out_re[j] += ar * br[j] - ai * bi[j];
      out_im[j] += ar * bi[j] + ai * br[j];
    }
  }
}

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

std::complex<double> trapezoid_avx2(const double* re, const double* im, std::size_t n,
                                    double dt) {
  if (n < 2) return {0.0, 0.0};
  __m256d accr = _mm256_setzero_pd();
  __m256d acci = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t j = 0;
  for (; j < n4; j += 4) {
    accr = _mm256_add_pd(accr, _mm256_loadu_pd(re + j));
    acci = _mm256_add_pd(acci, _mm256_loadu_pd(im + j));
  }
  double sr = hsum(accr), si = hsum(acci);
  for (; j < n; ++j) {
    sr += re[j];
    si += im[j];
  }
  sr -= 0.5 * (re[0] + re[n - 1]);
  si -= 0.5 * (im[0] + im[n - 1]);
  return {sr * dt, si * dt};
}

}  // namespace eigentrack::simd::detail
