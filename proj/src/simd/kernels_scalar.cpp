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

#include <stdexcept>

namespace eigentrack::simd {

void SplitColumns::resize(std::size_t len, std::size_t cols) {
  length = len;
  count = cols;
  re.assign(len * cols, 0.0);
  im.assign(len * cols, 0.0);
}

void SplitColumns::set(std::size_t l, std::size_t j, std::complex<double> v) {
  re[l * count + j] = v.real();
  im[l * count + j] = v.imag();
}

std::complex<double> SplitColumns::get(std::size_t l, std::size_t j) const {
  return {re[l * count + j], im[l * count + j]};
}

namespace reference {

void dot_columns(std::span<const std::complex<double>> a, const SplitColumns& b, std::size_t n,
                 double* out_re, double* out_im) {
  if (a.size() != b.length || n > b.count) {
    throw std::invalid_argument("dot_columns: shape mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    out_re[j] = 0.0;
    out_im[j] = 0.0;
  }
  for (std::size_t l = 0; l < b.length; ++l) {
    const double ar = a[l].real();
    const double ai = a[l].imag();
    const double* br = b.re.data() + l * b.count;
    const double* bi = b.im.data() + l * b.count;
    for (std::size_t j = 0; j < n; ++j) {
      out_re[j] += ar * br[j] - ai * bi[j];
      out_im[j] += ar * bi[j] + ai * br[j];
    }
  }
}

std::complex<double> trapezoid(const double* re, const double* im, std::size_t n, double dt) {
  if (n < 2) return {0.0, 0.0};
  double sr = 0.0, si = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sr += re[j];
    si += im[j];
  }
  sr -= 0.5 * (re[0] + re[n - 1]);
  si -= 0.5 * (im[0] + im[n - 1]);
  return {sr * dt, si * dt};
}

}  // namespace reference
}  // namespace eigentrack::simd
