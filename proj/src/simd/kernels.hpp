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

#include "eigentrack/simd.hpp"

namespace eigentrack::simd::detail {

#if defined(EIGENTRACK_BUILD_AVX2)
void dot_columns_avx2(std::span<const std::complex<double>> a, const SplitColumns& b,
                      std::size_t n, double* out_re, double* out_im);
std::complex<double> trapezoid_avx2(const double* re, const double* im, std::size_t n,
                                    double dt);
#endif

}  // namespace eigentrack::simd::detail
