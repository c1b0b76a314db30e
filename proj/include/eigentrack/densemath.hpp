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
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eigentrack {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Tolerances shared by every module. Tests may pass a tightened copy.
struct NumericPolicy {
  double hermitian_tol = 1e-12;
  double eigen_residual_tol = 1e-10;
  double degeneracy_gap = 1e-10;
  double unit_modulus_tol = 1e-10;
  double trace_abort = 1e-6;
  double positivity_tol = 1e-9;
  double population_ceiling = 1e-9;
  double amplitude_floor = 1e-12;
  double derivative_consistency = 1e-6;
  double norm_growth_abort = 10.0;
};

const NumericPolicy& default_policy();

/// Raised for numerical preconditions that fail on otherwise valid input.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named, deduplicated diagnostic flags with a first message per flag.
struct Diagnostics {
  std::map<std::string, std::string> flags;

  void flag(const std::string& name, const std::string& message = {});
  bool has(const std::string& name) const { return flags.count(name) != 0; }
  bool empty() const { return flags.empty(); }
  void merge(const Diagnostics& other);
  /// Flag names joined by '|'.
  std::string joined() const;
};

/// Uniform grid t_i = t_start + i*dt, i = 0..M.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, std::size_t steps);

  double start() const { return start_; }
  double end() const { return end_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const { return steps_ + 1; }
  double dt() const { return dt_; }
  double at(std::size_t i) const;
  /// Largest i with t_i <= t (clamped to [0, M-1]).
  std::size_t interval_of(double t) const;

 private:
  double start_;
  double end_;
  std::size_t steps_;
  double dt_;
};

struct EigenSystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // orthonormal columns
};

double max_asymmetry(const ComplexMatrix& a);
bool all_finite(const ComplexMatrix& a);

EigenSystem herm_eigendecompose(const ComplexMatrix& a,
                                const NumericPolicy& policy = default_policy());

ComplexMatrix matrix_exp(const ComplexMatrix& a);

using Generator = std::function<ComplexMatrix(double)>;

/// Extra subdivision of each grid interval. Breakpoints are instants at
/// which the generator may jump; no midpoint is ever placed across one.
struct Stepping {
  std::vector<double> breakpoints;  // sorted ascending
  int substeps = 1;
};

/// Ordered product of midpoint step exponentials over the grid; later
/// factors multiply from the left.
ComplexMatrix time_ordered_product(const Generator& generator, const TimeGrid& grid,
                                   const Stepping& stepping = {});

/// Propagators U(t_i, t_0) for every grid point, plus inverses so that
/// U(t_i, t_j) = U(t_i, t_0) U(t_j, t_0)^{-1} is available in O(1).
class CumulativePropagator {
 public:
  CumulativePropagator() = default;
  CumulativePropagator(std::vector<ComplexMatrix> forward,
                       std::vector<ComplexMatrix> inverse);

  std::size_t size() const { return forward_.size(); }
  const ComplexMatrix& from_start(std::size_t i) const { return forward_.at(i); }
  const ComplexMatrix& to_start(std::size_t i) const { return inverse_.at(i); }
  ComplexMatrix between(std::size_t i, std::size_t j) const;

 private:
  std::vector<ComplexMatrix> forward_;
  std::vector<ComplexMatrix> inverse_;
};

/// Continuous generator stepped with midpoint exponentials.
CumulativePropagator cumulative_propagator(const Generator& generator, const TimeGrid& grid,
                                           const Stepping& stepping = {});

/// Generator known only on the grid: each step uses the endpoint average.
CumulativePropagator cumulative_propagator(std::span<const ComplexMatrix> samples,
                                           const TimeGrid& grid);

/// Fourth-order finite-difference derivative of grid samples.
std::vector<ComplexMatrix> grid_derivative(std::span<const ComplexMatrix> samples, double dt);

/// Running trapezoid integral of grid samples (value 0 at index 0).
std::vector<cplx> cumulative_trapezoid(std::span<const cplx> samples, double dt);

/// Cubic interpolation of grid samples at t_i + dt/2.
cplx midpoint_value(std::span<const cplx> samples, std::size_t i);
ComplexMatrix midpoint_value(std::span<const ComplexMatrix> samples, std::size_t i);

}  // namespace eigentrack
