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

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "eigentrack/controls.hpp"
#include "eigentrack/densemath.hpp"
#include "eigentrack/frame.hpp"

namespace eigentrack {

/// Exponential correlation alpha(t, s) = (coupling * memory_rate / 2) exp(-memory_rate |t - s|).
struct BathSpec {
  double coupling = 1.0;     // Gamma
  double memory_rate = 0.5;  // gamma

  double correlation(double tau) const;
  void validate() const;
};

enum class DecayMethod { exact_segments, rk4 };

struct DecayOptions {
  DecayMethod method = DecayMethod::exact_segments;
  int rk4_substeps = 16;
};

/// State of the memory pair at one instant.
struct DecaySample {
  cplx c_tilde;
  cplx memory;
  double kappa;
  double shift;
};

/// Decay amplitude c_tilde, memory integral y = int alpha_tilde c_tilde,
/// kappa = 2 Re(y / c_tilde), S = Im(y / c_tilde) on a grid; c_+ carries the
/// control phase exp(i phi).
class DecayFunctions {
 public:
  TimeGrid grid{0.0, 1.0, 2};
  BathSpec bath;
  std::shared_ptr<const Control> control;
  std::vector<cplx> c_tilde;
  std::vector<cplx> memory;
  std::vector<cplx> c_plus;
  std::vector<double> kappa;
  std::vector<double> shift;
  std::vector<double> phase;
  std::size_t valid = 0;  // samples before any truncation
  Diagnostics diagnostics;

  bool truncated() const { return valid < grid.size(); }
  /// Exact evaluation between samples (piecewise-constant J, kicks at impulses).
  DecaySample at(double t) const;
  /// Integral of kappa over [0, t] by Gauss-Legendre panels between events.
  double kappa_integral(double t, int panels_per_interval = 2) const;
  /// Same integral from |c~(t_i)| = exp(-1/2 * integral of kappa).
  double kappa_integral_at_sample(std::size_t i) const { return -2.0 * std::log(std::abs(c_tilde[i])); }
};

DecayFunctions solve_c_plus(const BathSpec& bath, std::shared_ptr<const Control> control,
                            const TimeGrid& grid, const DecayOptions& options = {});

/// Direct quadrature of dc/dt = -int_0^t kernel(t, s) c(s) ds (trapezoid,
/// implicit in the endpoint) with one Richardson step from a doubled grid.
std::vector<cplx> solve_volterra(const std::function<cplx(double, double)>& kernel,
                                 const TimeGrid& grid);

/// alpha_tilde(t, s) = alpha(t - s) exp(-2i int_s^t J).
std::function<cplx(double, double)> rotated_kernel(const BathSpec& bath,
                                                   std::shared_ptr<const Control> control);

/// Qubit state in the instantaneous eigenbasis {|E_->, |E_+>}.
struct QubitTrajectory {
  std::vector<double> time;
  std::vector<double> excited;   // <E_-| rho |E_->
  std::vector<double> ground;    // <E_+| rho |E_+>
  std::vector<cplx> coherence;   // <E_-| rho |E_+>
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;
  Diagnostics diagnostics;

  double fidelity(std::size_t i) const;
};

struct MasterEquationOptions {
  double step_scale = 0.02;  // RK4 step times the fastest local rate
  cplx initial_coherence{0.0, 0.0};
  double initial_excited = 1.0;
};

QubitTrajectory exact_qubit_me(const DecayFunctions& decay, const TimeGrid& grid,
                               const MasterEquationOptions& options = {},
                               const NumericPolicy& policy = default_policy());

struct Kick {
  double time;
  ComplexMatrix op;  // superoperator (Liouville) or unitary (Schrodinger)
};

struct OracleOptions {
  int substeps = 1;
  std::vector<double> breakpoints;
  std::vector<Kick> kicks;  // sorted by time
};

struct DensityTrajectory {
  std::vector<double> time;
  std::vector<ComplexMatrix> rho;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;
};

/// RK4 on vec(rho) in the fixed basis.
DensityTrajectory bruteforce_liouville(const SuperoperatorFn& liouvillian, const ComplexMatrix& rho0,
                                       const TimeGrid& grid, const OracleOptions& options = {},
                                       const NumericPolicy& policy = default_policy());

/// Fourth-order Magnus stepping of i d psi/dt = H psi.
std::vector<ComplexVector> bruteforce_schrodinger(const HamiltonianFn& hamiltonian,
                                                  const ComplexVector& psi0, const TimeGrid& grid,
                                                  const OracleOptions& options = {});

}  // namespace eigentrack
