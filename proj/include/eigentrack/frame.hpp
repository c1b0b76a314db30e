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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eigentrack/densemath.hpp"

namespace eigentrack {

using HamiltonianFn = std::function<ComplexMatrix(double)>;
using SuperoperatorFn = std::function<ComplexMatrix(double)>;

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index n);
/// Superoperator of X -> H X - X H.
ComplexMatrix commutator_superop(const ComplexMatrix& h);
/// Superoperator of X -> L X L^dagger - {L^dagger L, X} / 2.
ComplexMatrix lindblad_superop(const ComplexMatrix& l);

/// Analytic replacements for numerical steps of the frame construction.
struct FrameHooks {
  std::function<ComplexMatrix(double)> eigenvectors;           // columns ascending in energy
  std::function<ComplexMatrix(double)> eigenvector_derivative;  // time derivative of the above
  std::function<RealVector(double)> energies;
  std::function<RealVector(double)> level_phases;  // integral of E_n from 0 to t
};

/// Instantaneous eigen-system of H(t) on a grid. Eigenoperator k is
/// |E_n><E_m| with k = m + n N and Bohr frequency E_n - E_m.
struct SpectralFrame {
  TimeGrid grid{0.0, 1.0, 2};
  int levels = 0;
  std::vector<RealVector> energies;
  std::vector<ComplexMatrix> vectors;
  std::vector<RealVector> level_phase;
  std::vector<std::vector<bool>> degenerate_level;  // [instant][level]
  std::vector<bool> degenerate;                     // any level at the instant
  double min_gap = 0.0;
  FrameHooks hooks;

  int liouville_dim() const { return levels * levels; }
  static int super_index(int m, int n, int levels) { return m + n * levels; }
  double bohr(int k, std::size_t i) const;
  double dynamical_phase(int k, std::size_t i) const;
  ComplexMatrix eigenoperator(int k, std::size_t i) const;
  bool level_degenerate_anywhere(int level) const;
};

SpectralFrame build_spectral_frame(const HamiltonianFn& hamiltonian, const TimeGrid& grid,
                                   const FrameHooks& hooks = {},
                                   const NumericPolicy& policy = default_policy());

enum class FrameSpace { liouville, hilbert };

/// Generators of the coefficient dynamics in the adiabatic frame:
/// dr/dt = (-i H^a + D^a) r.
struct AdiabaticFrameOps {
  TimeGrid grid{0.0, 1.0, 2};
  FrameSpace space = FrameSpace::liouville;
  int levels = 0;
  std::vector<ComplexMatrix> hamiltonian;  // H^a(t_i), Hermitian
  std::vector<ComplexMatrix> dissipator;   // D^a(t_i)
  /// Off-grid evaluation, present when the frame carries analytic hooks.
  std::function<std::pair<ComplexMatrix, ComplexMatrix>(double)> evaluate;
  std::vector<double> breakpoints;  // instants where evaluate may jump
  double derivative_defect = 0.0;   // max |A + A^dagger| before projection
  double max_hermitian_defect = 0.0;

  Eigen::Index dim() const { return hamiltonian.empty() ? 0 : hamiltonian.front().rows(); }
};

/// Liouville-space operators. `dissipator` may be empty (closed dynamics).
AdiabaticFrameOps build_adiabatic_ops(const SpectralFrame& frame, const SuperoperatorFn& dissipator,
                                      const NumericPolicy& policy = default_policy());

/// Hilbert-space version for closed systems: dc/dt = -i H^a c.
AdiabaticFrameOps build_closed_adiabatic_ops(const SpectralFrame& frame,
                                             const NumericPolicy& policy = default_policy());

/// rho(t_i) = sum_k r_k exp(-i Theta_k) Phi_k.
ComplexMatrix reconstruct_density(const SpectralFrame& frame, std::size_t i, const ComplexVector& r);
/// Inverse map of reconstruct_density.
ComplexVector frame_coefficients(const SpectralFrame& frame, std::size_t i, const ComplexMatrix& rho);

}  // namespace eigentrack
