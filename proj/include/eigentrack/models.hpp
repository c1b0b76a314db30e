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

#include <memory>
#include <vector>

#include "eigentrack/bath.hpp"
#include "eigentrack/controls.hpp"
#include "eigentrack/densemath.hpp"
#include "eigentrack/frame.hpp"
#include "eigentrack/tcl.hpp"

namespace eigentrack {

// Pauli matrices. The open-qubit model uses sigma_z |0> = -|0>; the closed
// models use the usual sigma_z |up> = +|up> with |up> = (1, 0).
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

/// H(t) = J(t) [cos(pi t / 2T) sigma_z + sin(pi t / 2T) sigma_x] with
/// sigma_z = diag(-1, 1). Level 0 is |E_+> (energy -J), level 1 is |E_->.
class OpenQubitModel {
 public:
  /// rotation_fraction scales the sweep angle; 0 gives the static H = J sigma_z.
  OpenQubitModel(const ControlSignal& signal, double total_time, double rotation_fraction = 1.0);
  OpenQubitModel(std::shared_ptr<const Control> control, double total_time, double rotation_fraction = 1.0);

  double total_time() const { return total_time_; }
  double rotation_fraction() const { return rotation_fraction_; }
  const std::shared_ptr<const Control>& control() const { return control_; }

  ComplexMatrix shape(double t) const;
  ComplexMatrix hamiltonian(double t) const;  // smooth part of J only
  ComplexMatrix eigenvectors(double t) const;
  ComplexMatrix eigenvector_derivative(double t) const;
  RealVector energies(double t) const;
  RealVector level_phases(double t) const;
  FrameHooks hooks(bool analytic_derivative = true) const;

  /// Exact-master-equation dissipator in the fixed basis:
  /// -i S [sigma_z(t), .] + kappa D[sigma_-(t)].
  SuperoperatorFn dissipator(const DecayFunctions& decay) const;
  SuperoperatorFn lab_liouvillian(const DecayFunctions& decay) const;
  /// Impulse kicks exp(-i a shape(t_j)) as Liouville superoperators.
  std::vector<Kick> liouville_kicks() const;

  /// Closed (bath-free) problem tracking |E_->.
  ClosedProblem closed_problem() const;

  static constexpr int kExcitedLevel = 1;
  static constexpr int kTargetIndex = 3;  // |E_-><E_-| in Liouville order

 private:
  double angle(double t) const;  // pi t / 4T times the rotation fraction

  std::shared_ptr<const Control> control_;
  double total_time_;
  double rotation_fraction_;
};

SpectralFrame open_qubit_frame(const OpenQubitModel& model, const TimeGrid& grid);

/// Closed-form adiabatic-frame superoperators of the open-qubit model in
/// target-first order (|E_-><E_-|, |E_+><E_-|, |E_-><E_+|, |E_+><E_+|),
/// Jbar(t) = 2 * integral of J over [0, t].
ComplexMatrix open_qubit_reference_hamiltonian(const OpenQubitModel& model, double t);
ComplexMatrix open_qubit_reference_dissipator(double kappa, double shift);

/// H(t) = J(t) (cos(Omega t) sigma_x + sin(Omega t) sigma_y + (omega / 2) sigma_z).
/// The tracked state E_0 is the upper level (energy J k / 2).
class RotatingFieldQubit {
 public:
  RotatingFieldQubit(double rotation_rate, double z_field, std::shared_ptr<const Control> control);

  double rotation_rate() const { return rotation_rate_; }
  double z_field() const { return z_field_; }
  double k() const { return k_; }
  double gamma_angle() const { return gamma_angle_; }
  const std::shared_ptr<const Control>& control() const { return control_; }

  ComplexMatrix shape(double t) const;
  ComplexMatrix hamiltonian(double t) const;
  ComplexMatrix eigenvectors(double t) const;  // columns (E_1, E_0)
  ComplexMatrix eigenvector_derivative(double t) const;
  RealVector energies(double t) const;
  RealVector level_phases(double t) const;
  /// Frequency of the kernel phase besides the control term: -Omega omega / k.
  double geometric_frequency() const;
  ClosedProblem closed_problem() const;
  ComplexVector initial_state() const;

 private:
  double rotation_rate_;
  double z_field_;
  std::shared_ptr<const Control> control_;
  double k_;
  double gamma_angle_;
};

/// sigma_1^+ sigma_2^- coupled pair restricted to span{|up down>, |down up>},
/// mapped to a qubit with a = t / T, b = 0, omega / 2 = 1 - t / T.
class TwoQubitEffectiveModel {
 public:
  TwoQubitEffectiveModel(double total_time, std::shared_ptr<const Control> control, double noise_field = 0.0);

  double total_time() const { return total_time_; }
  double noise_field() const { return noise_field_; }
  const std::shared_ptr<const Control>& control() const { return control_; }

  double k(double t) const;
  double k_antiderivative(double t) const;
  double gamma_angle(double t) const;
  ComplexMatrix shape(double t) const;
  ComplexMatrix hamiltonian(double t) const;
  ComplexMatrix eigenvectors(double t) const;  // columns (E_1, E_0)
  ComplexMatrix eigenvector_derivative(double t) const;
  RealVector energies(double t) const;
  RealVector level_phases(double t) const;
  /// Integral of J k over [t1, t2], impulses weighted by k(t_j).
  double gap_phase(double t1, double t2) const;
  ClosedProblem closed_problem() const;
  ComplexVector initial_state() const;

  /// Full 4x4 pair Hamiltonian, basis |uu>, |ud>, |du>, |dd>, with
  /// B_1 = B + omega/4 and B_2 = B - omega/4.
  ComplexMatrix pair_shape(double t) const;
  ComplexMatrix pair_hamiltonian(double t) const;

 private:
  explicit TwoQubitEffectiveModel(double total_time) : total_time_(total_time), noise_field_(0.0) {}

  double total_time_;
  std::shared_ptr<const Control> control_;
  double noise_field_;
  PhaseTable gap_phase_;
};

/// Closed-form transition kernels.
cplx rotating_h11(const RotatingFieldQubit& model, double t, double t_prime);
cplx twoqubit_h11(const TwoQubitEffectiveModel& model, double t, double t_prime);
/// Control-free running integral of rotating_h11 over [0, t].
cplx rotating_h11_integral_free(const RotatingFieldQubit& model, double t);

struct AdiabaticEstimate {
  double value = 0.0;      // max over s, q of |<E_q| dH/ds |E_0>| / gap^2
  std::size_t excluded = 0;  // instants skipped for a vanishing gap
  Diagnostics diagnostics;
};

/// Uses <E_q| dH |E_0> = (E_0 - E_q) <E_q| dE_0>, which stays finite across
/// jumps in J.
AdiabaticEstimate adiabatic_condition(const SpectralFrame& frame, int target_level, double total_time,
                                      const NumericPolicy& policy = default_policy());

}  // namespace eigentrack
