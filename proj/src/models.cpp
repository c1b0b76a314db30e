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

#include "eigentrack/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace eigentrack {

using std::numbers::pi;

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

namespace {

ComplexMatrix qubit_columns(cplx a0, cplx a1, cplx b0, cplx b1) {
  ComplexMatrix m(2, 2);
  m << a0, b0, a1, b1;
  return m;
}

std::vector<double> breakpoint_list(const Control& control) {
  const auto bp = control.breakpoints();
  return {bp.begin(), bp.end()};
}

std::vector<std::pair<double, double>> kick_list(const Control& control) {
  std::vector<std::pair<double, double>> out;
  for (const Impulse& imp : control.impulses()) out.emplace_back(imp.time, imp.amplitude);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Open qubit

OpenQubitModel::OpenQubitModel(const ControlSignal& signal, double total_time, double rotation_fraction)
    : OpenQubitModel(std::make_shared<const Control>(signal, total_time), total_time, rotation_fraction) {}

OpenQubitModel::OpenQubitModel(std::shared_ptr<const Control> control, double total_time,
                               double rotation_fraction)
    : control_(std::move(control)), total_time_(total_time), rotation_fraction_(rotation_fraction) {
  if (!(total_time_ > 0.0)) throw std::invalid_argument("OpenQubitModel: total time must be positive");
  if (!control_) throw std::invalid_argument("OpenQubitModel: null control");
}

double OpenQubitModel::angle(double t) const { return rotation_fraction_ * pi * t / (4.0 * total_time_); }

ComplexMatrix OpenQubitModel::shape(double t) const {
  const double a = 2.0 * angle(t);
  ComplexMatrix m(2, 2);
  m << -std::cos(a), std::sin(a), std::sin(a), std::cos(a);
  return m;
}

ComplexMatrix OpenQubitModel::hamiltonian(double t) const { return control_->sample_J(t) * shape(t); }

ComplexMatrix OpenQubitModel::eigenvectors(double t) const {
  const double th = angle(t);
  const double c = std::cos(th), s = std::sin(th);
  return qubit_columns(c, -s, s, c);
}

ComplexMatrix OpenQubitModel::eigenvector_derivative(double t) const {
  const double rate = rotation_fraction_ * pi / (4.0 * total_time_);
  const double th = angle(t);
  const double c = std::cos(th), s = std::sin(th);
  return rate * qubit_columns(-s, -c, c, -s);
}

RealVector OpenQubitModel::energies(double t) const {
  const double j = control_->sample_J(t);
  RealVector e(2);
  e << -j, j;
  return e;
}

RealVector OpenQubitModel::level_phases(double t) const {
  const double phi = control_->phase(t);
  RealVector p(2);
  p << -phi, phi;
  return p;
}

FrameHooks OpenQubitModel::hooks(bool analytic_derivative) const {
  auto self = std::make_shared<const OpenQubitModel>(*this);
  FrameHooks h;
  h.eigenvectors = [self](double t) { return self->eigenvectors(t); };
  if (analytic_derivative) h.eigenvector_derivative = [self](double t) { return self->eigenvector_derivative(t); };
  h.energies = [self](double t) { return self->energies(t); };
  h.level_phases = [self](double t) { return self->level_phases(t); };
  return h;
}

SuperoperatorFn OpenQubitModel::dissipator(const DecayFunctions& decay) const {
  auto d = std::make_shared<const DecayFunctions>(decay);
  auto self = std::make_shared<const OpenQubitModel>(*this);
  return [d, self](double t) -> ComplexMatrix {
    const ComplexMatrix v = self->eigenvectors(t);
    const ComplexVector ep = v.col(0), em = v.col(1);
    const ComplexMatrix sz = em * em.adjoint() - ep * ep.adjoint();
    const ComplexMatrix lower = ep * em.adjoint();
    const DecaySample q = d->at(t);
    return -kI * q.shift * commutator_superop(sz) + q.kappa * lindblad_superop(lower);
  };
}

SuperoperatorFn OpenQubitModel::lab_liouvillian(const DecayFunctions& decay) const {
  const SuperoperatorFn diss = dissipator(decay);
  auto self = std::make_shared<const OpenQubitModel>(*this);
  return [diss, self](double t) -> ComplexMatrix {
    return -kI * commutator_superop(self->hamiltonian(t)) + diss(t);
  };
}

std::vector<Kick> OpenQubitModel::liouville_kicks() const {
  std::vector<Kick> out;
  for (const Impulse& imp : control_->impulses()) {
    const ComplexMatrix u = matrix_exp((-kI * imp.amplitude) * shape(imp.time));
    out.push_back({imp.time, Eigen::kroneckerProduct(u.conjugate(), u).eval()});
  }
  return out;
}

ClosedProblem OpenQubitModel::closed_problem() const {
  auto self = std::make_shared<const OpenQubitModel>(*this);
  ClosedProblem p;
  p.hamiltonian = [self](double t) { return self->hamiltonian(t); };
  p.shape = [self](double t) { return self->shape(t); };
  p.hooks = self->hooks(true);
  p.target_level = kExcitedLevel;
  p.breakpoints = breakpoint_list(*control_);
  p.kicks = kick_list(*control_);
  return p;
}

SpectralFrame open_qubit_frame(const OpenQubitModel& model, const TimeGrid& grid) {
  return build_spectral_frame([&model](double t) { return model.hamiltonian(t); }, grid, model.hooks(true));
}

ComplexMatrix open_qubit_reference_hamiltonian(const OpenQubitModel& model, double t) {
  const double jbar = 2.0 * model.control()->phase(t);
  const cplx p = std::exp(kI * jbar), m = std::exp(-kI * jbar);
  ComplexMatrix h(4, 4);
  h << 0.0, -kI * p, -kI * m, 0.0,
       kI * m, 0.0, 0.0, -kI * m,
       kI * p, 0.0, 0.0, -kI * p,
       0.0, kI * p, kI * m, 0.0;
  return (model.rotation_fraction() * pi / (4.0 * model.total_time())) * h;
}

ComplexMatrix open_qubit_reference_dissipator(double kappa, double shift) {
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d(0, 0) = -kappa;
  d(1, 1) = 2.0 * kI * shift - kappa / 2.0;
  d(2, 2) = -2.0 * kI * shift - kappa / 2.0;
  d(3, 0) = kappa;
  return d;
}

// ---------------------------------------------------------------------------
// Rotating-field qubit

RotatingFieldQubit::RotatingFieldQubit(double rotation_rate, double z_field,
                                       std::shared_ptr<const Control> control)
    : rotation_rate_(rotation_rate), z_field_(z_field), control_(std::move(control)) {
  if (!control_) throw std::invalid_argument("RotatingFieldQubit: null control");
  k_ = std::sqrt(z_field_ * z_field_ + 4.0);
  gamma_angle_ = 0.5 * std::atan2(2.0, z_field_);
}

ComplexMatrix RotatingFieldQubit::shape(double t) const {
  const double b = rotation_rate_ * t;
  return std::cos(b) * pauli_x() + std::sin(b) * pauli_y() + (z_field_ / 2.0) * pauli_z();
}

ComplexMatrix RotatingFieldQubit::hamiltonian(double t) const { return control_->sample_J(t) * shape(t); }

ComplexMatrix RotatingFieldQubit::eigenvectors(double t) const {
  const cplx ph = std::exp(-kI * (rotation_rate_ * t));
  const double c = std::cos(gamma_angle_), s = std::sin(gamma_angle_);
  return qubit_columns(-ph * s, c, ph * c, s);
}

ComplexMatrix RotatingFieldQubit::eigenvector_derivative(double t) const {
  const cplx ph = -kI * rotation_rate_ * std::exp(-kI * (rotation_rate_ * t));
  const double c = std::cos(gamma_angle_), s = std::sin(gamma_angle_);
  return qubit_columns(-ph * s, 0.0, ph * c, 0.0);
}

RealVector RotatingFieldQubit::energies(double t) const {
  const double e = 0.5 * k_ * control_->sample_J(t);
  RealVector v(2);
  v << -e, e;
  return v;
}

RealVector RotatingFieldQubit::level_phases(double t) const {
  const double p = 0.5 * k_ * control_->phase(t);
  RealVector v(2);
  v << -p, p;
  return v;
}

double RotatingFieldQubit::geometric_frequency() const { return -rotation_rate_ * z_field_ / k_; }

ClosedProblem RotatingFieldQubit::closed_problem() const {
  auto self = std::make_shared<const RotatingFieldQubit>(*this);
  ClosedProblem p;
  p.hamiltonian = [self](double t) { return self->hamiltonian(t); };
  p.shape = [self](double t) { return self->shape(t); };
  p.hooks.eigenvectors = [self](double t) { return self->eigenvectors(t); };
  p.hooks.eigenvector_derivative = [self](double t) { return self->eigenvector_derivative(t); };
  p.hooks.energies = [self](double t) { return self->energies(t); };
  p.hooks.level_phases = [self](double t) { return self->level_phases(t); };
  p.target_level = 1;
  p.breakpoints = breakpoint_list(*control_);
  p.kicks = kick_list(*control_);
  return p;
}

ComplexVector RotatingFieldQubit::initial_state() const { return eigenvectors(0.0).col(1); }

cplx rotating_h11(const RotatingFieldQubit& model, double t, double t_prime) {
  const double k = model.k();
  const double om = model.rotation_rate();
  const double phase = k * model.control()->phase_integral(t_prime, t) + model.geometric_frequency() * (t - t_prime);
  return (om * om / (k * k)) * std::exp(kI * phase);
}

cplx rotating_h11_integral_free(const RotatingFieldQubit& model, double t) {
  const double k = model.k();
  const double om = model.rotation_rate();
  const double nu = k * model.control()->signal().baseline + model.geometric_frequency();
  return kI * om * om * (1.0 - std::exp(kI * (nu * t))) / (k * k * nu);
}

// ---------------------------------------------------------------------------
// Two-qubit effective model

TwoQubitEffectiveModel::TwoQubitEffectiveModel(double total_time, std::shared_ptr<const Control> control,
                                               double noise_field)
    : total_time_(total_time), control_(std::move(control)), noise_field_(noise_field) {
  if (!(total_time_ > 0.0)) throw std::invalid_argument("TwoQubitEffectiveModel: total time must be positive");
  if (!control_) throw std::invalid_argument("TwoQubitEffectiveModel: null control");
  // The table outlives any particular copy of the model, so capture by value.
  const TwoQubitEffectiveModel shape_only(total_time_);
  gap_phase_ = control_->weighted_phase([shape_only](double t) { return shape_only.k_antiderivative(t); },
                                        [shape_only](double t) { return shape_only.k(t); });
}

double TwoQubitEffectiveModel::k(double t) const {
  const double T = total_time_;
  return 2.0 * std::sqrt(T * T - 2.0 * t * T + 2.0 * t * t) / T;
}

double TwoQubitEffectiveModel::k_antiderivative(double t) const {
  // k = (2 sqrt 2 / T) sqrt(u^2 + c^2), u = t - T/2, c = T/2.
  const double c = total_time_ / 2.0;
  const double u = t - c;
  const double r = std::sqrt(u * u + c * c);
  return (std::sqrt(2.0) / total_time_) * (u * r + c * c * std::asinh(u / c));
}

double TwoQubitEffectiveModel::gamma_angle(double t) const { return 0.5 * std::atan2(t, total_time_ - t); }

ComplexMatrix TwoQubitEffectiveModel::shape(double t) const {
  const double a = t / total_time_;
  return a * pauli_x() + (1.0 - a) * pauli_z();
}

ComplexMatrix TwoQubitEffectiveModel::hamiltonian(double t) const { return control_->sample_J(t) * shape(t); }

ComplexMatrix TwoQubitEffectiveModel::eigenvectors(double t) const {
  const double g = gamma_angle(t);
  const double c = std::cos(g), s = std::sin(g);
  return qubit_columns(-s, c, c, s);
}

ComplexMatrix TwoQubitEffectiveModel::eigenvector_derivative(double t) const {
  const double kk = k(t);
  const double rate = 2.0 / (total_time_ * kk * kk);
  const double g = gamma_angle(t);
  const double c = std::cos(g), s = std::sin(g);
  return rate * qubit_columns(-c, -s, -s, c);
}

RealVector TwoQubitEffectiveModel::energies(double t) const {
  const double e = 0.5 * control_->sample_J(t) * k(t);
  RealVector v(2);
  v << -e, e;
  return v;
}

RealVector TwoQubitEffectiveModel::level_phases(double t) const {
  const double p = 0.5 * gap_phase_(t);
  RealVector v(2);
  v << -p, p;
  return v;
}

double TwoQubitEffectiveModel::gap_phase(double t1, double t2) const { return gap_phase_.between(t1, t2); }

ClosedProblem TwoQubitEffectiveModel::closed_problem() const {
  auto self = std::make_shared<const TwoQubitEffectiveModel>(*this);
  ClosedProblem p;
  p.hamiltonian = [self](double t) { return self->hamiltonian(t); };
  p.shape = [self](double t) { return self->shape(t); };
  p.hooks.eigenvectors = [self](double t) { return self->eigenvectors(t); };
  p.hooks.eigenvector_derivative = [self](double t) { return self->eigenvector_derivative(t); };
  p.hooks.energies = [self](double t) { return self->energies(t); };
  p.hooks.level_phases = [self](double t) { return self->level_phases(t); };
  p.target_level = 1;
  p.breakpoints = breakpoint_list(*control_);
  p.kicks = kick_list(*control_);
  return p;
}

ComplexVector TwoQubitEffectiveModel::initial_state() const { return eigenvectors(0.0).col(1); }

ComplexMatrix TwoQubitEffectiveModel::pair_shape(double t) const {
  const double a = t / total_time_;
  const double omega = 2.0 * (1.0 - a);
  const double b1 = noise_field_ + omega / 4.0, b2 = noise_field_ - omega / 4.0;
  // Basis order |uu>, |ud>, |du>, |dd>.
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  h(0, 0) = b1 + b2;
  h(1, 1) = b1 - b2;
  h(2, 2) = -b1 + b2;
  h(3, 3) = -b1 - b2;
  h(1, 2) = a;  // d = a - i b with b = 0
  h(2, 1) = a;
  return h;
}

ComplexMatrix TwoQubitEffectiveModel::pair_hamiltonian(double t) const {
  return control_->sample_J(t) * pair_shape(t);
}

cplx twoqubit_h11(const TwoQubitEffectiveModel& model, double t, double t_prime) {
  const double T = model.total_time();
  const double k1 = model.k(t), k2 = model.k(t_prime);
  return 4.0 / (T * T * k1 * k1 * k2 * k2) * std::exp(kI * model.gap_phase(t_prime, t));
}

// ---------------------------------------------------------------------------

AdiabaticEstimate adiabatic_condition(const SpectralFrame& frame, int target_level, double total_time,
                                      const NumericPolicy& policy) {
  AdiabaticEstimate est;
  const std::size_t n = frame.grid.size();
  std::vector<ComplexMatrix> deriv;
  if (frame.hooks.eigenvector_derivative) {
    for (std::size_t i = 0; i < n; ++i) deriv.push_back(frame.hooks.eigenvector_derivative(frame.grid.at(i)));
  } else {
    deriv = grid_derivative(frame.vectors, frame.grid.dt());
  }
  double worst_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexVector dv = deriv[i].col(target_level);
    for (int q = 0; q < frame.levels; ++q) {
      if (q == target_level) continue;
      const double gap = std::abs(frame.energies[i](target_level) - frame.energies[i](q));
      if (gap < policy.degeneracy_gap) {
        ++est.excluded;
        continue;
      }
      const double v = total_time * std::abs(frame.vectors[i].col(q).dot(dv)) / gap;
      if (v > est.value) {
        est.value = v;
        worst_t = frame.grid.at(i);
      }
    }
  }
  if (est.excluded > 0) {
    std::ostringstream msg;
    msg << est.excluded << " instants skipped for a vanishing gap";
    est.diagnostics.flag("gap_vanishes", msg.str());
  }
  std::ostringstream at;
  at << worst_t;
  est.diagnostics.flag("adiabatic_max_at", at.str());
  return est;
}

}  // namespace eigentrack
