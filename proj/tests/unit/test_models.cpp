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


#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eigentrack/models.hpp"

using namespace eigentrack;

namespace {

template <class Model>
void check_frame_hooks(const Model& m, std::initializer_list<double> times) {
  const double h = 1e-5;
  for (double t : times) {
    const ComplexMatrix v = m.eigenvectors(t);
    const RealVector e = m.energies(t);
    CHECK((m.hamiltonian(t) * v - v * e.cast<cplx>().asDiagonal()).norm() < 1e-12);
    CHECK((v.adjoint() * v - ComplexMatrix::Identity(v.cols(), v.cols())).norm() < 1e-12);
    const ComplexMatrix fd = (m.eigenvectors(t + h) - m.eigenvectors(t - h)) / (2.0 * h);
    CHECK((fd - m.eigenvector_derivative(t)).norm() < 1e-7);
    const RealVector dphase = (m.level_phases(t + h) - m.level_phases(t - h)) / (2.0 * h);
    CHECK((dphase - e).norm() < 1e-7);
  }
}

// Second-order time-local solution exp(-int_0^t int_0^s h(s, s') ds' ds) by
// direct trapezoid quadrature of a kernel.
template <class Kernel>
std::vector<cplx> local_second_order(Kernel h, const TimeGrid& g) {
  std::vector<cplx> inner(g.size(), 0.0), out(g.size(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += ((j == 0 || j == i) ? 0.5 : 1.0) * h(g.at(i), g.at(j));
    inner[i] = s * g.dt();
  }
  cplx acc = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    acc += 0.5 * g.dt() * (inner[i] + inner[i - 1]);
    out[i] = std::exp(-acc);
  }
  return out;
}

std::shared_ptr<const Control> constant(double j, double total) {
  return std::make_shared<const Control>(ControlSignal{j, NoControl{}}, total);
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("Pauli algebra") {
    CHECK((pauli_x() * pauli_y() - kI * pauli_z()).norm() < 1e-15);
    CHECK((pauli_z() * pauli_z() - ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
  }

  TEST_CASE("open qubit eigenframe hooks are consistent") {
    const OpenQubitModel m(constant(1.3, 4.0), 4.0);
    check_frame_hooks(m, {0.2, 1.7, 3.9});
    CHECK(m.energies(1.0)(0) == doctest::Approx(-1.3));
    // |E_-(0)> is the upper basis state's partner: excited level of sigma_z J.
    CHECK(std::abs(m.eigenvectors(0.0).col(OpenQubitModel::kExcitedLevel)(1)) == doctest::Approx(1.0));
  }

  TEST_CASE("zero rotation fraction freezes the eigenbasis") {
    const OpenQubitModel m(constant(1.0, 2.0), 2.0, 0.0);
    CHECK((m.eigenvectors(0.0) - m.eigenvectors(1.5)).norm() < 1e-15);
    CHECK(m.eigenvector_derivative(0.7).norm() == 0.0);
  }

  TEST_CASE("open qubit operators match the closed-form matrices") {
    const double total = 2.0;
    auto control = constant(2.0, total);
    const OpenQubitModel m(control, total);
    const TimeGrid g(0.0, total, 400);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 1.0}, control, g);
    const AdiabaticFrameOps ops = build_adiabatic_ops(open_qubit_frame(m, g), m.dissipator(d));
    const std::vector<int> order{3, 1, 2, 0};
    const Eigen::Vector4cd gauge(1.0, -1.0, -1.0, 1.0);
    for (std::size_t i : {0u, 133u, 400u}) {
      const ComplexMatrix h = gauge.asDiagonal() * permute(ops.hamiltonian[i], order) * gauge.asDiagonal();
      CHECK((h - open_qubit_reference_hamiltonian(m, g.at(i))).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((permute(ops.dissipator[i], order) - open_qubit_reference_dissipator(d.kappa[i], d.shift[i]))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("open qubit generators preserve trace") {
    const double total = 2.0;
    const ImpulseNoise noise{0.1, 0.25, 6, 16, 0.2, 3, 0};
    auto control = std::make_shared<const Control>(ControlSignal{1.0, noise}, total);
    const OpenQubitModel m(control, total);
    const TimeGrid g(0.0, total, 200);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, control, g);
    const ComplexVector one = vec(ComplexMatrix::Identity(2, 2));
    for (double t : {0.3, 1.1}) {
      CHECK((one.adjoint() * m.dissipator(d)(t)).norm() < 1e-12);
      CHECK((one.adjoint() * m.lab_liouvillian(d)(t)).norm() < 1e-12);
    }
    const auto kicks = m.liouville_kicks();
    CHECK(kicks.size() == control->impulses().size());
    CHECK((one.adjoint() * kicks.front().op - one.adjoint()).norm() < 1e-12);
  }

  TEST_CASE("rotating-field qubit frame") {
    const RotatingFieldQubit q(5.0, 5.0, constant(1.0, 10.0));
    check_frame_hooks(q, {0.0 + 0.1, 2.3, 7.7});
    CHECK(q.k() == doctest::Approx(std::sqrt(29.0)));
    CHECK((q.initial_state() - q.eigenvectors(0.0).col(1)).norm() < 1e-15);
    CHECK(q.geometric_frequency() == doctest::Approx(-25.0 / std::sqrt(29.0)));
  }

  TEST_CASE("rotating-field kernel drives the second-order closed equation") {
    auto control = std::make_shared<const Control>(ControlSignal{1.0, RectTrain{0.05, 0.05, 0.1}}, 2.0);
    const RotatingFieldQubit q(5.0, 5.0, control);
    const TimeGrid g(0.0, 2.0, 2000);
    ClosedOptions o;
    o.order = ClosedOrder::second;
    o.substeps = 2;
    const TrajectoryResult r = propagate_closed(q.closed_problem(), g, o);
    const auto direct = local_second_order([&](double t, double s) { return rotating_h11(q, t, s); }, g);
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(std::abs(r.value[i]) - std::abs(direct[i])));
    CHECK(d < 1e-5);
  }

  TEST_CASE("control-free rotating kernel integrates in closed form") {
    const RotatingFieldQubit q(3.0, 2.0, constant(1.5, 4.0));
    const double t = 3.3;
    const int n = 20000;
    cplx sum = 0.0;
    for (int k = 0; k <= n; ++k) sum += ((k == 0 || k == n) ? 0.5 : 1.0) * rotating_h11(q, t, t * k / n);
    sum *= t / n;
    CHECK(std::abs(sum - rotating_h11_integral_free(q, t)) < 1e-6);
  }

  TEST_CASE("two-qubit effective model") {
    const double total = 1.0;
    const TwoQubitEffectiveModel m(total, constant(1.0, total));
    check_frame_hooks(m, {0.1, 0.5, 0.9});
    CHECK(m.gamma_angle(0.0) == doctest::Approx(0.0));
    CHECK(m.gamma_angle(total) == doctest::Approx(std::numbers::pi / 4.0));
    const double h = 1e-6;
    for (double t : {0.2, 0.5, 0.8}) {
      CHECK((m.k_antiderivative(t + h) - m.k_antiderivative(t - h)) / (2.0 * h) == doctest::Approx(m.k(t)));
    }
    CHECK(m.gap_phase(0.0, 0.7) == doctest::Approx(m.k_antiderivative(0.7) - m.k_antiderivative(0.0)));
  }

  TEST_CASE("two-qubit pair Hamiltonian contains the effective block") {
    const double total = 1.0;
    const TwoQubitEffectiveModel m(total, constant(1.0, total), 0.0);
    for (double t : {0.2, 0.6}) {
      const ComplexMatrix block = m.pair_hamiltonian(t).block(1, 1, 2, 2);
      const RealVector e = herm_eigendecompose(block).values;
      const RealVector e_eff = m.energies(t);
      CHECK(e(1) - e(0) == doctest::Approx(e_eff(1) - e_eff(0)));
      CHECK(m.pair_hamiltonian(t).block(0, 1, 1, 2).norm() < 1e-15);
    }
  }

  TEST_CASE("two-qubit kernel drives the second-order closed equation") {
    const double total = 1.0;
    auto control = std::make_shared<const Control>(ControlSignal{1.0, RectTrain{0.01, 0.005, 0.01}}, total);
    const TwoQubitEffectiveModel m(total, control);
    const TimeGrid g(0.0, total, 1600);
    ClosedOptions o;
    o.order = ClosedOrder::second;
    o.substeps = 2;
    const TrajectoryResult r = propagate_closed(m.closed_problem(), g, o);
    const auto direct = local_second_order([&](double t, double s) { return twoqubit_h11(m, t, s); }, g);
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(std::abs(r.value[i]) - std::abs(direct[i])));
    CHECK(d < 1e-5);
  }

  TEST_CASE("adiabatic condition of a uniformly turning field") {
    const double total = 3.0;
    const OpenQubitModel m(constant(1.0, total), total);
    const TimeGrid g(0.0, total, 300);
    const AdiabaticEstimate est = adiabatic_condition(open_qubit_frame(m, g), OpenQubitModel::kExcitedLevel, total);
    // |<E_+|d E_-/dt>| = pi / (4 T), gap 2 J.
    CHECK(est.value == doctest::Approx(std::numbers::pi / 8.0));
    CHECK(est.excluded == 0);
  }

  TEST_CASE("adiabatic condition skips a vanishing gap") {
    const double total = 2.0;
    const OpenQubitModel m(constant(0.0, total), total);
    const TimeGrid g(0.0, total, 20);
    const AdiabaticEstimate est = adiabatic_condition(open_qubit_frame(m, g), OpenQubitModel::kExcitedLevel, total);
    CHECK(est.excluded == g.size());
    CHECK(est.diagnostics.has("gap_vanishes"));
  }
}
