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

#include "eigentrack/bath.hpp"
#include "eigentrack/models.hpp"

using namespace eigentrack;

namespace {

std::shared_ptr<const Control> rect_control(double total) {
  return std::make_shared<const Control>(ControlSignal{1.0, RectTrain{0.4, 0.1, 0.25}}, total);
}

}  // namespace

TEST_SUITE("bath") {
  TEST_CASE("exponential correlation") {
    const BathSpec b{2.0, 0.5};
    CHECK(b.correlation(0.0) == doctest::Approx(0.5));
    CHECK(b.correlation(-2.0) == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK_THROWS(BathSpec{-1.0, 0.5}.validate());
    CHECK_THROWS(BathSpec{1.0, 0.0}.validate());
    CHECK_NOTHROW(BathSpec{0.0, 0.5}.validate());
  }

  TEST_CASE("decay amplitude agrees with direct Volterra quadrature") {
    const double total = 3.0;
    auto control = rect_control(total);
    const BathSpec bath{1.0, 0.5};
    const TimeGrid g(0.0, total, 600);
    const DecayFunctions d = solve_c_plus(bath, control, g);
    const auto direct = solve_volterra(rotated_kernel(bath, control), g);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(direct[i] - d.c_tilde[i]));
    CHECK(dev < 1e-4);
    CHECK(d.c_tilde.front() == cplx(1.0));
    CHECK_FALSE(d.truncated());
  }

  TEST_CASE("segment and RK4 integration of the memory pair agree") {
    const double total = 3.0;
    auto control = rect_control(total);
    const TimeGrid g(0.0, total, 600);
    DecayOptions rk;
    rk.method = DecayMethod::rk4;
    rk.rk4_substeps = 64;
    const DecayFunctions a = solve_c_plus(BathSpec{1.0, 0.5}, control, g);
    const DecayFunctions b = solve_c_plus(BathSpec{1.0, 0.5}, control, g, rk);
    for (std::size_t i = 0; i < g.size(); i += 50) {
      CHECK(std::abs(a.c_tilde[i] - b.c_tilde[i]) < 1e-8);
      CHECK(a.kappa[i] == doctest::Approx(b.kappa[i]).epsilon(1e-6));
    }
  }

  TEST_CASE("kappa and S derive from y over c") {
    const double total = 2.0;
    const TimeGrid g(0.0, total, 400);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, rect_control(total), g);
    for (std::size_t i = 1; i < g.size(); i += 41) {
      const cplx ratio = d.memory[i] / d.c_tilde[i];
      CHECK(d.kappa[i] == doctest::Approx(2.0 * ratio.real()));
      CHECK(d.shift[i] == doctest::Approx(ratio.imag()));
      CHECK(std::abs(d.c_plus[i] - d.c_tilde[i] * std::exp(kI * d.phase[i])) < 1e-12);
    }
  }

  TEST_CASE("off-grid evaluation is consistent with the samples") {
    const double total = 2.0;
    const TimeGrid g(0.0, total, 400);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, rect_control(total), g);
    const DecaySample s = d.at(g.at(123));
    CHECK(std::abs(s.c_tilde - d.c_tilde[123]) < 1e-12);
    CHECK(s.kappa == doctest::Approx(d.kappa[123]));
    const DecaySample mid = d.at(0.5 * (g.at(10) + g.at(11)));
    CHECK(std::abs(mid.c_tilde) < std::abs(d.c_tilde[10]) + 1e-9);
  }

  TEST_CASE("kappa integral by quadrature matches the amplitude identity") {
    const double total = 4.0;
    const TimeGrid g(0.0, total, 800);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, rect_control(total), g);
    CHECK(d.kappa_integral(total) == doctest::Approx(d.kappa_integral_at_sample(g.size() - 1)).epsilon(1e-8));
    CHECK(d.kappa_integral(0.0) == doctest::Approx(0.0));
  }

  TEST_CASE("Markov limit of a fast bath decays at rate Gamma") {
    // gamma >> J: kappa -> Gamma.
    const double total = 1.0;
    auto control = std::make_shared<const Control>(ControlSignal{0.5, NoControl{}}, total);
    const TimeGrid g(0.0, total, 2000);
    const DecayFunctions d = solve_c_plus(BathSpec{0.3, 400.0}, control, g);
    CHECK(d.kappa.back() == doctest::Approx(0.3).epsilon(1e-2));
  }

  TEST_CASE("exact master equation conserves trace and tracks the decay") {
    const double total = 5.0;
    const TimeGrid g(0.0, total, 1000);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, rect_control(total), g);
    const QubitTrajectory me = exact_qubit_me(d, g);
    CHECK(me.max_trace_drift < 1e-12);
    CHECK(me.min_eigenvalue > -1e-12);
    CHECK(me.fidelity(g.size() - 1) == doctest::Approx(std::abs(d.c_tilde.back())).epsilon(1e-8));
    CHECK(me.excited.front() == 1.0);
  }

  TEST_CASE("without coupling nothing decays") {
    const double total = 2.0;
    const TimeGrid g(0.0, total, 100);
    const DecayFunctions d = solve_c_plus(BathSpec{0.0, 0.5}, rect_control(total), g);
    for (double k : d.kappa) CHECK(k == 0.0);
    CHECK(exact_qubit_me(d, g).fidelity(g.size() - 1) == doctest::Approx(1.0));
  }

  TEST_CASE("Liouville oracle keeps trace and positivity") {
    const double total = 3.0;
    auto control = rect_control(total);
    const OpenQubitModel model(control, total);
    const TimeGrid g(0.0, total, 600);
    const DecayFunctions d = solve_c_plus(BathSpec{1.0, 0.5}, control, g);
    const ComplexVector e0 = model.eigenvectors(0.0).col(OpenQubitModel::kExcitedLevel);
    OracleOptions o;
    const auto bp = control->breakpoints();
    o.breakpoints.assign(bp.begin(), bp.end());
    const DensityTrajectory lv = bruteforce_liouville(model.lab_liouvillian(d), e0 * e0.adjoint(), g, o);
    CHECK(lv.max_trace_drift < 1e-10);
    CHECK(lv.min_eigenvalue > -1e-9);
    CHECK(lv.rho.size() == g.size());
  }

  TEST_CASE("Schrodinger oracle with a kick applies it once") {
    const TimeGrid g(0.0, 1.0, 10);
    OracleOptions o;
    o.kicks.push_back({0.35, pauli_x()});
    ComplexVector psi0(2);
    psi0 << 1.0, 0.0;
    const auto psi = bruteforce_schrodinger([](double) { return ComplexMatrix(ComplexMatrix::Zero(2, 2)); }, psi0, g, o);
    CHECK(std::abs(psi[3](0)) == doctest::Approx(1.0));
    CHECK(std::abs(psi[4](1)) == doctest::Approx(1.0));
  }
}
