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

#include "eigentrack/controls.hpp"

using namespace eigentrack;

TEST_SUITE("controls") {
  TEST_CASE("rectangular train is on at the end of each period") {
    const ControlSignal s{1.0, RectTrain{0.5, 0.25, 1.0}};
    CHECK(sample_J(s, 0.5) == 1.0);
    CHECK(sample_J(s, 0.8) == doctest::Approx(3.0));  // 1 + 0.5 / 0.25
    CHECK(sample_J(s, 1.1) == 1.0);
    CHECK(sample_J(s, 1.9) == doctest::Approx(3.0));
  }

  TEST_CASE("phase integral adds one pulse area per completed window") {
    const ControlSignal s{2.0, RectTrain{0.3, 0.1, 0.5}};
    CHECK(phase_integral(s, 0.0, 2.0) == doctest::Approx(2.0 * 2.0 + 4 * 0.3));
    CHECK(phase_integral(s, 0.0, 0.45) == doctest::Approx(0.9 + 0.3 * 0.5));
    const Control c(s, 2.0);
    CHECK(c.phase_integral(0.45, 1.45) == doctest::Approx(2.0 + 2 * 0.3));
    CHECK(c.average_J(2.0) == doctest::Approx(2.6));
  }

  TEST_CASE("breakpoints are the window edges") {
    const Control c(ControlSignal{1.0, RectTrain{1.0, 0.4, 1.0}}, 2.0);
    const auto b = c.breakpoints();
    REQUIRE(b.size() >= 3);
    CHECK(b[0] == doctest::Approx(0.6));
    CHECK(b[1] == doctest::Approx(1.0));
    CHECK(b[2] == doctest::Approx(1.6));
  }

  TEST_CASE("logistic amplitudes follow the map and stay in (0, 1)") {
    const ChaoticTrain t{1.0, 0.1, 0.2, 3.9, 0.5};
    CHECK(logistic_amplitude(t, 1) == doctest::Approx(3.9 * 0.25));
    const double l1 = logistic_amplitude(t, 1);
    CHECK(logistic_amplitude(t, 2) == doctest::Approx(3.9 * l1 * (1.0 - l1)));
    for (int n = 1; n < 200; ++n) {
      const double l = logistic_amplitude(t, n);
      CHECK(l > 0.0);
      CHECK(l < 1.0);
    }
    CHECK_THROWS(logistic_amplitude(t, 0));
  }

  TEST_CASE("impulse draws are reproducible and confined to the lit window") {
    const ImpulseNoise n{0.2, 1.0, 6, 16, 0.7, 42, 3};
    for (int w = 1; w <= 50; ++w) {
      const auto a = draw_impulses(n, w);
      const auto b = draw_impulses(n, w);
      REQUIRE(a.size() == b.size());
      CHECK(a.size() >= 6);
      CHECK(a.size() <= 16);
      for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(a[j].time == b[j].time);
        CHECK(a[j].amplitude == b[j].amplitude);
        CHECK(a[j].time >= w - 0.2);
        CHECK(a[j].time <= w);
        CHECK(a[j].amplitude > 0.0);
        if (j > 0) CHECK(a[j].time >= a[j - 1].time);
      }
    }
  }

  TEST_CASE("realizations and windows draw independent streams") {
    ImpulseNoise n{0.2, 1.0, 6, 16, 0.7, 42, 0};
    const auto a = draw_impulses(n, 1);
    n.realization = 1;
    const auto b = draw_impulses(n, 1);
    CHECK(a.front().time != b.front().time);
    n.realization = 0;
    CHECK(draw_impulses(n, 2).front().time != a.front().time);
  }

  TEST_CASE("impulse amplitudes average to the configured mean") {
    const ImpulseNoise n{0.5, 1.0, 6, 16, 2.0, 9, 0};
    double sum = 0.0;
    std::size_t count = 0;
    for (int w = 1; w <= 4000; ++w) {
      for (const auto& imp : draw_impulses(n, w)) {
        sum += imp.amplitude;
        ++count;
      }
    }
    CHECK(sum / count == doctest::Approx(2.0).epsilon(0.03));
  }

  TEST_CASE("impulses add their amplitudes to the phase") {
    const ImpulseNoise n{0.2, 0.5, 6, 16, 0.3, 1, 0};
    const Control c(ControlSignal{1.0, n}, 3.0);
    double total = 0.0;
    for (const auto& imp : c.impulses()) total += imp.amplitude;
    CHECK(c.phase(3.0) == doctest::Approx(3.0 + total));
    CHECK(c.sample_J(1.0) == 1.0);
    const auto some = c.impulses_in(0.0, 0.5);
    CHECK(some.size() == draw_impulses(n, 1).size());
  }

  TEST_CASE("weighted phase integrates a weight against J") {
    const Control c(ControlSignal{1.0, RectTrain{0.5, 0.5, 1.0}}, 2.0);
    // weight w(t) = t with antiderivative t^2 / 2.
    const PhaseTable p = c.weighted_phase([](double t) { return 0.5 * t * t; }, [](double t) { return t; });
    // int_0^2 t J dt with J = 1 + 1 on (0.5, 1) and (1.5, 2).
    const double expected = 2.0 + (0.5 * (1.0 - 0.25)) + (0.5 * (4.0 - 2.25));
    CHECK(p(2.0) == doctest::Approx(expected));
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS(validate(ControlSignal{1.0, RectTrain{0.1, 0.0, 1.0}}));
    CHECK_THROWS(validate(ControlSignal{1.0, RectTrain{0.1, 2.0, 1.0}}));
    CHECK_THROWS(validate(ControlSignal{1.0, ImpulseNoise{0.1, 1.0, 6, 4, 1.0, 0, 0}}));
    CHECK_THROWS(validate(ControlSignal{NAN, NoControl{}}));
    CHECK_NOTHROW(validate(ControlSignal{1.0, NoControl{}}));
    CHECK(variant_name(ControlSignal{1.0, ChaoticTrain{}}) == "chaotic");
    CHECK_THROWS(Control(ControlSignal{1.0, NoControl{}}, 1.0).sample_J(2.0));
  }
}
