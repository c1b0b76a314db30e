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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace eigentrack {

// Pulse windows n = 1, 2, ... are active on (n*period - duration, n*period).

struct NoControl {};

struct RectTrain {
  double area = 0.0;      // pulse area Psi
  double duration = 0.0;  // Delta
  double period = 0.0;    // chi
};

struct ChaoticTrain {
  double area = 0.0;
  double duration = 0.0;
  double period = 0.0;
  double mu = 3.9;
  double seed_value = 0.5;  // L_0
};

struct ImpulseNoise {
  double duration = 0.0;
  double period = 0.0;
  int k_min = 6;
  int k_max = 16;
  double mean_amplitude = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
};

using ControlVariant = std::variant<NoControl, RectTrain, ChaoticTrain, ImpulseNoise>;

/// J(t) = baseline + Omega(t).
struct ControlSignal {
  double baseline = 1.0;
  ControlVariant variant = NoControl{};
};

struct Impulse {
  double time;
  double amplitude;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ControlSignal& signal);

std::string variant_name(const ControlSignal& signal);

/// Logistic amplitude L_n for window n >= 1.
double logistic_amplitude(const ChaoticTrain& train, std::int64_t window);

/// Impulses of window n >= 1, a pure function of (seed, realization, n).
std::vector<Impulse> draw_impulses(const ImpulseNoise& noise, std::int64_t window);

/// Piecewise-exact cumulative integral of weight(x) * J(x) where the smooth
/// part of J is piecewise constant; `antiderivative` is a primitive of the
/// weight. Impulses contribute amplitude * weight(t_j).
class PhaseTable {
 public:
  double operator()(double t) const;
  double between(double t1, double t2) const { return (*this)(t2) - (*this)(t1); }

 private:
  friend class Control;
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> knot_cumulative_;
  std::vector<double> impulse_times_;
  std::vector<double> impulse_prefix_;
  std::function<double(double)> antiderivative_;
};

/// A control signal realized on [0, horizon].
class Control {
 public:
  Control(const ControlSignal& signal, double horizon);

  const ControlSignal& signal() const { return signal_; }
  double horizon() const { return horizon_; }

  /// Smooth part of J(t); impulses are never evaluated pointwise.
  double sample_J(double t) const;
  /// Integral of J over (t1, t2], impulses with t_j in (t1, t2] included.
  double phase_integral(double t1, double t2) const { return phase_.between(t1, t2); }
  double phase(double t) const { return phase_(t); }
  /// Running mean (1/t) * integral of J over [0, t]; J(0) at t = 0.
  double average_J(double t) const;

  /// Discontinuities of the smooth part inside (0, horizon).
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const Impulse> impulses() const { return impulses_; }
  /// Breakpoints and impulse times, merged and sorted.
  std::vector<double> events() const;
  /// Impulses with t_j in (t1, t2].
  std::span<const Impulse> impulses_in(double t1, double t2) const;

  PhaseTable weighted_phase(std::function<double(double)> antiderivative,
                            const std::function<double(double)>& weight) const;

 private:
  ControlSignal signal_;
  double horizon_;
  std::vector<double> knots_;   // 0, breakpoints..., horizon
  std::vector<double> values_;  // J on [knots_[s], knots_[s+1])
  std::vector<double> breakpoints_;
  std::vector<Impulse> impulses_;
  PhaseTable phase_;
};

/// Convenience forms that realize the signal on demand.
double sample_J(const ControlSignal& signal, double t);
double phase_integral(const ControlSignal& signal, double t1, double t2);

}  // namespace eigentrack
