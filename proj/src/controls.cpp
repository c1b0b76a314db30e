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

#include "eigentrack/controls.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace eigentrack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Open interval (0, 1).
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + static_cast<int>(x % span);
}

void check_window(double duration, double period, const char* what) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument(std::string(what) + ": period must be positive");
  }
  if (!(duration > 0.0) || duration > period) {
    throw std::invalid_argument(std::string(what) + ": need 0 < duration <= period");
  }
}

bool in_window(double t, double duration, double period, std::int64_t* window) {
  if (t <= 0.0) return false;
  const auto n = static_cast<std::int64_t>(std::ceil(t / period));
  const double end = static_cast<double>(n) * period;
  if (window) *window = n;
  return t > end - duration && t < end;
}

}  // namespace

void validate(const ControlSignal& signal) {
  if (!std::isfinite(signal.baseline)) throw std::invalid_argument("control: baseline not finite");
  std::visit(
      [](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, RectTrain>) {
          check_window(v.duration, v.period, "rect");
          if (!(v.area >= 0.0)) throw std::invalid_argument("rect: area must be >= 0");
        } else if constexpr (std::is_same_v<V, ChaoticTrain>) {
          check_window(v.duration, v.period, "chaotic");
          if (!(v.area >= 0.0)) throw std::invalid_argument("chaotic: area must be >= 0");
          if (!(v.mu > 0.0 && v.mu <= 4.0)) throw std::invalid_argument("chaotic: need 0 < mu <= 4");
          if (!(v.seed_value > 0.0 && v.seed_value < 1.0)) {
            throw std::invalid_argument("chaotic: need 0 < seed_value < 1");
          }
        } else if constexpr (std::is_same_v<V, ImpulseNoise>) {
          check_window(v.duration, v.period, "impulse");
          if (v.k_min < 0 || v.k_max < v.k_min) {
            throw std::invalid_argument("impulse: need 0 <= k_min <= k_max");
          }
          if (!(v.mean_amplitude > 0.0)) {
            throw std::invalid_argument("impulse: mean_amplitude must be positive");
          }
        }
      },
      signal.variant);
}

std::string variant_name(const ControlSignal& signal) {
  switch (signal.variant.index()) {
    case 1: return "rect";
    case 2: return "chaotic";
    case 3: return "impulse";
    default: return "none";
  }
}

double logistic_amplitude(const ChaoticTrain& train, std::int64_t window) {
  if (window < 1) throw std::invalid_argument("logistic_amplitude: window must be >= 1");
  double l = train.seed_value;
  for (std::int64_t n = 0; n < window; ++n) l = train.mu * (l - l * l);
  return l;
}

std::vector<Impulse> draw_impulses(const ImpulseNoise& noise, std::int64_t window) {
  if (window < 1) throw std::invalid_argument("draw_impulses: window must be >= 1");
  std::uint64_t key = splitmix64(noise.seed);
  key = splitmix64(key ^ noise.realization);
  key = splitmix64(key ^ static_cast<std::uint64_t>(window));
  std::mt19937_64 rng(key);
  const int k = uniform_int(rng, noise.k_min, noise.k_max);
  const double end = static_cast<double>(window) * noise.period;
  const double begin = end - noise.duration;
  std::vector<Impulse> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double t = begin + noise.duration * open_unit(rng);
    const double amp = -noise.mean_amplitude * std::log(open_unit(rng));
    out.push_back({t, amp});
  }
  std::sort(out.begin(), out.end(), [](const Impulse& a, const Impulse& b) { return a.time < b.time; });
  return out;
}

double PhaseTable::operator()(double t) const {
  if (knots_.empty()) return 0.0;
  if (t < knots_.front() || t > knots_.back() * (1.0 + 1e-12) + 1e-300) {
    std::ostringstream msg;
    msg << "phase: t = " << t << " outside realized horizon [0, " << knots_.back() << "]";
    throw std::out_of_range(msg.str());
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t s = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  s = std::min(s == 0 ? 0 : s - 1, values_.size() - 1);
  double v = knot_cumulative_[s] + values_[s] * (antiderivative_(t) - antiderivative_(knots_[s]));
  auto jt = std::upper_bound(impulse_times_.begin(), impulse_times_.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(impulse_times_.begin(), jt));
  return v + impulse_prefix_[k];
}

Control::Control(const ControlSignal& signal, double horizon) : signal_(signal), horizon_(horizon) {
  validate(signal);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("Control: horizon must be positive");
  }
  const double j0 = signal.baseline;
  std::vector<double> knots{0.0};
  std::vector<double> values;
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, RectTrain> || std::is_same_v<V, ChaoticTrain>) {
          double l = 0.0;
          if constexpr (std::is_same_v<V, ChaoticTrain>) l = v.seed_value;
          for (std::int64_t n = 1;; ++n) {
            const double end = static_cast<double>(n) * v.period;
            const double start = end - v.duration;
            if (start >= horizon) break;
            double level = v.area / v.duration;
            if constexpr (std::is_same_v<V, ChaoticTrain>) {
              l = v.mu * (l - l * l);
              level *= l;
            }
            if (start > knots.back()) {
              values.push_back(j0);
              knots.push_back(start);
            }
            values.push_back(j0 + level);
            knots.push_back(end);
          }
        } else if constexpr (std::is_same_v<V, ImpulseNoise>) {
          for (std::int64_t n = 1;; ++n) {
            const double end = static_cast<double>(n) * v.period;
            if (end - v.duration >= horizon) break;
            for (const Impulse& imp : draw_impulses(v, n)) {
              if (imp.time <= horizon) impulses_.push_back(imp);
            }
          }
        }
      },
      signal.variant);
  values.push_back(j0);
  knots.push_back(std::max(horizon, knots.back()));
  // Clip to the horizon and drop zero-length segments.
  std::vector<double> ck{0.0};
  std::vector<double> cv;
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double a = knots[s];
    const double b = (s + 1 < knots.size()) ? std::min(knots[s + 1], horizon) : horizon;
    if (a >= horizon) break;
    if (b > a) {
      if (!cv.empty() && cv.back() == values[s]) {
        ck.back() = b;
      } else {
        cv.push_back(values[s]);
        ck.push_back(b);
      }
    }
  }
  knots_ = std::move(ck);
  values_ = std::move(cv);
  breakpoints_.assign(knots_.begin() + 1, knots_.end() - 1);

  phase_ = weighted_phase([](double x) { return x; }, [](double) { return 1.0; });
}

PhaseTable Control::weighted_phase(std::function<double(double)> antiderivative,
                                   const std::function<double(double)>& weight) const {
  PhaseTable p;
  p.knots_ = knots_;
  p.values_ = values_;
  p.antiderivative_ = std::move(antiderivative);
  p.knot_cumulative_.assign(knots_.size(), 0.0);
  for (std::size_t s = 0; s < values_.size(); ++s) {
    p.knot_cumulative_[s + 1] =
        p.knot_cumulative_[s] +
        values_[s] * (p.antiderivative_(knots_[s + 1]) - p.antiderivative_(knots_[s]));
  }
  p.impulse_prefix_.assign(impulses_.size() + 1, 0.0);
  for (std::size_t j = 0; j < impulses_.size(); ++j) {
    p.impulse_times_.push_back(impulses_[j].time);
    p.impulse_prefix_[j + 1] = p.impulse_prefix_[j] + impulses_[j].amplitude * weight(impulses_[j].time);
  }
  return p;
}

double Control::sample_J(double t) const {
  if (t < 0.0 || t > horizon_ * (1.0 + 1e-12)) {
    throw std::out_of_range("sample_J: t outside realized horizon");
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t s = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  s = std::min(s == 0 ? 0 : s - 1, values_.size() - 1);
  return values_[s];
}

double Control::average_J(double t) const {
  if (t <= 0.0) return sample_J(0.0);
  return phase(t) / t;
}

std::vector<double> Control::events() const {
  std::vector<double> out(breakpoints_.begin(), breakpoints_.end());
  for (const Impulse& imp : impulses_) out.push_back(imp.time);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::span<const Impulse> Control::impulses_in(double t1, double t2) const {
  auto cmp = [](double t, const Impulse& imp) { return t < imp.time; };
  auto lo = std::upper_bound(impulses_.begin(), impulses_.end(), t1, cmp);
  auto hi = std::upper_bound(impulses_.begin(), impulses_.end(), t2, cmp);
  if (hi <= lo) return {};
  return {&*lo, static_cast<std::size_t>(hi - lo)};
}

double sample_J(const ControlSignal& signal, double t) {
  validate(signal);
  if (t < 0.0) throw std::invalid_argument("sample_J: t must be >= 0");
  return std::visit(
      [&](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        std::int64_t n = 0;
        if constexpr (std::is_same_v<V, RectTrain>) {
          if (in_window(t, v.duration, v.period, &n)) return signal.baseline + v.area / v.duration;
        } else if constexpr (std::is_same_v<V, ChaoticTrain>) {
          if (in_window(t, v.duration, v.period, &n)) {
            return signal.baseline + v.area * logistic_amplitude(v, n) / v.duration;
          }
        }
        return signal.baseline;
      },
      signal.variant);
}

double phase_integral(const ControlSignal& signal, double t1, double t2) {
  if (t1 > t2) throw std::invalid_argument("phase_integral: need t1 <= t2");
  if (t2 <= 0.0) return 0.0;
  Control c(signal, t2);
  return c.phase_integral(std::max(t1, 0.0), t2);
}

}  // namespace eigentrack
