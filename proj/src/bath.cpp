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

#include "eigentrack/bath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eigentrack {

double BathSpec::correlation(double tau) const {
  return 0.5 * coupling * memory_rate * std::exp(-memory_rate * std::abs(tau));
}

void BathSpec::validate() const {
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw std::invalid_argument("bath: coupling must be >= 0");
  }
  if (!(memory_rate > 0.0) || !std::isfinite(memory_rate)) {
    throw std::invalid_argument("bath: memory_rate must be > 0");
  }
}

namespace {

struct PairState {
  cplx x;
  cplx y;
};

cplx sinhc(cplx z) {
  if (std::abs(z) < 1e-3) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sinh(z) / z;
}

// x' = -y, y' = g x - c y with g = Gamma gamma / 2, c = gamma + 2iJ.
void evolve_exact(PairState& s, double g, cplx c, double h) {
  const cplx mu = -0.5 * c;
  const cplx delta = std::sqrt(mu * mu - g);
  const cplx e = std::exp(mu * h);
  const cplx ch = std::cosh(delta * h);
  const cplx sh = sinhc(delta * h) * h;
  const cplx x = s.x, y = s.y;
  s.x = e * (ch * x + sh * (0.5 * c * x - y));
  s.y = e * (ch * y + sh * (g * x - 0.5 * c * y));
}

void evolve_rk4(PairState& s, double g, cplx c, double h, int min_steps) {
  const int steps = std::max(min_steps, static_cast<int>(std::ceil(h * (std::abs(c) + g) / 0.05)));
  const double dh = h / steps;
  auto f = [&](const PairState& p) { return PairState{-p.y, g * p.x - c * p.y}; };
  for (int k = 0; k < steps; ++k) {
    const PairState k1 = f(s);
    const PairState k2 = f({s.x + 0.5 * dh * k1.x, s.y + 0.5 * dh * k1.y});
    const PairState k3 = f({s.x + 0.5 * dh * k2.x, s.y + 0.5 * dh * k2.y});
    const PairState k4 = f({s.x + dh * k3.x, s.y + dh * k3.y});
    s.x += dh / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.y += dh / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  }
}

// Visits the pieces of (a, b] between control events; `on_piece(lo, hi, J)`
// then `on_impulse(amplitude)` for impulses located at hi.
template <typename Piece, typename Jump>
void walk_events(const Control& control, double a, double b, Piece&& on_piece, Jump&& on_impulse) {
  const auto bps = control.breakpoints();
  const auto imps = control.impulses();
  double cur = a;
  auto bit = std::upper_bound(bps.begin(), bps.end(), cur);
  auto iit = std::upper_bound(imps.begin(), imps.end(), cur,
                              [](double t, const Impulse& imp) { return t < imp.time; });
  while (cur < b) {
    double stop = b;
    if (bit != bps.end() && *bit < stop) stop = *bit;
    if (iit != imps.end() && iit->time < stop) stop = iit->time;
    if (stop > cur) on_piece(cur, stop, control.sample_J(0.5 * (cur + stop)));
    while (iit != imps.end() && iit->time <= stop) {
      on_impulse(iit->amplitude);
      ++iit;
    }
    while (bit != bps.end() && *bit <= stop) ++bit;
    cur = stop;
  }
}

void advance(PairState& s, const BathSpec& bath, const Control& control, double a, double b,
             const DecayOptions& options) {
  const double g = 0.5 * bath.coupling * bath.memory_rate;
  walk_events(
      control, a, b,
      [&](double lo, double hi, double j) {
        const cplx c = bath.memory_rate + 2.0 * kI * j;
        if (options.method == DecayMethod::exact_segments) {
          evolve_exact(s, g, c, hi - lo);
        } else {
          evolve_rk4(s, g, c, hi - lo, options.rk4_substeps);
        }
      },
      [&](double amp) { s.y *= std::exp(-2.0 * kI * amp); });
}

}  // namespace

DecaySample DecayFunctions::at(double t) const {
  if (!control) throw std::logic_error("DecayFunctions: no control attached");
  if (t < grid.start() || t > grid.end() * (1.0 + 1e-12)) {
    throw std::out_of_range("DecayFunctions::at: t outside grid");
  }
  std::size_t i = grid.interval_of(t);
  if (i >= valid) {
    std::ostringstream msg;
    msg << "DecayFunctions::at: t = " << t << " beyond truncation";
    throw NumericError(msg.str());
  }
  if (t == grid.at(i)) return {c_tilde[i], memory[i], kappa[i], shift[i]};
  PairState s{c_tilde[i], memory[i]};
  advance(s, bath, *control, grid.at(i), t, DecayOptions{});
  const cplx r = s.y / s.x;
  return {s.x, s.y, 2.0 * r.real(), r.imag()};
}

double DecayFunctions::kappa_integral(double t, int panels_per_interval) const {
  static constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665,
                                                    0.5688888888888889, 0.4786286704993665,
                                                    0.2369268850561891};
  double total = 0.0;
  const std::size_t last = grid.interval_of(t);
  for (std::size_t i = 0; i <= last; ++i) {
    const double a = grid.at(i);
    const double b = std::min(grid.at(i + 1), t);
    if (b <= a) break;
    walk_events(
        *control, a, b,
        [&](double lo, double hi, double) {
          const double h = (hi - lo) / panels_per_interval;
          for (int p = 0; p < panels_per_interval; ++p) {
            const double pa = lo + p * h;
            const double mid = pa + 0.5 * h;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
              // Right-limit samples: panel nodes never sit on an event.
              total += 0.5 * h * weights[q] * at(mid + 0.5 * h * nodes[q]).kappa;
            }
          }
        },
        [](double) {});
  }
  return total;
}

DecayFunctions solve_c_plus(const BathSpec& bath, std::shared_ptr<const Control> control,
                            const TimeGrid& grid, const DecayOptions& options) {
  bath.validate();
  if (!control) throw std::invalid_argument("solve_c_plus: control required");
  if (control->horizon() < grid.end() * (1.0 - 1e-12)) {
    throw std::invalid_argument("solve_c_plus: control horizon shorter than grid");
  }
  const NumericPolicy& policy = default_policy();
  DecayFunctions d;
  d.grid = grid;
  d.bath = bath;
  d.control = control;
  const std::size_t n = grid.size();
  d.c_tilde.assign(n, cplx{NAN, NAN});
  d.memory.assign(n, cplx{NAN, NAN});
  d.c_plus.assign(n, cplx{NAN, NAN});
  d.kappa.assign(n, NAN);
  d.shift.assign(n, NAN);
  d.phase.assign(n, NAN);
  PairState s{1.0, 0.0};
  d.valid = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) advance(s, bath, *control, grid.at(i - 1), grid.at(i), options);
    if (std::abs(s.x) < policy.amplitude_floor) {
      d.valid = i;
      std::ostringstream msg;
      msg << "|c_+| < " << policy.amplitude_floor << " at t = " << grid.at(i)
          << "; kappa and S undefined beyond";
      d.diagnostics.flag("decay_truncated", msg.str());
      break;
    }
    const double t = grid.at(i);
    d.c_tilde[i] = s.x;
    d.memory[i] = s.y;
    const cplx r = s.y / s.x;
    d.kappa[i] = 2.0 * r.real();
    d.shift[i] = r.imag();
    d.phase[i] = control->phase(t);
    d.c_plus[i] = s.x * std::exp(kI * d.phase[i]);
  }
  return d;
}

std::function<cplx(double, double)> rotated_kernel(const BathSpec& bath,
                                                   std::shared_ptr<const Control> control) {
  return [bath, control](double t, double s) {
    return bath.correlation(t - s) * std::exp(-2.0 * kI * control->phase_integral(s, t));
  };
}

namespace {

std::vector<cplx> volterra_trapezoid(const std::function<cplx(double, double)>& kernel,
                                     const TimeGrid& grid) {
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  std::vector<cplx> c(n);
  c[0] = 1.0;
  cplx i_prev = 0.0;  // I(t_i)
  std::vector<cplx> row(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t k = i + 1;
    const double tk = grid.at(k);
    cplx partial = 0.5 * kernel(tk, grid.at(0)) * c[0];
    for (std::size_t j = 1; j < k; ++j) partial += kernel(tk, grid.at(j)) * c[j];
    partial *= dt;
    const cplx kk = kernel(tk, tk);
    c[k] = (c[i] - 0.5 * dt * i_prev - 0.5 * dt * partial) / (1.0 + 0.25 * dt * dt * kk);
    i_prev = partial + 0.5 * dt * kk * c[k];
  }
  return c;
}

}  // namespace

std::vector<cplx> solve_volterra(const std::function<cplx(double, double)>& kernel, const TimeGrid& grid) {
  const std::vector<cplx> coarse = volterra_trapezoid(kernel, grid);
  const std::vector<cplx> fine =
      volterra_trapezoid(kernel, TimeGrid(grid.start(), grid.end(), 2 * grid.steps()));
  std::vector<cplx> out(coarse.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

double QubitTrajectory::fidelity(std::size_t i) const { return std::sqrt(std::max(0.0, excited.at(i))); }

QubitTrajectory exact_qubit_me(const DecayFunctions& decay, const TimeGrid& grid,
                               const MasterEquationOptions& options, const NumericPolicy& policy) {
  if (!decay.control) throw std::invalid_argument("exact_qubit_me: decay functions lack a control");
  if (grid.end() > decay.grid.end() * (1.0 + 1e-12)) {
    throw std::invalid_argument("exact_qubit_me: output grid exceeds decay grid");
  }
  const Control& control = *decay.control;
  const BathSpec& bath = decay.bath;
  QubitTrajectory out;
  out.diagnostics.merge(decay.diagnostics);
  double pe = options.initial_excited, pg = 1.0 - options.initial_excited;
  cplx ct = options.initial_coherence;  // exp(2i phi) <E_-|rho|E_+>
  const double trunc_time = decay.truncated() ? decay.grid.at(decay.valid == 0 ? 0 : decay.valid - 1)
                                              : INFINITY;
  auto record = [&](double t) {
    out.time.push_back(t);
    out.excited.push_back(pe);
    out.ground.push_back(pg);
    const cplx coh = ct * std::exp(-2.0 * kI * control.phase(t));
    out.coherence.push_back(coh);
    const double drift = std::abs(pe + pg - 1.0);
    out.max_trace_drift = std::max(out.max_trace_drift, drift);
    const double lo = 0.5 * (pe + pg) - std::sqrt(0.25 * (pe - pg) * (pe - pg) + std::norm(coh));
    out.min_eigenvalue = std::min(out.min_eigenvalue, lo);
    if (drift > policy.trace_abort) {
      std::ostringstream msg;
      msg << "exact_qubit_me: trace drift " << drift << " at t = " << t
          << "; refine the grid or reduce step_scale";
      throw NumericError(msg.str());
    }
    if (lo < -policy.positivity_tol) out.diagnostics.flag("positivity_violated");
  };
  record(grid.at(0));
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double b = grid.at(i + 1);
    if (b > trunc_time) {
      out.diagnostics.flag("trajectory_truncated", "decay amplitude vanished");
      break;
    }
    walk_events(
        control, grid.at(i), b,
        [&](double lo, double hi, double j) {
          const double rate = std::hypot(bath.memory_rate, 2.0 * j) + bath.coupling;
          const int steps = std::max(1, static_cast<int>(std::ceil((hi - lo) * rate / options.step_scale)));
          const double h = (hi - lo) / steps;
          for (int k = 0; k < steps; ++k) {
            const double t0 = lo + k * h;
            // Stage samples taken strictly inside the piece.
            const DecaySample s0 = decay.at(k == 0 ? std::nextafter(t0, hi) : t0);
            const DecaySample sm = decay.at(t0 + 0.5 * h);
            const DecaySample s1 = decay.at(k + 1 == steps ? std::nextafter(hi, lo) : t0 + h);
            auto f = [](const DecaySample& s, double e, cplx c) {
              return std::make_tuple(-s.kappa * e, s.kappa * e, (-2.0 * kI * s.shift - 0.5 * s.kappa) * c);
            };
            auto [a1, b1, c1] = f(s0, pe, ct);
            auto [a2, b2, c2] = f(sm, pe + 0.5 * h * a1, ct + 0.5 * h * c1);
            auto [a3, b3, c3] = f(sm, pe + 0.5 * h * a2, ct + 0.5 * h * c2);
            auto [a4, b4, c4] = f(s1, pe + h * a3, ct + h * c3);
            pe += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            pg += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            ct += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
          }
        },
        [](double) {});
    record(b);
  }
  return out;
}

namespace {

// Pieces of grid interval [a, b] split at breakpoints and kick times and
// then into substeps; kicks with time in (a, b] fire at their piece end.
template <typename Piece, typename KickFn>
void walk_oracle(const OracleOptions& o, double a, double b, Piece&& piece, KickFn&& kick) {
  std::vector<double> cuts;
  for (double t : o.breakpoints) {
    if (t > a && t < b) cuts.push_back(t);
  }
  for (const Kick& k : o.kicks) {
    if (k.time > a && k.time < b) cuts.push_back(k.time);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(b);
  double lo = a;
  const int sub = std::max(1, o.substeps);
  auto kick_it = std::upper_bound(o.kicks.begin(), o.kicks.end(), a,
                                  [](double t, const Kick& k) { return t < k.time; });
  for (double hi : cuts) {
    if (hi > lo) {
      const double h = (hi - lo) / sub;
      for (int s = 0; s < sub; ++s) piece(lo + s * h, s + 1 == sub ? hi : lo + (s + 1) * h);
    }
    while (kick_it != o.kicks.end() && kick_it->time <= hi) {
      kick(kick_it->op);
      ++kick_it;
    }
    lo = hi;
  }
}

double min_eig(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

DensityTrajectory bruteforce_liouville(const SuperoperatorFn& liouvillian, const ComplexMatrix& rho0,
                                       const TimeGrid& grid, const OracleOptions& options,
                                       const NumericPolicy& policy) {
  const auto n = rho0.rows();
  ComplexVector v = vec(rho0);
  const double norm0 = v.norm();
  DensityTrajectory out;
  auto record = [&](double t) {
    const ComplexMatrix rho = unvec(v, n);
    out.time.push_back(t);
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace() - rho0.trace()));
    out.min_eigenvalue = std::min(out.min_eigenvalue, min_eig(rho));
    out.rho.push_back(rho);
  };
  record(grid.at(0));
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    walk_oracle(
        options, grid.at(i), grid.at(i + 1),
        [&](double lo, double hi) {
          const double h = hi - lo;
          // End stages sampled strictly inside the piece, on the side of the jump it integrates.
          const ComplexMatrix l0 = liouvillian(std::nextafter(lo, hi));
          const ComplexMatrix lm = liouvillian(0.5 * (lo + hi));
          const ComplexMatrix l1 = liouvillian(std::nextafter(hi, lo));
          const ComplexVector k1 = l0 * v;
          const ComplexVector k2 = lm * (v + 0.5 * h * k1);
          const ComplexVector k3 = lm * (v + 0.5 * h * k2);
          const ComplexVector k4 = l1 * (v + h * k3);
          v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        },
        [&](const ComplexMatrix& k) { v = k * v; });
    if (!(v.norm() <= policy.norm_growth_abort * std::max(norm0, 1e-300))) {
      std::ostringstream msg;
      msg << "bruteforce_liouville: state norm grew beyond " << policy.norm_growth_abort
          << "x at t = " << grid.at(i + 1) << "; step unstable";
      throw NumericError(msg.str());
    }
    record(grid.at(i + 1));
  }
  return out;
}

std::vector<ComplexVector> bruteforce_schrodinger(const HamiltonianFn& hamiltonian,
                                                  const ComplexVector& psi0, const TimeGrid& grid,
                                                  const OracleOptions& options) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  std::vector<ComplexVector> out;
  ComplexVector psi = psi0;
  out.push_back(psi);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    walk_oracle(
        options, grid.at(i), grid.at(i + 1),
        [&](double lo, double hi) {
          const double h = hi - lo;
          const ComplexMatrix a1 = -kI * hamiltonian(lo + c1 * h);
          const ComplexMatrix a2 = -kI * hamiltonian(lo + c2 * h);
          const ComplexMatrix omega =
              0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
          psi = matrix_exp(omega) * psi;
        },
        [&](const ComplexMatrix& k) { psi = k * psi; });
    out.push_back(psi);
  }
  return out;
}

}  // namespace eigentrack
