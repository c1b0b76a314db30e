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


// Acceptance driver. Prints one line per criterion; exit status is nonzero
// when any selected criterion fails. Usage: eigentrack_acceptance [N ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "eigentrack/bath.hpp"
#include "eigentrack/controls.hpp"
#include "eigentrack/experiment.hpp"
#include "eigentrack/frame.hpp"
#include "eigentrack/models.hpp"
#include "eigentrack/partition.hpp"
#include "eigentrack/tcl.hpp"

#ifndef EIGENTRACK_SOURCE_DIR
#define EIGENTRACK_SOURCE_DIR "."
#endif

using namespace eigentrack;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

ExperimentConfig preset_file(const std::string& name) {
  return load_config(std::filesystem::path(EIGENTRACK_SOURCE_DIR) / "configs" / (name + ".json"));
}

ControlSignal signal_of(const ControlConfig& c, std::uint64_t seed = 0, std::uint64_t realization = 0) {
  const double duration = c.duty_ratio > 0.0 ? c.duty_ratio * c.period : c.duration;
  ControlSignal s;
  s.baseline = c.baseline;
  if (c.variant == "rect") s.variant = RectTrain{c.area, duration, c.period};
  if (c.variant == "chaotic") s.variant = ChaoticTrain{c.area, duration, c.period, c.mu, c.seed_value};
  if (c.variant == "impulse") {
    s.variant = ImpulseNoise{duration, c.period, c.k_min, c.k_max, c.mean_amplitude, seed, realization};
  }
  return s;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// 1. Numerical H^a, D^a against the closed-form 4x4 matrices. The numerical
// frame differs from the closed form by the diagonal gauge S = diag(1,-1,-1,1)
// on H^a (the sign of the E_+ column).
Verdict criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const double total = 1.0;
  auto control = std::make_shared<const Control>(ControlSignal{3.0, NoControl{}}, total);
  const OpenQubitModel model(control, total);
  const TimeGrid grid(0.0, total, 2000);
  const DecayFunctions decay = solve_c_plus(BathSpec{5.0, 2.5}, control, grid);
  const SpectralFrame frame = open_qubit_frame(model, grid);
  const AdiabaticFrameOps ops = build_adiabatic_ops(frame, model.dissipator(decay));
  const std::vector<int> order{3, 1, 2, 0};
  const Eigen::Vector4cd gauge(1.0, -1.0, -1.0, 1.0);
  double dh = 0.0, dd = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexMatrix h = gauge.asDiagonal() * permute(ops.hamiltonian[i], order) * gauge.asDiagonal();
    const ComplexMatrix d = permute(ops.dissipator[i], order);
    dh = std::max(dh, (h - open_qubit_reference_hamiltonian(model, grid.at(i))).cwiseAbs().maxCoeff());
    dd = std::max(dd, (d - open_qubit_reference_dissipator(decay.kappa[i], decay.shift[i])).cwiseAbs().maxCoeff());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {dh <= 1e-8 && dd <= 1e-8 && secs < 5.0,
          format("max|dH|=%.2e max|dD|=%.2e (tol 1e-8) runtime=%.2fs (limit 5s)", dh, dd, secs)};
}

// 2. Master-equation fidelity equals exp(-1/2 int kappa) for every control family.
Verdict criterion2() {
  const ExperimentConfig rect = preset_file("fig2a");
  const ExperimentConfig noise = preset_file("fig2b");
  ControlConfig chaotic = rect.control;
  chaotic.variant = "chaotic";
  const std::vector<std::pair<std::string, ControlSignal>> cases{
      {"rect", signal_of(rect.control)},
      {"chaotic", signal_of(chaotic)},
      {"impulse", signal_of(noise.control, noise.ensemble.seed, 0)}};
  const double coupling = 1.0;
  const BathSpec bath{coupling, 0.5 * coupling};
  double worst = 0.0;
  std::string where;
  for (const auto& [name, signal] : cases) {
    for (double gt : {1.0, 5.0, 20.0}) {
      const double total = gt / coupling;
      auto control = std::make_shared<const Control>(signal, total);
      const TimeGrid grid(0.0, total, static_cast<std::size_t>(std::llround(total / rect.control.period)) * 16);
      const DecayFunctions decay = solve_c_plus(bath, control, grid);
      const QubitTrajectory me = exact_qubit_me(decay, grid);
      const double expected = std::exp(-0.5 * decay.kappa_integral(total));
      const double dev = std::abs(me.fidelity(grid.size() - 1) - expected);
      if (dev >= worst) {
        worst = dev;
        where = format("%s at GT=%g", name.c_str(), gt);
      }
    }
  }
  return {worst <= 1e-6, format("max|F_me - exp(-int kappa/2)|=%.2e at %s (tol 1e-6)", worst, where.c_str())};
}

// 3. Constant-gap TCL against the closed form, and convergence with the exact
// fidelity at large Gamma T.
Verdict criterion3() {
  const ExperimentConfig cfg = preset_file("fig2a");
  const double coupling = cfg.bath.coupling;
  const BathSpec bath{coupling, 0.5 * coupling};
  const std::vector<double> gts{0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
  double worst = 0.0, worst_at = 0.0, relative = 0.0;
  for (double gt : gts) {
    const double total = gt / coupling;
    auto control = std::make_shared<const Control>(signal_of(cfg.control), total);
    const OpenQubitModel model(control, total);
    const std::size_t steps =
        std::max<std::size_t>(2000, static_cast<std::size_t>(std::llround(total / cfg.control.period)) * 16);
    const TimeGrid grid(0.0, total, steps);
    const DecayFunctions decay = solve_c_plus(bath, control, grid);
    AdiabaticFrameOps ops = build_adiabatic_ops(open_qubit_frame(model, grid), model.dissipator(decay));
    const auto events = control->events();
    ops.breakpoints.assign(events.begin(), events.end());
    const PartitionBlocks blocks = partition(ops, OpenQubitModel::kTargetIndex);
    KernelOptions ko;
    ko.include_f = false;
    ko.method = QuadratureMethod::prefix;
    const double jt = control->average_J(total);
    const TrajectoryResult tcl = propagate_projected(blocks, constant_gap_kernels(grid, total, jt, decay.kappa, ko));
    const double f_tcl = std::sqrt(std::abs(tcl.value.back()));
    const double kint = decay.kappa_integral(total);
    const double closed = std::exp(-0.5 * kint + std::pow(std::numbers::pi / 8.0, 2) *
                                                     (std::cos(2.0 * jt * total) - 1.0) / std::pow(jt * total, 2));
    const double dev = std::abs(f_tcl - closed);
    if (dev >= worst) {
      worst = dev;
      worst_at = gt;
    }
    if (gt == gts.back()) {
      const double f_exact = exact_qubit_me(decay, grid).fidelity(grid.size() - 1);
      relative = std::abs(f_exact - f_tcl) / f_exact;
    }
  }
  return {worst <= 1e-3 && relative < 0.01,
          format("max|F_tcl - closed form|=%.2e at GT=%g (tol 1e-3); |F-F_tcl|/F at GT=20 = %.2e (limit 1e-2)",
                 worst, worst_at, relative)};
}

// 4. Control-free rotating-field qubit: min |c0| and agreement with the oracle.
Verdict criterion4() {
  ExperimentConfig cfg = preset_file("fig3");
  cfg.control.variant = "none";
  cfg.time.stride = 1;
  cfg.sweep = {};
  const RunReport r = run_experiment(cfg);
  const PointResult& p = r.points.front();
  const double min_tcl = min_of(p.fidelity_tcl);
  const double min_oracle = min_of(p.fidelity_exact);
  const double dev = max_abs_diff(p.fidelity_tcl, p.fidelity_exact);
  return {std::abs(min_tcl - 0.36) <= 0.02 && dev <= 1e-4,
          format("min|c0| tcl=%.6f oracle=%.6f (target 0.36+-0.02); max|tcl-oracle|=%.2e (tol 1e-4)", min_tcl,
                 min_oracle, dev)};
}

// Minimum tracked amplitude for each period of a closed-model sweep.
std::vector<double> period_sweep_minima(ExperimentConfig cfg, const std::vector<double>& periods,
                                        double* max_dev) {
  cfg.time.stride = 1;
  cfg.sweep = {};
  std::vector<double> minima;
  for (double chi : periods) {
    ExperimentConfig c = cfg;
    c.control.period = chi;
    const PointResult p = run_experiment(c).points.front();
    minima.push_back(min_of(p.fidelity_tcl));
    if (max_dev != nullptr && !p.fidelity_exact.empty()) {
      *max_dev = std::max(*max_dev, max_abs_diff(p.fidelity_tcl, p.fidelity_exact));
    }
  }
  return minima;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

std::string joined(const std::vector<double>& v, const char* fmt = "%.6f") {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format(fmt, x);
  return s;
}

// Realization standard deviation over time of |c0(t)|, from the Schrodinger
// oracle with impulse kicks.
double fluctuation(const ControlSignal& signal, double horizon, std::size_t steps) {
  auto control = std::make_shared<const Control>(signal, horizon);
  const RotatingFieldQubit q(5.0, 5.0, control);
  const TimeGrid grid(0.0, horizon, steps);
  OracleOptions opts;
  for (const Impulse& imp : control->impulses()) {
    opts.kicks.push_back({imp.time, matrix_exp((-kI * imp.amplitude) * q.shape(imp.time))});
  }
  const auto psi = bruteforce_schrodinger([&](double t) { return q.hamiltonian(t); }, q.initial_state(), grid, opts);
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) c[i] = std::abs(q.eigenvectors(grid.at(i)).col(1).dot(psi[i]));
  double mean = 0.0;
  for (double x : c) mean += x;
  mean /= static_cast<double>(c.size());
  double var = 0.0;
  for (double x : c) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(c.size()));
}

// 5. Faster pulses track better (rect and chaotic); stronger impulse noise
// suppresses the fluctuation of |c0|.
Verdict criterion5() {
  const ExperimentConfig cfg = preset_file("fig3");
  const std::vector<double> periods{0.01, 0.005, 0.0025, 0.00125};
  double dev = 0.0;
  const std::vector<double> rect = period_sweep_minima(cfg, periods, &dev);
  ExperimentConfig chaotic_cfg = cfg;
  chaotic_cfg.control.variant = "chaotic";
  chaotic_cfg.solver.exact = "none";
  const std::vector<double> chaotic = period_sweep_minima(chaotic_cfg, periods, nullptr);

  const std::size_t members = 200;
  const double horizon = cfg.time.values.front();
  const std::vector<double> strengths{0.0, 0.0025, 0.005, 0.01};
  std::vector<double> mean, se;
  for (double w : strengths) {
    double s = 0.0, s2 = 0.0;
    const std::size_t n = w > 0.0 ? members : 1;
    for (std::size_t m = 0; m < n; ++m) {
      ControlSignal signal{1.0, NoControl{}};
      if (w > 0.0) signal.variant = ImpulseNoise{0.05, 0.1, 6, 16, w, 7, m};
      const double x = fluctuation(signal, horizon, 4000);
      s += x;
      s2 += x * x;
    }
    const double mu = s / static_cast<double>(n);
    mean.push_back(mu);
    se.push_back(n > 1 ? std::sqrt(std::max(0.0, s2 / n - mu * mu) / static_cast<double>(n - 1)) : 0.0);
  }
  bool noise_ok = true;
  for (std::size_t i = 1; i < mean.size(); ++i) {
    if (!(mean[i] + 2.0 * se[i] < mean[i - 1] - 2.0 * se[i - 1])) noise_ok = false;
  }
  std::string noise_txt;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    noise_txt += (i ? "," : "") + format("%.4f+-%.4f", mean[i], 2.0 * se[i]);
  }
  const bool pass = strictly_increasing(rect) && strictly_increasing(chaotic) && noise_ok;
  return {pass, format("rect min|c0|=[%s] (oracle dev %.1e); chaotic=[%s]; noise sd(|c0|) W={0,.0025,.005,.01}: [%s]",
                       joined(rect).c_str(), dev, joined(chaotic).c_str(), noise_txt.c_str())};
}

// 6. Two-qubit effective model: control-free |c0(T)| and the best rect setting.
Verdict criterion6() {
  ExperimentConfig cfg = preset_file("fig4");
  cfg.sweep = {};
  cfg.time.record = "final";
  ExperimentConfig free = cfg;
  free.control.variant = "none";
  const PointResult p0 = run_experiment(free).points.front();
  ExperimentConfig best = cfg;
  best.control.period = 0.00125;
  const PointResult p1 = run_experiment(best).points.front();
  const double c_free = p0.fidelity_tcl.back();
  const double c_tcl = p1.fidelity_tcl.back();
  const double c_oracle = p1.fidelity_exact.back();
  return {c_tcl >= 0.99 && c_oracle >= 0.99,
          format("control-free |c0(T)|=%.6f (oracle %.6f); rect chi=0.00125: tcl %.6f oracle %.6f (need >= 0.99)",
                 c_free, p0.fidelity_exact.back(), c_tcl, c_oracle)};
}

// 7. Adiabatic 1/T scaling of the open-qubit closed limit, and 1/J^2 decay of
// the double integral of h.
Verdict criterion7() {
  // T_0 fixes 2 J T_0 = 16 pi / 3 so every doubling samples the same phase of
  // the oscillating prefactor.
  const double t0 = 8.0 * std::numbers::pi / 3.0;
  std::vector<double> inv_t, defect;
  for (int d = 0; d < 5; ++d) {
    const double total = t0 * std::pow(2.0, d);
    auto control = std::make_shared<const Control>(ControlSignal{1.0, NoControl{}}, total);
    const OpenQubitModel model(control, total);
    const TrajectoryResult r =
        propagate_closed(model.closed_problem(), TimeGrid(0.0, total, static_cast<std::size_t>(400 * total)));
    inv_t.push_back(1.0 / total);
    defect.push_back(1.0 - std::abs(r.value.back()));
  }
  const double slope_t = loglog_slope(inv_t, defect);

  // Kernels from the numerical frame with a static gap and no bath. The gap
  // values put 2 J T on odd multiples of pi, the envelope of 1 - cos(2 J T).
  const double total = 10.0;
  std::vector<double> inv_j, h_int;
  for (int n : {1, 3, 5, 9, 15}) {
    const double j = n * std::numbers::pi / (2.0 * total);
    auto control = std::make_shared<const Control>(ControlSignal{j, NoControl{}}, total);
    const OpenQubitModel model(control, total);
    const TimeGrid grid(0.0, total, 4000);
    const DecayFunctions decay = solve_c_plus(BathSpec{0.0, 1.0}, control, grid);
    const PartitionBlocks blocks =
        partition(build_adiabatic_ops(open_qubit_frame(model, grid), model.dissipator(decay)),
                  OpenQubitModel::kTargetIndex);
    const KernelTable kt = build_kernel_table(blocks, block_propagators(blocks, 2));
    inv_j.push_back(1.0 / j);
    h_int.push_back(std::abs(kt.h_integral.back()));
  }
  const double slope_j = loglog_slope(inv_j, h_int);
  return {slope_t >= 0.8 && slope_j >= 1.8,
          format("1-|c0(T)| exponent in 1/T = %.3f over 4 doublings (need >= 0.8); |int int h| exponent in 1/J = "
                 "%.3f over J ratio 15 (need >= 1.8)",
                 slope_t, slope_j)};
}

struct TriangleResult {
  double liouville_me = 0.0;
  double liouville_tcl = 0.0;
  double me_tcl = 0.0;
};

TriangleResult triangle(double coupling, double memory_rate, double total, std::size_t steps) {
  auto control = std::make_shared<const Control>(ControlSignal{1.0, NoControl{}}, total);
  const OpenQubitModel model(control, total);
  const TimeGrid grid(0.0, total, steps);
  const DecayFunctions decay = solve_c_plus(BathSpec{coupling, memory_rate}, control, grid);
  const QubitTrajectory me = exact_qubit_me(decay, grid);
  const ComplexVector e0 = model.eigenvectors(0.0).col(OpenQubitModel::kExcitedLevel);
  OracleOptions opts;
  opts.substeps = 4;
  const DensityTrajectory lv = bruteforce_liouville(model.lab_liouvillian(decay), e0 * e0.adjoint(), grid, opts);
  const PartitionBlocks blocks =
      partition(build_adiabatic_ops(open_qubit_frame(model, grid), model.dissipator(decay)),
                OpenQubitModel::kTargetIndex);
  const TrajectoryResult tcl = propagate_projected(blocks, build_kernel_table(blocks, block_propagators(blocks, 2)));
  TriangleResult r;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexVector e = model.eigenvectors(grid.at(i)).col(OpenQubitModel::kExcitedLevel);
    const double pl = e.dot(lv.rho[i] * e).real();
    const double pm = me.excited[i];
    const double pt = tcl.value[i].real();
    r.liouville_me = std::max(r.liouville_me, std::abs(pl - pm));
    r.liouville_tcl = std::max(r.liouville_tcl, std::abs(pl - pt));
    r.me_tcl = std::max(r.me_tcl, std::abs(pm - pt));
  }
  return r;
}

// 8. Liouville oracle, exact master equation and TCL at weak coupling.
Verdict criterion8() {
  const double memory_rate = 1.0;
  const double coupling = 0.05 * memory_rate;
  const TriangleResult full = triangle(coupling, memory_rate, 20.0, 2000);
  const TriangleResult half = triangle(0.5 * coupling, memory_rate, 20.0, 2000);
  const double ratio = full.liouville_tcl / half.liouville_tcl;
  const bool agree = full.liouville_me <= 5e-3 && full.liouville_tcl <= 5e-3 && full.me_tcl <= 5e-3;
  const bool shrink = ratio >= 3.0 && ratio <= 5.0;
  return {agree && shrink,
          format("pairwise |dP| L-ME=%.2e L-TCL=%.2e ME-TCL=%.2e (tol 5e-3: %s); halving Gamma shrinks L-TCL "
                 "%.2e -> %.2e, ratio %.2f (need 3-5: %s)",
                 full.liouville_me, full.liouville_tcl, full.me_tcl, agree ? "ok" : "fail", full.liouville_tcl,
                 half.liouville_tcl, ratio, shrink ? "ok" : "fail")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const int n = std::atoi(argv[a]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [1-%zu ...]\n", argv[0], criteria.size());
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(static_cast<int>(n));
  }
  int failures = 0;
  for (int n : selected) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = criteria[n - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s %s [%.1fs]\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
