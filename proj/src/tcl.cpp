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

#include "eigentrack/tcl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

namespace eigentrack {

double TrajectoryResult::min_modulus() const {
  double m = INFINITY;
  for (const cplx& v : value) m = std::min(m, std::abs(v));
  return m;
}

cplx KernelTable::h(std::size_t i, std::size_t j) const {
  if (!stored() || j > i) throw std::out_of_range("KernelTable::h: entry not stored");
  return h_rows.at(i * (i + 1) / 2 + j);
}

cplx KernelTable::f(std::size_t i, std::size_t j) const {
  if (f_rows.empty() || j > i) throw std::out_of_range("KernelTable::f: entry not stored");
  return f_rows.at(i * (i + 1) / 2 + j);
}

namespace {

// y' = lambda(t) y + source(t), classical RK4 with cubic midpoint samples.
std::vector<cplx> integrate_linear(std::span<const cplx> lambda, std::span<const cplx> source,
                                   double dt, cplx y0) {
  const std::size_t n = lambda.size();
  std::vector<cplx> y(n);
  y[0] = y0;
  const bool has_source = !source.empty();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const cplx l0 = lambda[i], l1 = lambda[i + 1], lm = midpoint_value(lambda, i);
    const cplx s0 = has_source ? source[i] : cplx{};
    const cplx s1 = has_source ? source[i + 1] : cplx{};
    const cplx sm = has_source ? midpoint_value(source, i) : cplx{};
    const cplx k1 = l0 * y[i] + s0;
    const cplx k2 = lm * (y[i] + 0.5 * dt * k1) + sm;
    const cplx k3 = lm * (y[i] + 0.5 * dt * k2) + sm;
    const cplx k4 = l1 * (y[i] + dt * k3) + s1;
    y[i + 1] = y[i] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

// Running integral with Simpson panels on [t_i, t_{i+1}] using cubic midpoints.
std::vector<ComplexMatrix> cumulative_simpson(std::span<const ComplexMatrix> x, double dt) {
  std::vector<ComplexMatrix> out(x.size());
  out[0] = ComplexMatrix::Zero(x[0].rows(), x[0].cols());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    out[i + 1] = out[i] + dt / 6.0 * (x[i] + 4.0 * midpoint_value(x, i) + x[i + 1]);
  }
  return out;
}

std::vector<double> grid_times(const TimeGrid& grid) {
  std::vector<double> t(grid.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = grid.at(i);
  return t;
}

void check_population(TrajectoryResult& r, const NumericPolicy& policy) {
  for (std::size_t i = 0; i < r.value.size(); ++i) {
    const cplx v = r.value[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg << "non-finite projected component at t = " << r.time[i];
      throw NumericError(msg.str());
    }
    if (std::abs(v) > 1.0 + policy.population_ceiling && !r.diagnostics.has("truncation_overshoot")) {
      std::ostringstream msg;
      msg << "|r0| exceeds 1 by " << std::abs(v) - 1.0 << " first at t = " << r.time[i];
      r.diagnostics.flag("truncation_overshoot", msg.str());
    }
  }
  const double last = std::abs(r.value.back());
  r.fidelity = r.population ? std::sqrt(last) : last;
}

CumulativePropagator full_propagator(const PartitionBlocks& blocks, int substeps, bool q_only) {
  const auto q = blocks.dim() - 1;
  auto cut = [q_only, q](const ComplexMatrix& l) -> ComplexMatrix {
    if (!q_only) return l;
    return l.block(1, 1, q, q);
  };
  if (blocks.evaluate) {
    auto eval = blocks.evaluate;
    Stepping stepping{blocks.breakpoints, substeps};
    return cumulative_propagator(
        [&](double t) {
          auto [h, d] = eval(t);
          return cut(-kI * h + d);
        },
        blocks.grid, stepping);
  }
  std::vector<ComplexMatrix> samples;
  for (std::size_t i = 0; i < blocks.g_h.size(); ++i) {
    samples.push_back(cut(-kI * blocks.hamiltonian(i) + blocks.dissipator(i)));
  }
  return cumulative_propagator(samples, blocks.grid);
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

std::vector<cplx> running_integral(const FactorizedKernel& kernel, const TimeGrid& grid,
                                   const KernelOptions& options, std::vector<cplx>* rows) {
  const std::size_t n = grid.size();
  if (kernel.left.size() != n || kernel.right.count != n) {
    throw std::invalid_argument("running_integral: kernel factors must cover the grid");
  }
  std::vector<cplx> out(n, cplx{});
  const double dt = grid.dt();
  if (options.method == QuadratureMethod::prefix && rows == nullptr) {
    const std::size_t len = kernel.right.length;
    ComplexVector acc = ComplexVector::Zero(static_cast<Eigen::Index>(len));
    ComplexVector prev(static_cast<Eigen::Index>(len));
    for (std::size_t l = 0; l < len; ++l) prev(static_cast<Eigen::Index>(l)) = kernel.right.get(l, 0);
    for (std::size_t i = 1; i < n; ++i) {
      ComplexVector cur(static_cast<Eigen::Index>(len));
      for (std::size_t l = 0; l < len; ++l) cur(static_cast<Eigen::Index>(l)) = kernel.right.get(l, i);
      acc += 0.5 * dt * (prev + cur);
      out[i] = (kernel.left[i] * acc)(0);
      prev = std::move(cur);
    }
    return out;
  }
  if (rows) rows->assign(n * (n + 1) / 2, cplx{});
  const unsigned nthreads = std::max(1u, options.threads);
  auto work = [&](unsigned tid) {
    std::vector<double> re(n), im(n);
    std::vector<cplx> left;
    for (std::size_t i = tid; i < n; i += nthreads) {
      const auto& lv = kernel.left[i];
      left.assign(lv.data(), lv.data() + lv.size());
      simd::dot_columns(left, kernel.right, i + 1, re.data(), im.data());
      for (std::size_t j = 0; j <= i; ++j) {
        if (!std::isfinite(re[j]) || !std::isfinite(im[j])) {
          std::ostringstream msg;
          msg << "non-finite kernel value at (t, t') = (" << grid.at(i) << ", " << grid.at(j) << ")";
          throw NumericError(msg.str());
        }
      }
      out[i] = simd::trapezoid(re.data(), im.data(), i + 1, dt);
      if (rows) {
        cplx* dst = rows->data() + i * (i + 1) / 2;
        for (std::size_t j = 0; j <= i; ++j) dst[j] = {re[j], im[j]};
      }
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

cplx kernel_h(const PartitionBlocks& blocks, const BlockPropagators& props, std::size_t i, std::size_t j) {
  if (j > i) throw std::invalid_argument("kernel_h: need t >= t'");
  const cplx v = (blocks.w_h[i].adjoint() * props.G_e(i, j) * blocks.w_h[j])(0);
  return v * props.G_g_inverse(i, j);
}

cplx kernel_f(const PartitionBlocks& blocks, const BlockPropagators& props, std::size_t i, std::size_t j) {
  if (j > i) throw std::invalid_argument("kernel_f: need t >= t'");
  const ComplexMatrix ge = props.G_e(i, j);
  const cplx a = (blocks.w_h[i].adjoint() * ge * blocks.w_d[j])(0);
  const cplx b = (blocks.v_d[i] * ge * blocks.w_h[j])(0);
  return kI * (a + b) * props.G_g_inverse(i, j);
}

FactorizedKernel factorize_h(const PartitionBlocks& blocks, const BlockPropagators& props) {
  const std::size_t n = blocks.grid.size();
  const auto q = static_cast<std::size_t>(blocks.dim() - 1);
  FactorizedKernel k;
  k.right.resize(q, n);
  for (std::size_t i = 0; i < n; ++i) {
    k.left.push_back(props.G_g_inverse(i) * (blocks.w_h[i].adjoint() * props.G_e(i)));
    const ComplexVector r = props.G_e_inverse(i) * blocks.w_h[i] * props.G_g(i);
    for (std::size_t l = 0; l < q; ++l) k.right.set(l, i, r(static_cast<Eigen::Index>(l)));
  }
  return k;
}

FactorizedKernel factorize_f(const PartitionBlocks& blocks, const BlockPropagators& props) {
  const std::size_t n = blocks.grid.size();
  const auto q = static_cast<Eigen::Index>(blocks.dim() - 1);
  FactorizedKernel k;
  k.right.resize(static_cast<std::size_t>(2 * q), n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix ge = props.G_e(i);
    RowVector left(2 * q);
    left.head(q) = blocks.w_h[i].adjoint() * ge;
    left.tail(q) = blocks.v_d[i] * ge;
    k.left.push_back(kI * props.G_g_inverse(i) * left);
    const ComplexMatrix gi = props.G_e_inverse(i);
    ComplexVector r(2 * q);
    r.head(q) = gi * blocks.w_d[i];
    r.tail(q) = gi * blocks.w_h[i];
    r *= props.G_g(i);
    for (Eigen::Index l = 0; l < 2 * q; ++l) k.right.set(static_cast<std::size_t>(l), i, r(l));
  }
  return k;
}

KernelTable build_kernel_table(const PartitionBlocks& blocks, const BlockPropagators& props,
                               const KernelOptions& options) {
  KernelTable t;
  t.grid = blocks.grid;
  t.h_integral = running_integral(factorize_h(blocks, props), blocks.grid, options,
                                  options.store_table ? &t.h_rows : nullptr);
  if (options.include_f) {
    t.f_integral = running_integral(factorize_f(blocks, props), blocks.grid, options,
                                    options.store_table ? &t.f_rows : nullptr);
  } else {
    t.f_integral.assign(blocks.grid.size(), cplx{});
  }
  for (std::size_t i = 0; i < blocks.grid.size(); ++i) {
    t.h_diagonal.push_back(blocks.w_h[i].squaredNorm());
  }
  return t;
}

KernelTable constant_gap_kernels(const TimeGrid& grid, double total_time, double jtilde,
                                 std::span<const double> kappa, const KernelOptions& options) {
  if (!(jtilde > 0.0) || !(total_time > 0.0)) {
    throw std::invalid_argument("constant_gap_kernels: need positive gap and total time");
  }
  if (kappa.size() != grid.size()) throw std::invalid_argument("constant_gap_kernels: kappa size");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double ch = pi2 / (8.0 * total_time * total_time);
  const double cf = pi2 / (16.0 * total_time * total_time * jtilde);
  const double w = 2.0 * jtilde;
  const std::size_t n = grid.size();
  FactorizedKernel h, f;
  h.right.resize(2, n);
  f.right.resize(2, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.at(i);
    const cplx ep = std::exp(kI * w * t), em = std::conj(ep);
    RowVector lh(2), lf(2);
    lh << 0.5 * ch * ep, 0.5 * ch * em;
    lf << -cf / (2.0 * kI) * ep, cf / (2.0 * kI) * em;
    h.left.push_back(lh);
    f.left.push_back(lf);
    h.right.set(0, i, em);
    h.right.set(1, i, ep);
    f.right.set(0, i, kappa[i] * em);
    f.right.set(1, i, kappa[i] * ep);
  }
  KernelTable t;
  t.grid = grid;
  t.h_integral = running_integral(h, grid, options, options.store_table ? &t.h_rows : nullptr);
  t.f_integral = options.include_f
                     ? running_integral(f, grid, options, options.store_table ? &t.f_rows : nullptr)
                     : std::vector<cplx>(n, cplx{});
  t.h_diagonal.assign(n, ch);
  return t;
}

ComplexMatrix sigma_first_order(const InteractionOps& interaction, const TimeGrid& grid, std::size_t i) {
  const auto d = interaction.hamiltonian.at(0).rows();
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  auto qlp = [&](std::size_t j) {
    ComplexVector c = interaction.liouvillian(j).col(0);
    c(0) = 0.0;
    return c;
  };
  for (std::size_t j = 0; j < i; ++j) s.col(0) += 0.5 * grid.dt() * (qlp(j) + qlp(j + 1));
  return s;
}

std::vector<double> sigma_first_order_norms(const InteractionOps& interaction, const TimeGrid& grid) {
  const auto d = interaction.hamiltonian.at(0).rows();
  std::vector<double> out(grid.size(), 0.0);
  ComplexVector acc = ComplexVector::Zero(d);
  ComplexVector prev = interaction.liouvillian(0).col(0);
  prev(0) = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    ComplexVector cur = interaction.liouvillian(j).col(0);
    cur(0) = 0.0;
    acc += 0.5 * grid.dt() * (prev + cur);
    out[j] = acc.norm();
    prev = std::move(cur);
  }
  return out;
}

TrajectoryResult propagate_projected(const PartitionBlocks& blocks, const KernelTable& kernels,
                                     const NumericPolicy& policy) {
  const std::size_t n = blocks.grid.size();
  if (kernels.h_integral.size() != n || kernels.f_integral.size() != n) {
    throw std::invalid_argument("propagate_projected: kernel table does not match the grid");
  }
  std::vector<cplx> lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a = kI * blocks.g_h[i] + kernels.h_integral[i] - blocks.g_d[i] + kernels.f_integral[i];
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      std::ostringstream msg;
      msg << "propagate_projected: non-finite generator at t = " << blocks.grid.at(i);
      throw NumericError(msg.str());
    }
    lambda[i] = -a;
  }
  TrajectoryResult r;
  r.time = grid_times(blocks.grid);
  r.population = blocks.space == FrameSpace::liouville;
  r.value = integrate_linear(lambda, {}, blocks.grid.dt(), 1.0);
  check_population(r, policy);
  return r;
}

TrajectoryResult propagate_exact_tcl(const PartitionBlocks& blocks, const BlockPropagators& props,
                                     const InteractionOps& interaction, int substeps,
                                     const NumericPolicy& policy) {
  if (props.dressed) throw std::invalid_argument("propagate_exact_tcl: needs bare block propagators");
  const std::size_t n = blocks.grid.size();
  const auto q = blocks.dim() - 1;
  const CumulativePropagator ufull = full_propagator(blocks, substeps, false);
  const CumulativePropagator gq = full_propagator(blocks, substeps, true);
  std::vector<ComplexMatrix> x(n);
  std::vector<ComplexMatrix> g(n);
  std::vector<ComplexMatrix> ui_inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix li = interaction.liouvillian(i);
    const ComplexMatrix ui = props.U0_inverse(i) * ufull.from_start(i);
    ui_inv[i] = ufull.to_start(i) * props.U0(i);
    g[i] = props.G_e_inverse(i) * gq.from_start(i);
    const ComplexMatrix g_inv = gq.to_start(i) * props.G_e(i);
    x[i] = g_inv * li.block(1, 0, q, 1) * ui.row(0);
  }
  const auto y = cumulative_simpson(x, blocks.grid.dt());
  TrajectoryResult r;
  r.time = grid_times(blocks.grid);
  r.population = blocks.space == FrameSpace::liouville;
  std::vector<cplx> k(n);
  const ComplexMatrix id = ComplexMatrix::Identity(q, q);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix s = g[i] * y[i] * ui_inv[i];
    r.sigma_norm_max = std::max(r.sigma_norm_max, spectral_norm(s));
    const ComplexMatrix li = interaction.liouvillian(i);
    const ComplexVector sp = s.col(0);
    const ComplexMatrix sq = s.block(0, 1, q, q);
    Eigen::FullPivLU<ComplexMatrix> lu(id - sq);
    if (!lu.isInvertible()) {
      std::ostringstream msg;
      msg << "1 - Sigma singular at t = " << blocks.grid.at(i);
      throw NumericError(msg.str());
    }
    k[i] = li(0, 0) + (li.block(0, 1, 1, q) * lu.solve(sp))(0);
  }
  if (r.sigma_norm_max >= 1.0) r.diagnostics.flag("sigma_norm_ge_one", "||Sigma|| >= 1 on the grid");
  const auto chi = integrate_linear(k, {}, blocks.grid.dt(), 1.0);
  r.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.value[i] = props.G_g(i) * chi[i];
  check_population(r, policy);
  return r;
}

TrajectoryResult propagate_closed(const ClosedProblem& problem, const TimeGrid& grid,
                                  const ClosedOptions& options, const NumericPolicy& policy) {
  const SpectralFrame frame = build_spectral_frame(problem.hamiltonian, grid, problem.hooks, policy);
  Diagnostics diag;
  if (frame.level_degenerate_anywhere(problem.target_level)) {
    throw NumericError("propagate_closed: target level degenerate on the grid");
  }
  AdiabaticFrameOps ops = build_closed_adiabatic_ops(frame, policy);
  ops.breakpoints = problem.breakpoints;
  const PartitionBlocks blocks = partition(ops, problem.target_level);
  const BlockPropagators props = block_propagators(blocks, options.substeps);
  const InteractionOps inter = interaction_picture(blocks, props);
  const auto s1 = sigma_first_order_norms(inter, grid);
  const double s1max = *std::max_element(s1.begin(), s1.end());
  if (s1max >= 1.0) diag.flag("sigma1_norm_ge_one", "first-order Sigma norm reached 1");
  TrajectoryResult r;
  if (options.order == ClosedOrder::second) {
    KernelOptions ko = options.kernels;
    ko.include_f = false;
    r = propagate_projected(blocks, build_kernel_table(blocks, props, ko), policy);
  } else {
    r = propagate_exact_tcl(blocks, props, inter, options.substeps, policy);
  }
  r.diagnostics.merge(diag);
  return r;
}

namespace {

struct NzFactors {
  std::vector<RowVector> alpha;
  std::vector<ComplexVector> beta;
  std::vector<cplx> local;
};

NzFactors nz_factors(const PartitionBlocks& blocks, const BlockPropagators& props,
                     const InteractionOps& interaction, const NzOptions& options) {
  const std::size_t n = blocks.grid.size();
  const auto q = blocks.dim() - 1;
  NzFactors f;
  CumulativePropagator gq;
  if (options.kernel == MemoryKernel::exact) gq = full_propagator(blocks, options.substeps, true);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix li = interaction.liouvillian(i);
    ComplexMatrix g = ComplexMatrix::Identity(q, q), g_inv = ComplexMatrix::Identity(q, q);
    if (options.kernel == MemoryKernel::exact) {
      g = props.G_e_inverse(i) * gq.from_start(i);
      g_inv = gq.to_start(i) * props.G_e(i);
    }
    f.alpha.push_back(li.block(0, 1, 1, q) * g);
    f.beta.push_back(g_inv * li.block(1, 0, q, 1));
    f.local.push_back(li(0, 0));
  }
  return f;
}

}  // namespace

NzReport nakajima_zwanzig_check(const PartitionBlocks& blocks, const BlockPropagators& props,
                                const InteractionOps& interaction, std::span<const cplx> exact_r0,
                                std::span<const cplx> tcl_r0, const NzOptions& options) {
  if (props.dressed) throw std::invalid_argument("nakajima_zwanzig_check: needs bare block propagators");
  const std::size_t n = blocks.grid.size();
  const double dt = blocks.grid.dt();
  const NzFactors f = nz_factors(blocks, props, interaction, options);
  NzReport rep;
  std::vector<cplx> chi(n, cplx{1.0, 0.0});
  std::vector<ComplexMatrix> integrand(n);
  std::vector<cplx> source(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) integrand[i] = f.beta[i] * chi[i];
    const auto y = cumulative_simpson(integrand, dt);
    for (std::size_t i = 0; i < n; ++i) source[i] = (f.alpha[i] * y[i])(0);
    std::vector<cplx> next = integrate_linear(f.local, source, dt, 1.0);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - chi[i]));
    chi = std::move(next);
    rep.iterations = it;
    if (change < options.tolerance) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "Picard iteration did not converge in " << options.max_iterations << " iterations";
    rep.diagnostics.flag("picard_not_converged", msg.str());
  }
  rep.r0.resize(n);
  for (std::size_t i = 0; i < n; ++i) rep.r0[i] = props.G_g(i) * chi[i];
  auto dev = [&](std::span<const cplx> ref) {
    double m = 0.0;
    if (ref.size() != n) return std::nan("");
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(rep.r0[i] - ref[i]));
    return m;
  };
  rep.max_dev_exact = exact_r0.empty() ? std::nan("") : dev(exact_r0);
  rep.max_dev_tcl = tcl_r0.empty() ? std::nan("") : dev(tcl_r0);
  return rep;
}

double formal_solution_residual(const PartitionBlocks& blocks, const BlockPropagators& props,
                                const InteractionOps& interaction, int substeps) {
  const std::size_t n = blocks.grid.size();
  const double dt = blocks.grid.dt();
  const auto q = blocks.dim() - 1;
  const CumulativePropagator ufull = full_propagator(blocks, substeps, false);
  const CumulativePropagator gq = full_propagator(blocks, substeps, true);
  std::vector<cplx> chi0(n);
  std::vector<ComplexMatrix> integrand(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexVector chi = (props.U0_inverse(i) * ufull.from_start(i)).col(0);
    chi0[i] = chi(0);
    g[i] = props.G_e_inverse(i) * gq.from_start(i);
    const ComplexMatrix g_inv = gq.to_start(i) * props.G_e(i);
    integrand[i] = g_inv * interaction.liouvillian(i).block(1, 0, q, 1) * chi0[i];
  }
  const auto y = cumulative_simpson(integrand, dt);
  std::vector<ComplexMatrix> qchi(n);
  for (std::size_t i = 0; i < n; ++i) qchi[i] = g[i] * y[i];
  const auto dq = grid_derivative(qchi, dt);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix li = interaction.liouvillian(i);
    const ComplexMatrix rhs = li.block(1, 0, q, 1) * chi0[i] + li.block(1, 1, q, q) * qchi[i];
    res = std::max(res, (dq[i] - rhs).cwiseAbs().maxCoeff());
  }
  return res;
}

}  // namespace eigentrack
