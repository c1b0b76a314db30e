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

#include <span>
#include <string>
#include <vector>

#include "eigentrack/densemath.hpp"
#include "eigentrack/frame.hpp"
#include "eigentrack/partition.hpp"
#include "eigentrack/simd.hpp"

namespace eigentrack {

/// Projected component on the grid: r_0(t) (population) or c_0(t) (amplitude).
struct TrajectoryResult {
  std::vector<double> time;
  std::vector<cplx> value;
  bool population = true;
  double fidelity = 1.0;  // sqrt|r_0(T)| or |c_0(T)|
  double sigma_norm_max = 0.0;
  Diagnostics diagnostics;

  double min_modulus() const;
};

/// k(t_i, t_j) = left_i . right_j, the separable form every kernel here takes
/// once G(t, t') = G(t, 0) G(t', 0)^{-1}.
struct FactorizedKernel {
  std::vector<RowVector> left;
  simd::SplitColumns right;
};

enum class QuadratureMethod { rows, prefix };

struct KernelOptions {
  bool include_f = true;
  bool store_table = false;
  QuadratureMethod method = QuadratureMethod::rows;
  unsigned threads = 1;
};

/// Running integrals of h and f over t' in [0, t_i] (trapezoid in t').
struct KernelTable {
  TimeGrid grid{0.0, 1.0, 2};
  std::vector<cplx> h_integral;
  std::vector<cplx> f_integral;
  std::vector<cplx> h_diagonal;
  std::vector<cplx> h_rows;  // packed lower triangle, when stored
  std::vector<cplx> f_rows;

  bool stored() const { return !h_rows.empty(); }
  cplx h(std::size_t i, std::size_t j) const;
  cplx f(std::size_t i, std::size_t j) const;
};

/// Row i of the packed lower triangle starts at i (i + 1) / 2.
std::vector<cplx> running_integral(const FactorizedKernel& kernel, const TimeGrid& grid,
                                   const KernelOptions& options, std::vector<cplx>* rows = nullptr);

cplx kernel_h(const PartitionBlocks& blocks, const BlockPropagators& props, std::size_t i, std::size_t j);
cplx kernel_f(const PartitionBlocks& blocks, const BlockPropagators& props, std::size_t i, std::size_t j);

FactorizedKernel factorize_h(const PartitionBlocks& blocks, const BlockPropagators& props);
FactorizedKernel factorize_f(const PartitionBlocks& blocks, const BlockPropagators& props);

KernelTable build_kernel_table(const PartitionBlocks& blocks, const BlockPropagators& props,
                               const KernelOptions& options = {});

/// Open-qubit kernels with the average gap held constant:
/// h = (pi^2 / 8T^2) cos 2J(t - t'), f = -(pi^2 kappa(t') / 16 T^2 J) sin 2J(t - t').
KernelTable constant_gap_kernels(const TimeGrid& grid, double total_time, double jtilde,
                                 std::span<const double> kappa, const KernelOptions& options = {});

/// Sigma^(1)(t_i) = integral over [0, t_i] of Q L_I P.
ComplexMatrix sigma_first_order(const InteractionOps& interaction, const TimeGrid& grid, std::size_t i);
std::vector<double> sigma_first_order_norms(const InteractionOps& interaction, const TimeGrid& grid);

/// dr/dt = -[i g_H + int h - g_D + int f] r, r(0) = 1, RK4 in t.
TrajectoryResult propagate_projected(const PartitionBlocks& blocks, const KernelTable& kernels,
                                     const NumericPolicy& policy = default_policy());

/// Full TCL generator K = P L_I (1 - Sigma)^{-1} P with Sigma built from
/// exact propagators; agrees with the unprojected dynamics up to
/// discretization.
TrajectoryResult propagate_exact_tcl(const PartitionBlocks& blocks, const BlockPropagators& props,
                                     const InteractionOps& interaction, int substeps = 1,
                                     const NumericPolicy& policy = default_policy());

/// A closed model: H(t) = J(t) shape(t) with impulses acting as kicks
/// exp(-i a shape(t_j)).
struct ClosedProblem {
  HamiltonianFn hamiltonian;
  HamiltonianFn shape;
  FrameHooks hooks;
  int target_level = 0;  // index in ascending energy order
  std::vector<double> breakpoints;
  std::vector<std::pair<double, double>> kicks;  // (t_j, amplitude)
};

enum class ClosedOrder { second, exact };

struct ClosedOptions {
  ClosedOrder order = ClosedOrder::exact;
  int substeps = 1;
  KernelOptions kernels{};
};

TrajectoryResult propagate_closed(const ClosedProblem& problem, const TimeGrid& grid,
                                  const ClosedOptions& options = {},
                                  const NumericPolicy& policy = default_policy());

enum class MemoryKernel { exact, second_order };

struct NzOptions {
  MemoryKernel kernel = MemoryKernel::exact;
  int max_iterations = 50;
  double tolerance = 1e-12;
  int substeps = 1;
};

struct NzReport {
  std::vector<cplx> r0;
  int iterations = 0;
  bool converged = false;
  double max_dev_exact = 0.0;
  double max_dev_tcl = 0.0;
  Diagnostics diagnostics;
};

/// Integrates the memory-kernel equation by Picard iteration and compares
/// against reference series given on the same grid (either may be empty).
NzReport nakajima_zwanzig_check(const PartitionBlocks& blocks, const BlockPropagators& props,
                                const InteractionOps& interaction, std::span<const cplx> exact_r0,
                                std::span<const cplx> tcl_r0, const NzOptions& options = {});

/// Max residual of d/dt Q chi - Q L_I (P + Q) chi when Q chi is built from its
/// formal solution and differentiated on the grid.
double formal_solution_residual(const PartitionBlocks& blocks, const BlockPropagators& props,
                                const InteractionOps& interaction, int substeps = 1);

}  // namespace eigentrack
