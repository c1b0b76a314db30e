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

#include <functional>
#include <vector>

#include "eigentrack/densemath.hpp"
#include "eigentrack/frame.hpp"

namespace eigentrack {

using RowVector = Eigen::RowVectorXcd;

/// Target-first P-Q split of the adiabatic-frame generators. Index 0 of
/// every permuted operator is the tracked population; order[a] is the
/// original index of permuted index a.
struct PartitionBlocks {
  TimeGrid grid{0.0, 1.0, 2};
  FrameSpace space = FrameSpace::liouville;
  int target = 0;
  std::vector<int> order;
  std::vector<cplx> g_h;
  std::vector<ComplexMatrix> e_h;
  std::vector<ComplexVector> w_h;  // Q rows, P column
  std::vector<cplx> g_d;
  std::vector<ComplexMatrix> e_d;
  std::vector<ComplexVector> w_d;
  std::vector<RowVector> v_d;  // P row, Q columns
  /// Permuted (H^a, D^a) at arbitrary t, when available.
  std::function<std::pair<ComplexMatrix, ComplexMatrix>(double)> evaluate;
  std::vector<double> breakpoints;

  Eigen::Index dim() const { return e_h.empty() ? 0 : e_h.front().rows() + 1; }
  ComplexMatrix hamiltonian(std::size_t i) const;  // reassembled, permuted order
  ComplexMatrix dissipator(std::size_t i) const;
  bool has_dissipator() const;
};

ComplexMatrix permute(const ComplexMatrix& m, const std::vector<int>& order);
ComplexMatrix unpermute(const ComplexMatrix& m, const std::vector<int>& order);

/// For Liouville ops the target must be a population index n + n N; for
/// Hilbert ops it is the level n itself.
PartitionBlocks partition(const AdiabaticFrameOps& ops, int target_index);

/// U0(t_i) = G_g(t_i, 0) (+) G_e(t_i, 0), generated by -i (g_H (+) e_H).
/// Block-diagonal propagators. Bare ones use the Hamiltonian blocks only
/// (unitary); dressed ones also carry g_D and e_D and serve kernels only.
struct BlockPropagators {
  TimeGrid grid{0.0, 1.0, 2};
  CumulativePropagator u0;
  double unitarity_defect = 0.0;
  bool dressed = false;

  cplx G_g(std::size_t i) const { return u0.from_start(i)(0, 0); }
  cplx G_g(std::size_t i, std::size_t j) const;
  cplx G_g_inverse(std::size_t i) const { return u0.to_start(i)(0, 0); }
  /// G_g(t_i, t_j)^{-1}; equals the adjoint in the bare case.
  cplx G_g_inverse(std::size_t i, std::size_t j) const;
  ComplexMatrix G_e(std::size_t i) const;
  ComplexMatrix G_e_inverse(std::size_t i) const;
  ComplexMatrix G_e(std::size_t i, std::size_t j) const;
  const ComplexMatrix& U0(std::size_t i) const { return u0.from_start(i); }
  const ComplexMatrix& U0_inverse(std::size_t i) const { return u0.to_start(i); }
};

/// Uses the continuous generator with breakpoints when the blocks carry one,
/// otherwise grid samples.
BlockPropagators block_propagators(const PartitionBlocks& blocks, int substeps = 1, bool dressed = false);

struct InteractionOps {
  std::vector<ComplexMatrix> hamiltonian;  // H_I(t_i), block off-diagonal
  std::vector<ComplexMatrix> dissipator;   // D_I(t_i)
  ComplexMatrix liouvillian(std::size_t i) const { return -kI * hamiltonian[i] + dissipator[i]; }
};

InteractionOps interaction_picture(const PartitionBlocks& blocks, const BlockPropagators& props);

}  // namespace eigentrack
