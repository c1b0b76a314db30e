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

#include "eigentrack/partition.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eigentrack {

ComplexMatrix permute(const ComplexMatrix& m, const std::vector<int>& order) {
  const auto d = static_cast<Eigen::Index>(order.size());
  ComplexMatrix out(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = m(order[a], order[b]);
  }
  return out;
}

ComplexMatrix unpermute(const ComplexMatrix& m, const std::vector<int>& order) {
  const auto d = static_cast<Eigen::Index>(order.size());
  ComplexMatrix out(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) out(order[a], order[b]) = m(a, b);
  }
  return out;
}

namespace {

ComplexMatrix assemble(cplx g, const ComplexMatrix& e, const ComplexVector& w, const RowVector& v) {
  const auto q = e.rows();
  ComplexMatrix m(q + 1, q + 1);
  m(0, 0) = g;
  m.block(1, 1, q, q) = e;
  m.block(1, 0, q, 1) = w;
  m.block(0, 1, 1, q) = v;
  return m;
}

}  // namespace

ComplexMatrix PartitionBlocks::hamiltonian(std::size_t i) const {
  return assemble(g_h.at(i), e_h.at(i), w_h.at(i), w_h.at(i).adjoint());
}

ComplexMatrix PartitionBlocks::dissipator(std::size_t i) const {
  return assemble(g_d.at(i), e_d.at(i), w_d.at(i), v_d.at(i));
}

bool PartitionBlocks::has_dissipator() const {
  for (std::size_t i = 0; i < g_d.size(); ++i) {
    if (g_d[i] != cplx{} || e_d[i].cwiseAbs().maxCoeff() > 0.0 || w_d[i].cwiseAbs().maxCoeff() > 0.0 ||
        v_d[i].cwiseAbs().maxCoeff() > 0.0) {
      return true;
    }
  }
  return false;
}

PartitionBlocks partition(const AdiabaticFrameOps& ops, int target_index) {
  const auto d = static_cast<int>(ops.dim());
  if (d < 2) throw std::invalid_argument("partition: operators must have dimension >= 2");
  if (target_index < 0 || target_index >= d) throw std::invalid_argument("partition: target out of range");
  if (ops.space == FrameSpace::liouville) {
    const int n = ops.levels;
    if (target_index % n != target_index / n) {
      std::ostringstream msg;
      msg << "partition: index " << target_index << " names a coherence |E_" << target_index / n
          << "><E_" << target_index % n << "|, not a population";
      throw std::invalid_argument(msg.str());
    }
  }
  PartitionBlocks b;
  b.grid = ops.grid;
  b.space = ops.space;
  b.target = target_index;
  b.order.resize(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) b.order[static_cast<std::size_t>(a)] = a;
  std::swap(b.order[0], b.order[static_cast<std::size_t>(target_index)]);
  const auto q = static_cast<Eigen::Index>(d - 1);
  for (std::size_t i = 0; i < ops.hamiltonian.size(); ++i) {
    const ComplexMatrix h = permute(ops.hamiltonian[i], b.order);
    const ComplexMatrix dd = permute(ops.dissipator[i], b.order);
    b.g_h.push_back(h(0, 0));
    b.e_h.push_back(h.block(1, 1, q, q));
    b.w_h.push_back(h.block(1, 0, q, 1));
    b.g_d.push_back(dd(0, 0));
    b.e_d.push_back(dd.block(1, 1, q, q));
    b.w_d.push_back(dd.block(1, 0, q, 1));
    b.v_d.push_back(dd.block(0, 1, 1, q));
  }
  if (ops.evaluate) {
    auto eval = ops.evaluate;
    auto order = b.order;
    b.evaluate = [eval, order](double t) {
      auto [h, dd] = eval(t);
      return std::make_pair(permute(h, order), permute(dd, order));
    };
  }
  b.breakpoints = ops.breakpoints;
  return b;
}

cplx BlockPropagators::G_g(std::size_t i, std::size_t j) const {
  return u0.from_start(i)(0, 0) * u0.to_start(j)(0, 0);
}

cplx BlockPropagators::G_g_inverse(std::size_t i, std::size_t j) const {
  return u0.to_start(i)(0, 0) * u0.from_start(j)(0, 0);
}

ComplexMatrix BlockPropagators::G_e(std::size_t i) const {
  const auto q = u0.from_start(i).rows() - 1;
  return u0.from_start(i).block(1, 1, q, q);
}

ComplexMatrix BlockPropagators::G_e_inverse(std::size_t i) const {
  const auto q = u0.to_start(i).rows() - 1;
  return u0.to_start(i).block(1, 1, q, q);
}

ComplexMatrix BlockPropagators::G_e(std::size_t i, std::size_t j) const {
  return G_e(i) * G_e_inverse(j);
}

BlockPropagators block_propagators(const PartitionBlocks& blocks, int substeps, bool dressed) {
  BlockPropagators p;
  p.grid = blocks.grid;
  p.dressed = dressed;
  const bool with_d = dressed && blocks.has_dissipator();
  auto diag = [with_d](const ComplexMatrix& h, const ComplexMatrix& d) {
    ComplexMatrix out = -kI * h;
    if (with_d) out += d;
    const auto q = h.rows() - 1;
    out.block(1, 0, q, 1).setZero();
    out.block(0, 1, 1, q).setZero();
    return out;
  };
  if (blocks.evaluate) {
    auto eval = blocks.evaluate;
    Stepping stepping{blocks.breakpoints, substeps};
    p.u0 = cumulative_propagator(
        [&](double t) {
          const auto hd = eval(t);
          return diag(hd.first, hd.second);
        },
        blocks.grid, stepping);
  } else {
    std::vector<ComplexMatrix> samples;
    samples.reserve(blocks.g_h.size());
    for (std::size_t i = 0; i < blocks.g_h.size(); ++i) {
      samples.push_back(diag(blocks.hamiltonian(i), blocks.dissipator(i)));
    }
    p.u0 = cumulative_propagator(samples, blocks.grid);
  }
  for (std::size_t i = 0; i < p.u0.size(); ++i) {
    const ComplexMatrix& u = p.u0.from_start(i);
    p.unitarity_defect = std::max(
        p.unitarity_defect,
        (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff());
  }
  return p;
}

InteractionOps interaction_picture(const PartitionBlocks& blocks, const BlockPropagators& props) {
  if (props.dressed) throw std::invalid_argument("interaction_picture: needs bare block propagators");
  InteractionOps out;
  const auto q = blocks.dim() - 1;
  for (std::size_t i = 0; i < blocks.g_h.size(); ++i) {
    ComplexMatrix h1 = ComplexMatrix::Zero(q + 1, q + 1);
    h1.block(1, 0, q, 1) = blocks.w_h[i];
    h1.block(0, 1, 1, q) = blocks.w_h[i].adjoint();
    const ComplexMatrix& u = props.U0(i);
    const ComplexMatrix& ui = props.U0_inverse(i);
    out.hamiltonian.push_back(ui * h1 * u);
    out.dissipator.push_back(ui * blocks.dissipator(i) * u);
  }
  return out;
}

}  // namespace eigentrack
