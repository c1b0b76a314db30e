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

#include "eigentrack/frame.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace eigentrack {

ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index n) {
  if (v.size() != n * n) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

ComplexMatrix commutator_superop(const ComplexMatrix& h) {
  const auto n = h.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  return Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval();
}

ComplexMatrix lindblad_superop(const ComplexMatrix& l) {
  const auto n = l.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix ldl = l.adjoint() * l;
  return Eigen::kroneckerProduct(l.conjugate(), l).eval() -
         0.5 * Eigen::kroneckerProduct(id, ldl).eval() -
         0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval();
}

double SpectralFrame::bohr(int k, std::size_t i) const {
  const int n = k / levels, m = k % levels;
  return energies.at(i)(n) - energies.at(i)(m);
}

double SpectralFrame::dynamical_phase(int k, std::size_t i) const {
  const int n = k / levels, m = k % levels;
  return level_phase.at(i)(n) - level_phase.at(i)(m);
}

ComplexMatrix SpectralFrame::eigenoperator(int k, std::size_t i) const {
  const int n = k / levels, m = k % levels;
  return vectors.at(i).col(n) * vectors.at(i).col(m).adjoint();
}

bool SpectralFrame::level_degenerate_anywhere(int level) const {
  for (const auto& flags : degenerate_level) {
    if (flags.at(static_cast<std::size_t>(level))) return true;
  }
  return false;
}

SpectralFrame build_spectral_frame(const HamiltonianFn& hamiltonian, const TimeGrid& grid,
                                   const FrameHooks& hooks, const NumericPolicy& policy) {
  SpectralFrame f;
  f.grid = grid;
  f.hooks = hooks;
  f.min_gap = INFINITY;
  const std::size_t np = grid.size();
  f.energies.resize(np);
  f.vectors.resize(np);
  f.level_phase.resize(np);
  f.degenerate_level.resize(np);
  f.degenerate.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    const double t = grid.at(i);
    if (hooks.eigenvectors) {
      f.vectors[i] = hooks.eigenvectors(t);
      if (hooks.energies) {
        f.energies[i] = hooks.energies(t);
      } else {
        const ComplexMatrix h = hamiltonian(t);
        f.energies[i] = (f.vectors[i].adjoint() * h * f.vectors[i]).diagonal().real();
      }
    } else {
      EigenSystem es = herm_eigendecompose(hamiltonian(t), policy);
      if (i > 0) {
        // Parallel transport: successive overlaps real and positive.
        for (Eigen::Index n = 0; n < es.vectors.cols(); ++n) {
          const cplx ov = f.vectors[i - 1].col(n).dot(es.vectors.col(n));
          if (std::abs(ov) > 0.0) es.vectors.col(n) *= std::conj(ov) / std::abs(ov);
        }
      }
      f.energies[i] = es.values;
      f.vectors[i] = es.vectors;
    }
    const auto n = f.energies[i].size();
    f.levels = static_cast<int>(n);
    f.degenerate_level[i].assign(static_cast<std::size_t>(n), false);
    bool any = false;
    for (Eigen::Index a = 0; a + 1 < n; ++a) {
      const double gap = std::abs(f.energies[i](a + 1) - f.energies[i](a));
      f.min_gap = std::min(f.min_gap, gap);
      if (gap < policy.degeneracy_gap) {
        f.degenerate_level[i][static_cast<std::size_t>(a)] = true;
        f.degenerate_level[i][static_cast<std::size_t>(a + 1)] = true;
        any = true;
      }
    }
    f.degenerate[i] = any;
  }
  for (std::size_t i = 0; i < np; ++i) {
    if (hooks.level_phases) {
      f.level_phase[i] = hooks.level_phases(grid.at(i));
    } else if (i == 0) {
      f.level_phase[i] = RealVector::Zero(f.levels);
    } else {
      f.level_phase[i] = f.level_phase[i - 1] + 0.5 * grid.dt() * (f.energies[i - 1] + f.energies[i]);
    }
  }
  return f;
}

namespace {

ComplexMatrix connection(const ComplexMatrix& v, const ComplexMatrix& dv, double* defect) {
  ComplexMatrix a = v.adjoint() * dv;
  *defect = std::max(*defect, (a + a.adjoint()).cwiseAbs().maxCoeff());
  return 0.5 * (a - a.adjoint());
}

ComplexMatrix liouville_hamiltonian(const ComplexMatrix& a, const RealVector& theta) {
  const auto n = a.rows();
  const auto d = n * n;
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (Eigen::Index nk = 0; nk < n; ++nk) {
    for (Eigen::Index mk = 0; mk < n; ++mk) {
      const Eigen::Index k = mk + nk * n;
      const double th_k = theta(nk) - theta(mk);
      for (Eigen::Index nl = 0; nl < n; ++nl) {
        for (Eigen::Index ml = 0; ml < n; ++ml) {
          cplx v{};
          if (ml == mk) v += a(nk, nl);
          if (nl == nk) v += std::conj(a(mk, ml));
          if (v == cplx{}) continue;
          const Eigen::Index l = ml + nl * n;
          const double th_l = theta(nl) - theta(ml);
          h(k, l) = -kI * std::exp(-kI * (th_l - th_k)) * v;
        }
      }
    }
  }
  return h;
}

ComplexMatrix eigen_basis_matrix(const ComplexMatrix& v) {
  const auto n = v.rows();
  ComplexMatrix b(n * n, n * n);
  for (Eigen::Index nn = 0; nn < n; ++nn) {
    for (Eigen::Index m = 0; m < n; ++m) {
      const ComplexMatrix phi = v.col(nn) * v.col(m).adjoint();
      b.col(m + nn * n) = vec(phi);
    }
  }
  return b;
}

ComplexMatrix liouville_dissipator(const ComplexMatrix& v, const RealVector& theta,
                                   const ComplexMatrix& d) {
  const auto n = v.rows();
  const ComplexMatrix b = eigen_basis_matrix(v);
  ComplexMatrix out = b.adjoint() * d * b;
  for (Eigen::Index k = 0; k < n * n; ++k) {
    const double th_k = theta(k / n) - theta(k % n);
    for (Eigen::Index l = 0; l < n * n; ++l) {
      const double th_l = theta(l / n) - theta(l % n);
      out(k, l) *= std::exp(-kI * (th_l - th_k));
    }
  }
  return out;
}

ComplexMatrix hilbert_hamiltonian(const ComplexMatrix& a, const RealVector& theta) {
  const auto n = a.rows();
  ComplexMatrix h(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      h(m, k) = -kI * std::exp(-kI * (theta(k) - theta(m))) * a(m, k);
    }
  }
  return h;
}

std::vector<ComplexMatrix> vector_derivatives(const SpectralFrame& frame) {
  if (frame.hooks.eigenvector_derivative) {
    std::vector<ComplexMatrix> d(frame.grid.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = frame.hooks.eigenvector_derivative(frame.grid.at(i));
    return d;
  }
  return grid_derivative(frame.vectors, frame.grid.dt());
}

void check_derivatives(const AdiabaticFrameOps& ops, const NumericPolicy& policy) {
  if (ops.derivative_defect > policy.derivative_consistency) {
    // Finite-difference defect scales as dt^4.
    const double factor = std::pow(ops.derivative_defect / policy.derivative_consistency, 0.25);
    const auto suggested = static_cast<long long>(std::ceil(1.5 * factor * ops.grid.steps()));
    std::ostringstream msg;
    msg << "build_adiabatic_ops: eigenvector derivative inconsistent (max |A + A^dagger| = "
        << ops.derivative_defect << "); grid too coarse, try steps >= " << suggested;
    throw NumericError(msg.str());
  }
}

bool has_analytic_hooks(const FrameHooks& h) {
  return h.eigenvectors && h.eigenvector_derivative && h.level_phases;
}

}  // namespace

AdiabaticFrameOps build_adiabatic_ops(const SpectralFrame& frame, const SuperoperatorFn& dissipator,
                                      const NumericPolicy& policy) {
  AdiabaticFrameOps ops;
  ops.grid = frame.grid;
  ops.space = FrameSpace::liouville;
  ops.levels = frame.levels;
  const auto d = frame.liouville_dim();
  const auto dv = vector_derivatives(frame);
  for (std::size_t i = 0; i < frame.grid.size(); ++i) {
    const ComplexMatrix a = connection(frame.vectors[i], dv[i], &ops.derivative_defect);
    ComplexMatrix h = liouville_hamiltonian(a, frame.level_phase[i]);
    ops.max_hermitian_defect = std::max(ops.max_hermitian_defect, max_asymmetry(h));
    ops.hamiltonian.push_back(std::move(h));
    if (dissipator) {
      ops.dissipator.push_back(
          liouville_dissipator(frame.vectors[i], frame.level_phase[i], dissipator(frame.grid.at(i))));
    } else {
      ops.dissipator.push_back(ComplexMatrix::Zero(d, d));
    }
  }
  check_derivatives(ops, policy);
  if (has_analytic_hooks(frame.hooks)) {
    const FrameHooks hooks = frame.hooks;
    const SuperoperatorFn diss = dissipator;
    ops.evaluate = [hooks, diss, d](double t) {
      const ComplexMatrix v = hooks.eigenvectors(t);
      double defect = 0.0;
      const ComplexMatrix a = connection(v, hooks.eigenvector_derivative(t), &defect);
      const RealVector theta = hooks.level_phases(t);
      ComplexMatrix dd = diss ? liouville_dissipator(v, theta, diss(t)) : ComplexMatrix::Zero(d, d);
      return std::make_pair(liouville_hamiltonian(a, theta), std::move(dd));
    };
  }
  return ops;
}

AdiabaticFrameOps build_closed_adiabatic_ops(const SpectralFrame& frame, const NumericPolicy& policy) {
  AdiabaticFrameOps ops;
  ops.grid = frame.grid;
  ops.space = FrameSpace::hilbert;
  ops.levels = frame.levels;
  const auto n = frame.levels;
  const auto dv = vector_derivatives(frame);
  for (std::size_t i = 0; i < frame.grid.size(); ++i) {
    const ComplexMatrix a = connection(frame.vectors[i], dv[i], &ops.derivative_defect);
    ComplexMatrix h = hilbert_hamiltonian(a, frame.level_phase[i]);
    ops.max_hermitian_defect = std::max(ops.max_hermitian_defect, max_asymmetry(h));
    ops.hamiltonian.push_back(std::move(h));
    ops.dissipator.push_back(ComplexMatrix::Zero(n, n));
  }
  check_derivatives(ops, policy);
  if (has_analytic_hooks(frame.hooks)) {
    const FrameHooks hooks = frame.hooks;
    ops.evaluate = [hooks, n](double t) {
      double defect = 0.0;
      const ComplexMatrix a =
          connection(hooks.eigenvectors(t), hooks.eigenvector_derivative(t), &defect);
      return std::make_pair(hilbert_hamiltonian(a, hooks.level_phases(t)),
                            ComplexMatrix(ComplexMatrix::Zero(n, n)));
    };
  }
  return ops;
}

ComplexMatrix reconstruct_density(const SpectralFrame& frame, std::size_t i, const ComplexVector& r) {
  const int n = frame.levels;
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n * n; ++k) {
    rho += r(k) * std::exp(-kI * frame.dynamical_phase(k, i)) * frame.eigenoperator(k, i);
  }
  return rho;
}

ComplexVector frame_coefficients(const SpectralFrame& frame, std::size_t i, const ComplexMatrix& rho) {
  const int n = frame.levels;
  ComplexVector r(n * n);
  for (int k = 0; k < n * n; ++k) {
    const ComplexMatrix phi = frame.eigenoperator(k, i);
    r(k) = (phi.adjoint() * rho).trace() * std::exp(kI * frame.dynamical_phase(k, i));
  }
  return r;
}

}  // namespace eigentrack
