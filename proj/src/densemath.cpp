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

#include "eigentrack/densemath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace eigentrack {

const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

void Diagnostics::flag(const std::string& name, const std::string& message) {
  flags.emplace(name, message);
}

void Diagnostics::merge(const Diagnostics& other) {
  for (const auto& [k, v] : other.flags) flags.emplace(k, v);
}

std::string Diagnostics::joined() const {
  std::string out;
  for (const auto& [k, v] : flags) {
    if (!out.empty()) out += '|';
    out += k;
  }
  return out;
}

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t steps)
    : start_(t_start), end_(t_end), steps_(steps), dt_(0.0) {
  if (steps < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
    throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
  }
  dt_ = (t_end - t_start) / static_cast<double>(steps);
}

double TimeGrid::at(std::size_t i) const {
  if (i == steps_) return end_;
  return start_ + static_cast<double>(i) * dt_;
}

std::size_t TimeGrid::interval_of(double t) const {
  if (t <= start_) return 0;
  auto i = static_cast<std::size_t>(std::floor((t - start_) / dt_));
  return std::min(i, steps_ - 1);
}

double max_asymmetry(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    }
  }
  return true;
}

EigenSystem herm_eigendecompose(const ComplexMatrix& a, const NumericPolicy& policy) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    throw std::invalid_argument("herm_eigendecompose: matrix must be square and non-empty");
  }
  if (!all_finite(a)) throw std::invalid_argument("herm_eigendecompose: non-finite entries");
  const double asym = max_asymmetry(a);
  if (asym > policy.hermitian_tol) {
    std::ostringstream msg;
    msg << "herm_eigendecompose: input not Hermitian, max |A - A^dagger| = " << asym;
    throw std::invalid_argument(msg.str());
  }
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("herm_eigendecompose: solver failed");
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  // Deterministic phase: largest component of each column real positive.
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    Eigen::Index best = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&best);
    const cplx c = out.vectors(best, j);
    out.vectors.col(j) *= std::conj(c) / std::abs(c);
  }
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    const double res =
        (sym * out.vectors.col(j) - out.values(j) * out.vectors.col(j)).norm() / scale;
    if (res > policy.eigen_residual_tol) {
      std::ostringstream msg;
      msg << "herm_eigendecompose: residual " << res << " for eigenpair " << j;
      throw NumericError(msg.str());
    }
  }
  return out;
}

ComplexMatrix matrix_exp(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  if (!all_finite(a)) throw std::invalid_argument("matrix_exp: non-finite entries");
  if (a.rows() == 0) return a;
  return a.exp();
}

namespace {

// Pieces of [a, b] split at interior breakpoints and then into substeps.
template <typename Fn>
void for_each_piece(double a, double b, const Stepping& stepping, Fn&& fn) {
  const auto& bp = stepping.breakpoints;
  auto it = std::upper_bound(bp.begin(), bp.end(), a);
  double lo = a;
  const int sub = std::max(1, stepping.substeps);
  auto emit = [&](double x0, double x1) {
    const double h = (x1 - x0) / sub;
    for (int s = 0; s < sub; ++s) {
      const double p0 = x0 + s * h;
      const double p1 = (s + 1 == sub) ? x1 : x0 + (s + 1) * h;
      fn(p0, p1);
    }
  };
  for (; it != bp.end() && *it < b; ++it) {
    if (*it > lo) emit(lo, *it);
    lo = *it;
  }
  if (b > lo) emit(lo, b);
}

}  // namespace

ComplexMatrix time_ordered_product(const Generator& generator, const TimeGrid& grid,
                                   const Stepping& stepping) {
  ComplexMatrix u;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    for_each_piece(grid.at(i), grid.at(i + 1), stepping, [&](double x0, double x1) {
      const ComplexMatrix a = generator(0.5 * (x0 + x1));
      if (u.size() == 0) u = ComplexMatrix::Identity(a.rows(), a.cols());
      u = matrix_exp(a * (x1 - x0)) * u;
    });
  }
  return u;
}

CumulativePropagator::CumulativePropagator(std::vector<ComplexMatrix> forward,
                                           std::vector<ComplexMatrix> inverse)
    : forward_(std::move(forward)), inverse_(std::move(inverse)) {
  if (forward_.size() != inverse_.size()) {
    throw std::invalid_argument("CumulativePropagator: size mismatch");
  }
}

ComplexMatrix CumulativePropagator::between(std::size_t i, std::size_t j) const {
  return forward_.at(i) * inverse_.at(j);
}

CumulativePropagator cumulative_propagator(const Generator& generator, const TimeGrid& grid,
                                           const Stepping& stepping) {
  std::vector<ComplexMatrix> fwd(grid.size()), inv(grid.size());
  const ComplexMatrix a0 = generator(grid.start());
  fwd[0] = inv[0] = ComplexMatrix::Identity(a0.rows(), a0.cols());
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    ComplexMatrix f = fwd[i], b = inv[i];
    for_each_piece(grid.at(i), grid.at(i + 1), stepping, [&](double x0, double x1) {
      const ComplexMatrix a = generator(0.5 * (x0 + x1)) * (x1 - x0);
      f = matrix_exp(a) * f;
      b = b * matrix_exp(-a);
    });
    fwd[i + 1] = std::move(f);
    inv[i + 1] = std::move(b);
  }
  return CumulativePropagator(std::move(fwd), std::move(inv));
}

CumulativePropagator cumulative_propagator(std::span<const ComplexMatrix> samples,
                                           const TimeGrid& grid) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("cumulative_propagator: one sample per grid point required");
  }
  std::vector<ComplexMatrix> fwd(grid.size()), inv(grid.size());
  fwd[0] = inv[0] = ComplexMatrix::Identity(samples[0].rows(), samples[0].cols());
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const ComplexMatrix a = 0.5 * (samples[i] + samples[i + 1]) * grid.dt();
    fwd[i + 1] = matrix_exp(a) * fwd[i];
    inv[i + 1] = inv[i] * matrix_exp(-a);
  }
  return CumulativePropagator(std::move(fwd), std::move(inv));
}

std::vector<ComplexMatrix> grid_derivative(std::span<const ComplexMatrix> f, double dt) {
  const std::size_t n = f.size();
  if (n < 5) throw std::invalid_argument("grid_derivative: need at least 5 samples");
  std::vector<ComplexMatrix> d(n);
  const double s = 1.0 / (12.0 * dt);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
  }
  const std::size_t m = n - 1;
  d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) * s;
  d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) * s;
  return d;
}

std::vector<cplx> cumulative_trapezoid(std::span<const cplx> samples, double dt) {
  std::vector<cplx> out(samples.size(), cplx{});
  for (std::size_t i = 1; i < samples.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * dt * (samples[i - 1] + samples[i]);
  }
  return out;
}

namespace {

template <typename T>
T cubic_midpoint(std::span<const T> f, std::size_t i) {
  const std::size_t n = f.size();
  if (i + 1 >= n) throw std::out_of_range("midpoint_value: interval outside samples");
  if (n < 4) return T(0.5 * (f[i] + f[i + 1]));
  if (i == 0) return T((5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0);
  if (i + 2 == n) {
    return T((f[n - 4] - 5.0 * f[n - 3] + 15.0 * f[n - 2] + 5.0 * f[n - 1]) / 16.0);
  }
  return T((-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0);
}

}  // namespace

cplx midpoint_value(std::span<const cplx> samples, std::size_t i) {
  return cubic_midpoint<cplx>(samples, i);
}

ComplexMatrix midpoint_value(std::span<const ComplexMatrix> samples, std::size_t i) {
  return cubic_midpoint<ComplexMatrix>(samples, i);
}

}  // namespace eigentrack
