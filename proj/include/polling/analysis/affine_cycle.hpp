// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ANALYSIS_AFFINE_CYCLE_HPP
#define POLLING_ANALYSIS_AFFINE_CYCLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "polling/error.hpp"
#include "polling/linalg.hpp"

namespace polling {

/// Iteration controls shared by the fixed-point solvers.
struct SolverOptions {
  double tol = 1e-12;
  std::size_t max_iters = 1'000'000;
};

/// x -> A x + b, the map carrying the state at one polling epoch to the next.
struct AffineStage {
  Matrix A;
  Vector b;

  Vector apply(const Vector& x) const { return A * x + b; }
};

namespace detail {

inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Max-norm change test, relative to the iterate's magnitude once it exceeds 1
/// so that large-scale systems (switchovers scaled by n) still converge at
/// double precision.
inline bool settled(const Vector& prev, const Vector& next, double tol) {
  return max_abs(next - prev) < tol * std::max(1.0, max_abs(next));
}

}  // namespace detail

/// One full cycle x -> T_{I-1}(... T_0(x)) as a single affine map.
inline AffineStage compose_cycle(const std::vector<AffineStage>& stages) {
  const auto n = stages.front().b.size();
  AffineStage cycle{Matrix::Identity(n, n), Vector::Zero(n)};
  for (const auto& st : stages) {
    cycle.A = st.A * cycle.A;
    cycle.b = st.A * cycle.b + st.b;
  }
  return cycle;
}

inline double spectral_radius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// States at every polling epoch (row i = epoch of stage i) given the state at stage 0.
inline Matrix propagate(const std::vector<AffineStage>& stages, const Vector& start) {
  Matrix out(static_cast<Eigen::Index>(stages.size()), start.size());
  Vector x = start;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.transpose();
    x = stages[i].apply(x);
  }
  return out;
}

struct CycleFixedPoint {
  Vector x;               ///< fixed point at the epoch of stage 0
  std::size_t cycles = 0;  ///< full-cycle applications performed
};

/// Successive application of the cycle map from `start` until the max-norm
/// change drops below tolerance.
inline CycleFixedPoint iterate_cycle(const std::vector<AffineStage>& stages, Vector start,
                                     const SolverOptions& opt) {
  Vector x = std::move(start);
  for (std::size_t c = 1; c <= opt.max_iters; ++c) {
    Vector next = x;
    for (const auto& st : stages) next = st.apply(next);
    if (!next.allFinite())
      throw ConvergenceError("cycle iteration diverged after " + std::to_string(c) + " cycles");
    if (detail::settled(x, next, opt.tol)) return {next, c};
    x = std::move(next);
  }
  throw ConvergenceError("cycle iteration did not converge within " + std::to_string(opt.max_iters) +
                         " cycles");
}

/// Direct solve of (I - A) x = b for the composed cycle map.
inline Vector solve_cycle_direct(const std::vector<AffineStage>& stages) {
  const auto cycle = compose_cycle(stages);
  const auto n = cycle.b.size();
  return (Matrix::Identity(n, n) - cycle.A).partialPivLu().solve(cycle.b);
}

}  // namespace polling

#endif  // POLLING_ANALYSIS_AFFINE_CYCLE_HPP
