// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_PGF_BUSY_PERIOD_LST_HPP
#define POLLING_PGF_BUSY_PERIOD_LST_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "polling/error.hpp"
#include "polling/model/distribution.hpp"

namespace polling {

struct LstOptions {
  double tol = 1e-15;
  std::size_t max_iters = 100000;
};

/**
 * 1 - E[exp(-u Theta)] for the M/G/1 busy period Theta.
 *
 * Iterates phi <- 1 - S^(u + lambda phi) from phi = 1 (theta = 0), which
 * increases theta monotonically to the minimal root. Working with the
 * complement keeps full relative precision when u is tiny.
 */
inline double busy_period_lst_complement(double lambda, const DistributionSpec& service, double u,
                                         const LstOptions& opt = {}) {
  if (!(u >= 0.0)) throw DomainError("busy-period LST argument must be >= 0");
  if (!(lambda * service.mean() < 1.0)) throw DomainError("busy-period LST needs lambda * E[S] < 1");
  if (u == 0.0) return 0.0;
  const double floor_tol = std::max(opt.tol, 4.0 * std::numeric_limits<double>::epsilon());
  double phi = 1.0;
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    const double next = service.lst_complement(u + lambda * phi);
    const double change = std::abs(next - phi);
    phi = next;
    if (change <= floor_tol * phi) return phi;
  }
  throw ConvergenceError("busy-period LST iteration did not converge within " + std::to_string(opt.max_iters) +
                         " steps");
}

/// E[exp(-u Theta)].
inline double busy_period_lst(double lambda, const DistributionSpec& service, double u, const LstOptions& opt = {}) {
  return 1.0 - busy_period_lst_complement(lambda, service, u, opt);
}

}  // namespace polling

#endif  // POLLING_PGF_BUSY_PERIOD_LST_HPP
