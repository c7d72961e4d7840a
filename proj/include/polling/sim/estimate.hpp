// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_SIM_ESTIMATE_HPP
#define POLLING_SIM_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "polling/error.hpp"
#include "polling/sim/simulator.hpp"

namespace polling {

struct MomentEstimate {
  double point = 0.0;
  double ci_halfwidth = 0.0;  ///< at the requested confidence level (95% unless stated)
  std::size_t batches = 0;

  bool covers(double value, double widen = 1.0) const {
    return std::abs(value - point) <= widen * ci_halfwidth;
  }
};

struct BatchMeansOptions {
  std::size_t batches = 20;
  std::size_t min_batches = 10;
  std::size_t min_batch_size = 10;
  double confidence = 0.95;
};

/// Number of batches used for `n` observations: 20, fewer below 200 observations, never under 10.
inline std::size_t batch_count(std::size_t n, const BatchMeansOptions& opt = {}) {
  if (n < opt.min_batches) throw DomainError("need at least " + std::to_string(opt.min_batches) + " observations");
  return std::clamp(n / opt.min_batch_size, opt.min_batches, opt.batches);
}

/// Batch-means estimate of the mean of `x`; leading observations that do not fill a batch are dropped.
inline MomentEstimate batch_means(std::span<const double> x, const BatchMeansOptions& opt = {}) {
  const std::size_t b = batch_count(x.size(), opt);
  const std::size_t size = x.size() / b;
  const std::size_t skip = x.size() - b * size;
  std::vector<double> means(b, 0.0);
  for (std::size_t j = 0; j < b; ++j) {
    double s = 0.0;
    for (std::size_t t = 0; t < size; ++t) s += x[skip + j * size + t];
    means[j] = s / static_cast<double>(size);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  const double sd = std::sqrt(ss / static_cast<double>(b - 1));
  const boost::math::students_t tdist(static_cast<double>(b - 1));
  const double t = boost::math::quantile(boost::math::complement(tdist, (1.0 - opt.confidence) / 2.0));
  return {grand, t * sd / std::sqrt(static_cast<double>(b)), b};
}

/// Estimates of E[Q_k(A_i)^p] (stages by rows) and E[B_i^p].
struct MomentTable {
  int p = 1;
  std::vector<std::vector<MomentEstimate>> queue;  ///< [stage][queue]
  std::vector<MomentEstimate> busy;                ///< [stage]
};

inline MomentTable estimate_moments(const StageSampleSet& s, int p, const BatchMeansOptions& opt = {}) {
  if (p < 1) throw DomainError("moment order must be >= 1");
  const std::size_t n = s.observations();
  if (n == 0) throw DomainError("no observations to estimate from");
  MomentTable out;
  out.p = p;
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < s.stages; ++i) {
    std::vector<MomentEstimate> row;
    for (std::size_t k = 0; k < s.queues; ++k) {
      for (std::size_t c = 0; c < n; ++c) buf[c] = std::pow(static_cast<double>(s.q(i, c, k)), p);
      row.push_back(batch_means(buf, opt));
    }
    out.queue.push_back(std::move(row));
    for (std::size_t c = 0; c < n; ++c) buf[c] = std::pow(s.busy[i][c], p);
    out.busy.push_back(batch_means(buf, opt));
  }
  return out;
}

/// Mean cycle length with its batch-means interval.
inline MomentEstimate estimate_cycle_length(const StageSampleSet& s, const BatchMeansOptions& opt = {}) {
  return batch_means(s.cycle_lengths, opt);
}

}  // namespace polling

#endif  // POLLING_SIM_ESTIMATE_HPP
