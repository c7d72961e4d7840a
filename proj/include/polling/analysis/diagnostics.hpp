// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ANALYSIS_DIAGNOSTICS_HPP
#define POLLING_ANALYSIS_DIAGNOSTICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polling/error.hpp"
#include "polling/linalg.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"

namespace polling {

/// Row sums of the running products M~_{w(i,l)} ... M~_{w(i,1)} seen from one starting stage.
struct StageRowSums {
  std::size_t stage = 0;
  std::vector<Vector> row_sums;       ///< row_sums[l-1](k) for l = 1..I
  std::vector<std::size_t> first_drop;  ///< d_k(i): first l with p(w(i,l)) = k and r > 0
};

struct ContractionReport {
  double alpha = 0.0;
  std::vector<Matrix> m_tilde;  ///< per stage, weights rho_k
  std::vector<Matrix> m_bar;    ///< per stage, weights rho_{p(l)}
  std::vector<StageRowSums> stages;

  /// Largest row sum of any full-cycle product.
  double max_cycle_row_sum() const {
    double worst = 0.0;
    for (const auto& s : stages) worst = std::max(worst, s.row_sums.back().maxCoeff());
    return worst;
  }
};

/// Midpoint choice 0.5 (1 - rho) / rho.
inline double default_alpha(const SystemModel& m) {
  const double rho = m.total_rho();
  return 0.5 * (1.0 - rho) / rho;
}

/// True when rho_k + (1 + alpha) sum_{l != k} rho_l < 1 for every queue.
inline bool alpha_admissible(const SystemModel& m, double alpha) {
  if (!(alpha >= 0.0)) return false;
  const double rho = m.total_rho();
  for (std::size_t k = 0; k < m.queue_count(); ++k)
    if (!(m.rho(k) + (rho - m.rho(k)) * (1.0 + alpha) < 1.0)) return false;
  return true;
}

/// Stage-l matrix; `tilde` selects rho_k weights in column k, otherwise rho_{p(l)} throughout.
inline Matrix contraction_matrix(const SystemModel& m, const std::vector<double>& r, std::size_t stage,
                                 double alpha, bool tilde = true) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  const auto p = m.queue_at(stage);
  const auto pi = static_cast<Eigen::Index>(p);
  Matrix M = Matrix::Identity(K, K);
  const double denom = 1.0 - m.rho(p);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (k == pi) continue;
    const double w = tilde ? m.rho(static_cast<std::size_t>(k)) : m.rho(p);
    M(pi, k) = r[stage] * w * (1.0 + alpha) / denom;
  }
  M(pi, pi) = 1.0 - r[stage];
  return M;
}

inline ContractionReport contraction_diagnostics(const SystemModel& m, const std::vector<double>& r,
                                                 std::optional<double> alpha_in = std::nullopt) {
  require_valid(m, Bep{r});
  const double alpha = alpha_in ? *alpha_in : default_alpha(m);
  if (!alpha_admissible(m, alpha))
    throw DomainError("alpha = " + std::to_string(alpha) + " violates rho_k + (1+alpha) sum_{l!=k} rho_l < 1");

  const auto I = m.stage_count();
  const auto K = m.queue_count();
  ContractionReport rep;
  rep.alpha = alpha;
  for (std::size_t l = 0; l < I; ++l) {
    rep.m_tilde.push_back(contraction_matrix(m, r, l, alpha, true));
    rep.m_bar.push_back(contraction_matrix(m, r, l, alpha, false));
  }
  const auto& table = m.table();
  for (std::size_t i = 0; i < I; ++i) {
    StageRowSums s;
    s.stage = i;
    s.first_drop.assign(K, 0);
    Matrix prod = Matrix::Identity(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    for (std::size_t l = 1; l <= I; ++l) {
      const auto w = table.lookback(i, l);
      prod = rep.m_tilde[w] * prod;
      s.row_sums.push_back(prod.rowwise().sum());
      const auto k = m.queue_at(w);
      if (s.first_drop[k] == 0 && r[w] > 0.0) s.first_drop[k] = l;
    }
    rep.stages.push_back(std::move(s));
  }
  return rep;
}

}  // namespace polling

#endif  // POLLING_ANALYSIS_DIAGNOSTICS_HPP
