#pragma once

#include <string>
#include <vector>

#include "idid/cohorts.hpp"
#include "idid/exposure.hpp"
#include "idid/panel.hpp"

namespace idid {

/// Newly switched vs not-yet-switched units at each first-switch period.
struct SooResult {
  double coefficient = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  std::size_t observations = 0;
  std::size_t units = 0;
  std::size_t cohorts = 0;
  std::vector<std::string> warnings;
};

/// Stacks one cross-section per switch cohort F: switchers-in at F (treated)
/// and units unchanged through F. Regresses Y_F on the treated indicator,
/// Y_{F-1}, the pre-baseline features, cohort dummies and cluster dummies;
/// standard errors clustered by unit (CR1, t with G-1 df).
/// Throws DomainError with fewer than two cohorts.
SooResult soo_check(const PanelMatrix& outcome, const std::vector<SwitchProfile>& profiles,
                    const std::vector<std::vector<double>>& features, const std::vector<int>& clusters);

/// Two-way within estimator: slope of the doubly demeaned outcome on the
/// doubly demeaned bin. Requires a complete outcome matrix.
double twfe_estimate(const PanelMatrix& outcome, const std::vector<TreatmentPath>& paths);

}  // namespace idid
