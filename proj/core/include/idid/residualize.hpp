#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idid/cohorts.hpp"
#include "idid/least_squares.hpp"
#include "idid/panel.hpp"

namespace idid {

enum class ControlVariant { none, linear, quadratic };
enum class ResidualizeScope { bin_within_cluster, bin };

struct ResidualizeOptions {
  ControlVariant variant = ControlVariant::linear;
  ResidualizeScope scope = ResidualizeScope::bin_within_cluster;
  /// A group needs at least (regressors + min_extra_rows) fitting rows;
  /// thinner groups use the pooled regression.
  int min_extra_rows = 5;
};

/// One auxiliary regression of dY on [1, dX, (dX^2), period dummies] over
/// not-yet-switched cells.
struct AuxRegression {
  int baseline_bin = 0;
  std::optional<int> cluster;
  bool pooled = false;
  std::vector<std::string> regressors;
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  /// (row, period) of each design row.
  std::vector<std::pair<std::size_t, int>> cells;
  LeastSquaresFit fit;
};

struct ResidualizedOutcome {
  /// Same shape as the input differences; column 0 missing.
  PanelMatrix residuals;
  std::vector<AuxRegression> regressions;
  std::vector<std::string> warnings;
};

/// Fits the auxiliary regressions on cells with t < F (all t for units that
/// never switch) and replaces every first difference, including post-switch
/// cells, with dY - fitted. A period absent from a regression's fitting
/// sample leaves residuals for that period missing.
///
/// `first_switch[i]` empty means row i never switches. `clusters` may be
/// empty (single cluster).
ResidualizedOutcome residualize_differences(const PanelMatrix& outcome_diffs,
                                            const std::vector<PanelMatrix>& control_diffs,
                                            std::span<const int> baseline_bins,
                                            std::span<const std::optional<int>> first_switch,
                                            const std::vector<int>& clusters,
                                            const ResidualizeOptions& options);

/// Panel-level entry point: differences `outcome` and every control column
/// (time-varying covariates or flows) and residualizes.
ResidualizedOutcome residualize_outcome(const PanelDataset& panel, const std::string& outcome,
                                        const std::vector<std::string>& controls,
                                        const std::vector<SwitchProfile>& profiles,
                                        const std::vector<int>& clusters,
                                        const ResidualizeOptions& options);

}  // namespace idid
