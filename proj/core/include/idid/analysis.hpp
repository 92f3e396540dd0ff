#pragma once

#include <span>
#include <string>
#include <vector>

#include "idid/estimator.hpp"
#include "idid/inference.hpp"
#include "idid/residualize.hpp"

namespace idid {

/// Everything one (outcome, treatment, bin width) estimation needs.
struct AnalysisInput {
  std::span<const TreatmentPath> paths;
  std::span<const SwitchProfile> profiles;
  /// Empty means a single cluster.
  std::vector<int> clusters;
  PanelMatrix outcome;
  /// Control levels; differenced before residualizing.
  std::vector<PanelMatrix> controls;
};

struct AnalysisOptions {
  EstimatorOptions estimator;
  ResidualizeOptions residualize{ControlVariant::none, ResidualizeScope::bin_within_cluster, 5};
  BootstrapOptions bootstrap;
  bool run_bootstrap = true;
  double z_critical = 1.959963984540054;
};

/// Estimate with bootstrap uncertainty; NaN fields when the bootstrap is
/// off or the statistic was absent in too many replications.
struct EstimateRow {
  int horizon = 0;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double percentile_lo = 0.0;
  double percentile_hi = 0.0;
  std::size_t n = 0;
};

struct EventStudyResult {
  std::vector<EstimateRow> effects;
  std::vector<EstimateRow> normalized;
  /// Mean |Delta_l| next to each normalized row.
  std::vector<double> mean_abs_delta;
  std::vector<EstimateRow> placebos;
  LagWeightTable weights;
  WaldTest joint_placebo;
  bool has_joint_placebo = false;

  struct Ate {
    double estimate = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double percentile_lo = 0.0;
    double percentile_hi = 0.0;
    double p_value = 0.0;
    std::size_t cells = 0;
  } ate;

  int replications = 0;
  int replications_succeeded = 0;
  int replications_failed = 0;

  std::size_t units = 0;
  std::size_t switchers_in = 0;
  std::size_t switchers_out = 0;
  std::size_t never_switchers = 0;
  std::size_t units_estimated = 0;
  std::size_t switchers_without_controls = 0;
  std::size_t below_min_horizons = 0;
  std::size_t trimmed_units = 0;
  std::vector<std::string> warnings;

  PointEstimates point;
  std::vector<AuxRegression> regressions;
};

/// Point estimates on the full sample.
PointEstimates point_estimates(const AnalysisInput& input, const AnalysisOptions& options,
                               std::vector<std::string>* warnings = nullptr,
                               std::vector<AuxRegression>* regressions = nullptr);

/// Point estimates for one resample (the bootstrap statistic).
std::optional<PointEstimates> resample_estimates(const AnalysisInput& input, const AnalysisOptions& options,
                                                 const Resample& draw);

/// Full pipeline for one outcome: residualize (if configured), estimate,
/// bootstrap every estimand, test placebos jointly. Throws EstimationError
/// when no switcher-in yields an estimable cell.
EventStudyResult analyze(const AnalysisInput& input, const AnalysisOptions& options);

}  // namespace idid
