#include "idid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "idid/errors.hpp"

namespace idid {
namespace {

struct Gathered {
  PanelMatrix outcome;
  std::vector<PanelMatrix> controls;
};

Gathered gather(const AnalysisInput& input, const std::vector<std::size_t>& rows) {
  Gathered g;
  const auto n = static_cast<Eigen::Index>(rows.size());
  auto take = [&](const PanelMatrix& m) {
    PanelMatrix out(n, m.cols());
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = m.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
    return out;
  };
  g.outcome = take(input.outcome);
  for (const auto& c : input.controls) g.controls.push_back(take(c));
  return g;
}

OutcomeChanges outcome_changes(const AnalysisInput& input, const AnalysisOptions& options,
                               const std::vector<std::size_t>& rows, const std::vector<int>& clusters,
                               PanelMatrix levels, std::vector<PanelMatrix> controls,
                               std::vector<std::string>* warnings, std::vector<AuxRegression>* regressions) {
  if (options.residualize.variant == ControlVariant::none) return OutcomeChanges::from_levels(std::move(levels));
  std::vector<PanelMatrix> dx;
  for (const auto& c : controls) dx.push_back(first_difference(c));
  std::vector<int> bins;
  std::vector<std::optional<int>> first;
  for (auto r : rows) {
    bins.push_back(input.profiles[r].baseline_bin);
    first.push_back(input.profiles[r].first_switch);
  }
  auto res = residualize_differences(first_difference(levels), dx, bins, first, clusters, options.residualize);
  if (warnings) warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
  if (regressions) *regressions = std::move(res.regressions);
  return OutcomeChanges::from_differences(res.residuals);
}

EstimationSample sample_for(const AnalysisInput& input, const Resample& draw, OutcomeChanges changes) {
  EstimationSample s;
  s.paths = input.paths;
  s.profiles = input.profiles;
  s.index = draw.units;
  s.clusters = draw.clusters;
  s.outcome = std::move(changes);
  return s;
}

std::vector<int> base_clusters(const AnalysisInput& input) {
  return input.clusters.empty() ? std::vector<int>(input.paths.size(), 1) : input.clusters;
}

}  // namespace

PointEstimates point_estimates(const AnalysisInput& input, const AnalysisOptions& options,
                               std::vector<std::string>* warnings, std::vector<AuxRegression>* regressions) {
  if (input.paths.size() != input.profiles.size() ||
      static_cast<std::size_t>(input.outcome.rows()) != input.paths.size()) {
    throw DomainError("analysis input dimensions disagree");
  }
  const auto clusters = base_clusters(input);
  const auto draw = full_sample(clusters);
  auto changes = outcome_changes(input, options, draw.units, clusters, input.outcome, input.controls, warnings,
                                 regressions);
  return estimate(sample_for(input, draw, std::move(changes)), options.estimator);
}

std::optional<PointEstimates> resample_estimates(const AnalysisInput& input, const AnalysisOptions& options,
                                                 const Resample& draw) {
  auto g = gather(input, draw.units);
  auto changes = outcome_changes(input, options, draw.units, draw.clusters, std::move(g.outcome),
                                 std::move(g.controls), nullptr, nullptr);
  auto est = estimate(sample_for(input, draw, std::move(changes)), options.estimator);
  if (!est.ate) return std::nullopt;
  return est;
}

EventStudyResult analyze(const AnalysisInput& input, const AnalysisOptions& options) {
  EventStudyResult out;
  out.point = point_estimates(input, options, &out.warnings, &out.regressions);
  const auto& pt = out.point;
  if (!pt.ate) throw EstimationError("no switcher-in has an estimable cell");

  const auto& opt = options.estimator;
  const auto l = static_cast<std::size_t>(opt.max_horizon);
  const auto p = static_cast<std::size_t>(opt.placebos);

  BootstrapResult boot;
  if (options.run_bootstrap) {
    boot = bootstrap_inference(
        [&](const Resample& draw) -> std::optional<std::vector<double>> {
          auto est = resample_estimates(input, options, draw);
          if (!est) return std::nullopt;
          return flatten(*est, opt);
        },
        base_clusters(input), options.bootstrap);
    out.replications = boot.requested;
    out.replications_succeeded = boot.succeeded;
    out.replications_failed = boot.failed;
    if (boot.failed > 0) {
      out.warnings.push_back(std::to_string(boot.failed) + " bootstrap replication(s) had no estimable cell");
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto row = [&](int h, double est, std::size_t column, std::size_t n) {
    EstimateRow r{h, est, nan, nan, nan, nan, nan, n};
    if (options.run_bootstrap && column < boot.se.size()) {
      r.se = boot.se[column];
      r.percentile_lo = boot.percentile_lo[column];
      r.percentile_hi = boot.percentile_hi[column];
    }
    r.ci_lo = est - options.z_critical * r.se;
    r.ci_hi = est + options.z_critical * r.se;
    return r;
  };

  for (const auto& h : pt.horizons) {
    const auto i = static_cast<std::size_t>(h.horizon - 1);
    out.effects.push_back(row(h.horizon, h.did, i, h.n));
    out.normalized.push_back(row(h.horizon, h.normalized, l + i, h.n));
    out.mean_abs_delta.push_back(h.mean_abs_delta);
  }
  std::vector<std::size_t> placebo_columns;
  std::vector<double> placebo_values;
  for (const auto& pl : pt.placebos) {
    const auto column = 2 * l + static_cast<std::size_t>(pl.lead - 1);
    out.placebos.push_back(row(pl.lead, pl.did, column, pl.n));
    placebo_columns.push_back(column);
    placebo_values.push_back(pl.did);
  }
  out.weights = pt.weights;

  const auto ate_row = row(0, *pt.ate, 2 * l + p, pt.ate_cells);
  out.ate = {ate_row.estimate, ate_row.se,
             ate_row.ci_lo, ate_row.ci_hi,
             ate_row.percentile_lo, ate_row.percentile_hi,
             options.run_bootstrap ? normal_p_value(ate_row.estimate, ate_row.se) : nan, pt.ate_cells};

  if (options.run_bootstrap && !placebo_values.empty()) {
    const auto cov = replicate_covariance(boot, placebo_columns);
    // Rounding noise in an exactly parallel panel must not read as a pre-trend.
    double scale = 0.0;
    for (Eigen::Index i = 0; i < input.outcome.size(); ++i) {
      const double v = input.outcome.data()[i];
      if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    }
    const auto clusters = base_clusters(input);
    const auto blocks = options.bootstrap.level == ResampleLevel::cluster
                            ? std::set<int>(clusters.begin(), clusters.end()).size()
                            : clusters.size();
    const int max_rank = static_cast<int>(blocks) - 1;
    out.joint_placebo = joint_placebo_test(placebo_values, cov, 1e-10 * scale, max_rank);
    if (max_rank < static_cast<int>(placebo_values.size())) {
      out.warnings.push_back("joint placebo test limited to " + std::to_string(max_rank) + " of " +
                             std::to_string(placebo_values.size()) + " directions by " + std::to_string(blocks) +
                             " resampled blocks");
    }
    out.has_joint_placebo = true;
  }

  out.units = input.paths.size();
  out.switchers_in = pt.cells.switchers_in;
  out.switchers_out = pt.cells.switchers_out;
  out.never_switchers = pt.cells.never_switchers;
  out.units_estimated = pt.units_estimated;
  out.switchers_without_controls = pt.switchers_without_cells;
  out.below_min_horizons = pt.cells.below_min_horizons;
  for (const auto& prof : input.profiles) out.trimmed_units += prof.trim_from ? 1 : 0;
  return out;
}

}  // namespace idid
