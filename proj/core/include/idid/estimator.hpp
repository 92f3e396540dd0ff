#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idid/cohorts.hpp"
#include "idid/exposure.hpp"
#include "idid/panel.hpp"

namespace idid {

/// Outcome change Y_{t1} - Y_{t0} per unit, either read off levels or
/// accumulated from (possibly residualized) first differences.
class OutcomeChanges {
 public:
  OutcomeChanges() = default;
  static OutcomeChanges from_levels(PanelMatrix levels);
  /// Column 0 of `diffs` is ignored. A change over (t0, t1] is missing when
  /// any difference inside it is missing.
  static OutcomeChanges from_differences(const PanelMatrix& diffs);

  std::optional<double> change(std::size_t unit, int t0, int t1) const;
  /// True when every change of this unit is available.
  bool complete(std::size_t unit) const;
  /// Value whose differences are the changes; meaningful only for complete units.
  double level(std::size_t unit, int t) const {
    return values_(static_cast<Eigen::Index>(unit), static_cast<Eigen::Index>(t));
  }

  std::size_t n_units() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_periods() const noexcept { return static_cast<std::size_t>(values_.cols()); }

 private:
  bool cumulative_ = false;
  PanelMatrix values_;
  Eigen::MatrixXi missing_;
};

/// A set of units entering one estimation. Position i refers to
/// paths[index[i]] / profiles[index[i]]; `outcome` and `clusters` are
/// indexed by position. Bootstrap draws repeat entries of `index`.
struct EstimationSample {
  std::span<const TreatmentPath> paths;
  std::span<const SwitchProfile> profiles;
  std::vector<std::size_t> index;
  std::vector<int> clusters;
  OutcomeChanges outcome;

  std::size_t size() const noexcept { return index.size(); }
  const TreatmentPath& path(std::size_t pos) const { return paths[index[pos]]; }
  const SwitchProfile& profile(std::size_t pos) const { return profiles[index[pos]]; }
};

/// Identity sample over all units. `clusters` empty means a single cluster.
EstimationSample make_sample(std::span<const TreatmentPath> paths,
                             std::span<const SwitchProfile> profiles,
                             const std::vector<int>& clusters, OutcomeChanges outcome);

struct EstimatorOptions {
  /// Event-study horizons reported (1..max_horizon).
  int max_horizon = 7;
  /// Placebo leads computed (1..placebos).
  int placebos = 3;
  /// Switchers-in with fewer valid horizons are left out of every estimand.
  int min_valid_horizons = 1;
};

struct CellEffect {
  std::size_t unit = 0;    ///< sample position
  std::size_t source = 0;  ///< row in paths/profiles
  int horizon = 0;
  double did = 0.0;
  int n_controls = 0;
  /// D_{F-1+l} - D_1.
  double increment = 0.0;
  /// Sum_{k<l} (D_{F+k} - D_1).
  double cumulative_increment = 0.0;
};

struct PlaceboCell {
  std::size_t unit = 0;
  std::size_t source = 0;
  int lead = 0;
  double did = 0.0;
  int n_controls = 0;
};

enum class DropReason { none, missing_treated, no_controls, outside_window, insufficient_pre_periods };
const char* to_string(DropReason r) noexcept;

struct CellResult {
  std::optional<CellEffect> cell;
  DropReason reason = DropReason::none;
};

struct PlaceboResult {
  std::optional<PlaceboCell> cell;
  DropReason reason = DropReason::none;
};

/// Records which outcome changes entered a contrast.
struct ContrastUse {
  std::size_t source = 0;
  int from = 0;
  int to = 0;
  bool treated = false;
};

/// (Y_{g,F-1+l} - Y_{g,F-1}) minus the mean of the same change over the
/// pool. Pool members whose change is unobserved are skipped; the treated
/// unit is never its own control.
CellResult did_gl(const EstimationSample& sample, std::size_t g, int horizon,
                  std::span<const std::size_t> pool, std::vector<ContrastUse>* audit = nullptr);

/// Backward contrast over [F-1-lead, F-1], signed so that a treated unit
/// trending up faster than its controls gives a positive value:
/// (Y_{g,F-1} - Y_{g,F-1-lead}) minus the pool mean of the same.
PlaceboResult placebo_lead(const EstimationSample& sample, std::size_t g, int lead,
                           std::span<const std::size_t> pool,
                           std::vector<ContrastUse>* audit = nullptr);

/// Sum_{k=0}^{l-1} (D_{F+k} - D_1). Throws DomainError outside 1..valid window.
double delta_increment(const TreatmentPath& path, const SwitchProfile& profile, int horizon);

struct DroppedCell {
  std::size_t unit = 0;
  int horizon = 0;  ///< negative for placebo leads
  DropReason reason = DropReason::none;
};

struct CellSet {
  /// Every estimable (g, l) over each unit's full valid window.
  std::vector<CellEffect> effects;
  std::vector<PlaceboCell> placebos;
  std::vector<DroppedCell> dropped;
  std::size_t switchers_in = 0;
  std::size_t switchers_out = 0;
  std::size_t never_switchers = 0;
  std::size_t below_min_horizons = 0;
};

/// Builds every effect and placebo cell. Control pools match on baseline bin
/// and cluster and keep units unchanged through the comparison period.
CellSet compute_cells(const EstimationSample& sample, const EstimatorOptions& options,
                      std::vector<ContrastUse>* audit = nullptr);

struct HorizonEffect {
  int horizon = 0;
  double did = 0.0;
  std::size_t n = 0;
  /// Mean |Delta_{g,l}| over the same cells.
  double mean_abs_delta = 0.0;
  double normalized = 0.0;
};

/// DID_l = mean of cell effects at l, for l = 1..max_horizon with cells.
std::vector<HorizonEffect> event_study(std::span<const CellEffect> cells, int max_horizon);
/// Adds mean |Delta| and DID_l / mean |Delta|.
std::vector<HorizonEffect> normalized_event_study(std::span<const CellEffect> cells, int max_horizon);

struct LagWeightTable {
  std::vector<int> horizons;
  /// weights[i][k] for horizon horizons[i], lag k = 0..horizon-1.
  std::vector<std::vector<double>> weights;
};

/// w_{l,k} = mean over cells at l of |D_{F-1+l-k} - D_1|, divided by mean |Delta_l|.
LagWeightTable lag_weights(const EstimationSample& sample, std::span<const CellEffect> cells,
                           int max_horizon);

/// Sum of cell effects over sum of increments; nullopt without cells or
/// with a zero denominator.
std::optional<double> average_total_effect(std::span<const CellEffect> cells);

struct PlaceboEffect {
  int lead = 0;
  double did = 0.0;
  std::size_t n = 0;
};

std::vector<PlaceboEffect> placebo_study(std::span<const PlaceboCell> cells, int placebos);

struct PointEstimates {
  std::vector<HorizonEffect> horizons;
  std::vector<PlaceboEffect> placebos;
  LagWeightTable weights;
  std::optional<double> ate;
  std::size_t ate_cells = 0;
  std::size_t units_estimated = 0;
  std::size_t switchers_without_cells = 0;
  CellSet cells;
};

PointEstimates estimate(const EstimationSample& sample, const EstimatorOptions& options,
                        std::vector<ContrastUse>* audit = nullptr);

/// Layout: DID_1..L, DID^n_1..L, placebo_1..P, ATE. Absent entries are NaN.
std::vector<double> flatten(const PointEstimates& estimates, const EstimatorOptions& options);

}  // namespace idid
