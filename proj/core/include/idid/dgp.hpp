#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idid/estimator.hpp"
#include "idid/panel.hpp"

namespace idid {

/// Generative description of a synthetic panel with known effects.
///
/// Outcome:
///   Y_gt = a_g + l_t + l_{c(g),t} + s * t * [g switches in]
///          + b_g * sum_k rho_k * phi(D_{g,t-k} - D_{g,1}) + gamma * X_gt + sigma * e_gt
/// with rho_0 = 1, rho_k = lag_profile[k-1] and phi(d) = sign(d) |d|^kernel_power.
struct DgpSpec {
  int n_units = 100;
  int n_periods = 10;
  int first_period = 2010;

  std::vector<int> baseline_bins{0};
  std::vector<double> baseline_weights{1.0};

  /// Share of units that never change treatment (random assignment only).
  double never_share = 0.2;
  /// Share of switchers whose first move is downward.
  double switch_out_share = 0.0;
  /// First-switch period index drawn uniformly from [switch_min, switch_max];
  /// switch_max < 0 means n_periods - 1.
  int switch_min = 1;
  int switch_max = -1;
  /// When non-empty, unit i switches at cohort_schedule[i % size]
  /// (-1 = never) instead of the random draw.
  std::vector<int> cohort_schedule;

  /// Size of the first move, then the yearly bin increments after it.
  std::vector<int> jump_values{1};
  std::vector<double> jump_weights{1.0};
  std::vector<int> step_values{0};
  std::vector<double> step_weights{1.0};

  double beta = 1.0;
  double beta_sd = 0.0;
  std::vector<double> lag_profile;
  double kernel_power = 1.0;

  double unit_fe_sd = 1.0;
  double period_fe_sd = 1.0;
  double pretrend_slope = 0.0;

  double gamma = 0.0;
  double covariate_sd = 1.0;
  /// Extra yearly drift of X for switchers-in.
  double covariate_drift = 0.0;

  double noise_sd = 0.0;

  int n_clusters = 1;
  double cluster_period_fe_sd = 0.0;
  /// Distance between cluster centres in the two clustering features.
  double cluster_separation = 6.0;

  double population = 1000.0;
  std::uint64_t seed = 1;
};

/// Noise-free effect of the realized treatment path on each cell.
struct DgpTruth {
  PanelMatrix effect;
  std::vector<std::vector<int>> bins;
  std::vector<int> clusters;
  /// True DID_l for l = 1..n_periods-1 over each switcher-in's valid window;
  /// NaN where no unit reaches l.
  std::vector<double> did;
  /// True average total effect per unit of treatment over the same cells.
  double delta = 0.0;
};

struct SimulatedPanel {
  PanelDataset panel;
  DgpTruth truth;
};

/// Column names used by `simulate`.
struct DgpColumns {
  static constexpr const char* outcome = "y";
  static constexpr const char* flow = "flow";
  static constexpr const char* covariate = "x";
  static constexpr const char* feature_migration = "pre_migration";
  static constexpr const char* feature_population = "pre_population";
};

/// Deterministic in the spec (including seed). Flows reproduce the designed
/// bins exactly at bin width 1 (cumulative share = bin + 0.5 percent).
/// Throws DomainError for a degenerate spec.
SimulatedPanel simulate(const DgpSpec& spec);

/// Staggered cohorts with effects that build up over event time; two-way
/// fixed effects misweights them while the intertemporal estimator does not.
DgpSpec adversarial_twfe_spec();

/// True average total effect over exactly the cells an estimation used.
double truth_ate(const DgpTruth& truth, std::span<const CellEffect> cells,
                 std::span<const SwitchProfile> profiles);
/// True DID_l over the cells at each horizon (NaN where none).
std::vector<double> truth_event_study(const DgpTruth& truth, std::span<const CellEffect> cells,
                                      std::span<const SwitchProfile> profiles, int max_horizon);

std::string dgp_to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(std::string_view text);

}  // namespace idid
