#include "idid/dgp.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "idid/errors.hpp"

namespace idid {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    DgpSpec, n_units, n_periods, first_period, baseline_bins, baseline_weights, never_share,
    switch_out_share, switch_min, switch_max, cohort_schedule, jump_values, jump_weights, step_values,
    step_weights, beta, beta_sd, lag_profile, kernel_power, unit_fe_sd, period_fe_sd, pretrend_slope,
    gamma, covariate_sd, covariate_drift, noise_sd, n_clusters, cluster_period_fe_sd, cluster_separation,
    population, seed)

namespace {

int draw_from(std::mt19937_64& rng, const std::vector<int>& values, const std::vector<double>& weights) {
  if (values.size() == 1) return values.front();
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return values[pick(rng)];
}

void validate(const DgpSpec& s) {
  if (s.n_units < 1 || s.n_periods < 2) throw DomainError("dgp: need at least 1 unit and 2 periods");
  auto same = [](const auto& a, const auto& b, const char* what) {
    if (a.empty() || a.size() != b.size()) throw DomainError(std::string("dgp: ") + what + " values/weights mismatch");
  };
  same(s.baseline_bins, s.baseline_weights, "baseline bin");
  same(s.jump_values, s.jump_weights, "jump");
  same(s.step_values, s.step_weights, "step");
  const int hi = s.switch_max < 0 ? s.n_periods - 1 : s.switch_max;
  if (s.switch_min < 1 || hi < s.switch_min || hi > s.n_periods - 1) {
    throw DomainError("dgp: switch window must lie in [1, n_periods-1]");
  }
  for (int f : s.cohort_schedule) {
    if (f != -1 && (f < 1 || f > s.n_periods - 1)) throw DomainError("dgp: cohort schedule entry out of range");
  }
  if (s.n_clusters < 1) throw DomainError("dgp: n_clusters must be positive");
  if (!(s.population > 0.0)) throw DomainError("dgp: population must be positive");
}

double kernel(double d, double power) {
  if (power == 1.0) return d;
  return (d < 0 ? -1.0 : 1.0) * std::pow(std::abs(d), power);
}

}  // namespace

SimulatedPanel simulate(const DgpSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int n = spec.n_units;
  const int t_count = spec.n_periods;
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(t_count);
  const int switch_hi = spec.switch_max < 0 ? t_count - 1 : spec.switch_max;
  std::uniform_int_distribution<int> switch_time(spec.switch_min, switch_hi);

  std::vector<double> period_fe(static_cast<std::size_t>(t_count));
  for (auto& v : period_fe) v = spec.period_fe_sd * z(rng);
  std::vector<std::vector<double>> cluster_fe(static_cast<std::size_t>(spec.n_clusters),
                                              std::vector<double>(static_cast<std::size_t>(t_count)));
  for (auto& c : cluster_fe) {
    for (auto& v : c) v = spec.cluster_period_fe_sd * z(rng);
  }

  PanelDataset::Parts parts;
  for (int t = 0; t < t_count; ++t) parts.periods.push_back(spec.first_period + t);
  PanelMatrix y(rows, cols);
  PanelMatrix flow(rows, cols);
  PanelMatrix x(rows, cols);
  std::vector<double> pre_mig(static_cast<std::size_t>(n));
  std::vector<double> pre_pop(static_cast<std::size_t>(n));
  static const char* kAttr[] = {"attr_housing", "attr_economy", "attr_urban", "attr_nature", "attr_fiscal"};
  std::vector<std::vector<double>> attr(5, std::vector<double>(static_cast<std::size_t>(n)));

  DgpTruth truth;
  truth.effect = PanelMatrix::Zero(rows, cols);

  for (int i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto ui = static_cast<std::size_t>(i);
    const int cluster = i % spec.n_clusters + 1;
    const int base = draw_from(rng, spec.baseline_bins, spec.baseline_weights);

    std::optional<int> first;
    if (!spec.cohort_schedule.empty()) {
      const int f = spec.cohort_schedule[ui % spec.cohort_schedule.size()];
      if (f >= 1) first = f;
    } else if (unif(rng) >= spec.never_share) {
      first = switch_time(rng);
    }
    const bool goes_out = first && unif(rng) < spec.switch_out_share;

    std::vector<int> bins(static_cast<std::size_t>(t_count), base);
    if (first) {
      const int jump = std::max(1, draw_from(rng, spec.jump_values, spec.jump_weights));
      bins[static_cast<std::size_t>(*first)] = base + (goes_out ? -jump : jump);
      for (int t = *first + 1; t < t_count; ++t) {
        const int step = draw_from(rng, spec.step_values, spec.step_weights);
        bins[static_cast<std::size_t>(t)] = bins[static_cast<std::size_t>(t - 1)] + (goes_out ? -step : step);
      }
    }
    const bool switcher_in = first && !goes_out;

    const double alpha = spec.unit_fe_sd * z(rng);
    const double beta_g = spec.beta + spec.beta_sd * z(rng);
    double xv = z(rng);
    const double centre = spec.cluster_separation * (cluster - 1);
    pre_mig[ui] = centre + z(rng);
    pre_pop[ui] = -centre + z(rng);
    for (auto& a : attr) a[ui] = z(rng);

    double cum_prev = 0.0;
    for (int t = 0; t < t_count; ++t) {
      const auto c = static_cast<Eigen::Index>(t);
      double effect = 0.0;
      for (int k = 0; k <= t; ++k) {
        const double rho = k == 0 ? 1.0
                           : static_cast<std::size_t>(k) <= spec.lag_profile.size()
                               ? spec.lag_profile[static_cast<std::size_t>(k - 1)]
                               : 0.0;
        if (rho == 0.0) continue;
        effect += rho * kernel(bins[static_cast<std::size_t>(t - k)] - base, spec.kernel_power);
      }
      effect *= beta_g;
      truth.effect(r, c) = effect;

      if (t > 0) xv += spec.covariate_sd * z(rng) + (switcher_in ? spec.covariate_drift : 0.0);
      x(r, c) = xv;
      const double trend = switcher_in ? spec.pretrend_slope * t : 0.0;
      y(r, c) = alpha + period_fe[static_cast<std::size_t>(t)] +
                cluster_fe[static_cast<std::size_t>(cluster - 1)][static_cast<std::size_t>(t)] + trend + effect +
                spec.gamma * xv + spec.noise_sd * z(rng);

      const double cum = (bins[static_cast<std::size_t>(t)] + 0.5) * spec.population / 100.0;
      flow(r, c) = cum - cum_prev;
      cum_prev = cum;
    }

    parts.units.push_back("u" + std::to_string(i + 1));
    parts.baseline_population.push_back(spec.population);
    truth.bins.push_back(std::move(bins));
    truth.clusters.push_back(cluster);
  }
  parts.outcomes[DgpColumns::outcome] = std::move(y);
  parts.flows[DgpColumns::flow] = std::move(flow);
  parts.covariates[DgpColumns::covariate] = std::move(x);
  parts.features[DgpColumns::feature_migration] = std::move(pre_mig);
  parts.features[DgpColumns::feature_population] = std::move(pre_pop);
  for (std::size_t j = 0; j < 5; ++j) parts.features[kAttr[j]] = std::move(attr[j]);

  // Truth over every switcher-in's one-sided window.
  std::vector<TreatmentPath> paths;
  for (std::size_t i = 0; i < truth.bins.size(); ++i) paths.push_back({parts.units[i], truth.bins[i], 1.0});
  const auto profiles = build_profiles(paths);
  std::vector<double> sum(static_cast<std::size_t>(t_count), 0.0);
  std::vector<int> count(static_cast<std::size_t>(t_count), 0);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    if (!p.is_switcher_in()) continue;
    for (int l = 1; l <= p.valid_horizons; ++l) {
      const int t = *p.first_switch - 1 + l;
      const double e = truth.effect(static_cast<Eigen::Index>(i), t);
      sum[static_cast<std::size_t>(l)] += e;
      ++count[static_cast<std::size_t>(l)];
      num += e;
      den += truth.bins[i][static_cast<std::size_t>(t)] - p.baseline_bin;
    }
  }
  for (int l = 1; l < t_count; ++l) {
    const auto li = static_cast<std::size_t>(l);
    truth.did.push_back(count[li] ? sum[li] / count[li] : kMissing);
  }
  truth.delta = den != 0.0 ? num / den : kMissing;

  return {PanelDataset::create(std::move(parts)), std::move(truth)};
}

DgpSpec adversarial_twfe_spec() {
  DgpSpec s;
  s.n_units = 120;
  s.n_periods = 10;
  s.cohort_schedule = {2, 4, 6, 8, -1};
  s.jump_values = {1};
  s.step_values = {0};
  s.beta = 1.0;
  // Effect of a held unit of exposure builds up by one beta per year.
  s.lag_profile = std::vector<double>(9, 1.0);
  s.unit_fe_sd = 1.0;
  s.period_fe_sd = 1.0;
  s.noise_sd = 1.0;
  s.seed = 20240601;
  return s;
}

double truth_ate(const DgpTruth& truth, std::span<const CellEffect> cells,
                 std::span<const SwitchProfile> profiles) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : cells) {
    const int t = *profiles[c.source].first_switch - 1 + c.horizon;
    num += truth.effect(static_cast<Eigen::Index>(c.source), t);
    den += c.increment;
  }
  return den != 0.0 ? num / den : kMissing;
}

std::vector<double> truth_event_study(const DgpTruth& truth, std::span<const CellEffect> cells,
                                      std::span<const SwitchProfile> profiles, int max_horizon) {
  std::vector<double> sum(static_cast<std::size_t>(max_horizon), 0.0);
  std::vector<int> count(static_cast<std::size_t>(max_horizon), 0);
  for (const auto& c : cells) {
    if (c.horizon > max_horizon) continue;
    const int t = *profiles[c.source].first_switch - 1 + c.horizon;
    sum[static_cast<std::size_t>(c.horizon - 1)] += truth.effect(static_cast<Eigen::Index>(c.source), t);
    ++count[static_cast<std::size_t>(c.horizon - 1)];
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < sum.size(); ++i) out.push_back(count[i] ? sum[i] / count[i] : kMissing);
  return out;
}

std::string dgp_to_json(const DgpSpec& spec) { return nlohmann::json(spec).dump(2); }

DgpSpec dgp_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dgp spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("dgp spec must be a JSON object");
  const nlohmann::json known = DgpSpec{};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown dgp key '" + key + "'");
  }
  try {
    return j.get<DgpSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid dgp spec: ") + e.what());
  }
}

}  // namespace idid
