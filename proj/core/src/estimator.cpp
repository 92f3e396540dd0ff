#include "idid/estimator.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <set>

#include "idid/errors.hpp"

namespace idid {

OutcomeChanges OutcomeChanges::from_levels(PanelMatrix levels) {
  OutcomeChanges o;
  o.values_ = std::move(levels);
  return o;
}

OutcomeChanges OutcomeChanges::from_differences(const PanelMatrix& diffs) {
  OutcomeChanges o;
  o.cumulative_ = true;
  o.values_ = PanelMatrix::Zero(diffs.rows(), diffs.cols());
  o.missing_ = Eigen::MatrixXi::Zero(diffs.rows(), diffs.cols());
  for (Eigen::Index u = 0; u < diffs.rows(); ++u) {
    for (Eigen::Index t = 1; t < diffs.cols(); ++t) {
      const double d = diffs(u, t);
      o.values_(u, t) = o.values_(u, t - 1) + (is_missing(d) ? 0.0 : d);
      o.missing_(u, t) = o.missing_(u, t - 1) + (is_missing(d) ? 1 : 0);
    }
  }
  return o;
}

std::optional<double> OutcomeChanges::change(std::size_t unit, int t0, int t1) const {
  const auto u = static_cast<Eigen::Index>(unit);
  if (t0 < 0 || t1 < 0 || t0 >= values_.cols() || t1 >= values_.cols()) return std::nullopt;
  if (cumulative_) {
    if (missing_(u, t1) != missing_(u, t0)) return std::nullopt;
    return values_(u, t1) - values_(u, t0);
  }
  const double a = values_(u, t0);
  const double b = values_(u, t1);
  if (is_missing(a) || is_missing(b)) return std::nullopt;
  return b - a;
}

bool OutcomeChanges::complete(std::size_t unit) const {
  const auto u = static_cast<Eigen::Index>(unit);
  if (values_.cols() == 0) return true;
  if (cumulative_) return missing_(u, values_.cols() - 1) == 0;
  for (Eigen::Index t = 0; t < values_.cols(); ++t) {
    if (is_missing(values_(u, t))) return false;
  }
  return true;
}

EstimationSample make_sample(std::span<const TreatmentPath> paths,
                             std::span<const SwitchProfile> profiles,
                             const std::vector<int>& clusters, OutcomeChanges outcome) {
  if (paths.size() != profiles.size()) throw DomainError("paths and profiles differ in length");
  if (outcome.n_units() != paths.size()) throw DomainError("outcome rows differ from unit count");
  EstimationSample s;
  s.paths = paths;
  s.profiles = profiles;
  s.index.resize(paths.size());
  for (std::size_t i = 0; i < s.index.size(); ++i) s.index[i] = i;
  s.clusters = clusters.empty() ? std::vector<int>(paths.size(), 1) : clusters;
  if (s.clusters.size() != paths.size()) throw DomainError("cluster labels differ from unit count");
  s.outcome = std::move(outcome);
  return s;
}

const char* to_string(DropReason r) noexcept {
  switch (r) {
    case DropReason::missing_treated: return "missing_treated_outcome";
    case DropReason::no_controls: return "no_controls";
    case DropReason::outside_window: return "outside_window";
    case DropReason::insufficient_pre_periods: return "insufficient_pre_periods";
    case DropReason::none: break;
  }
  return "none";
}

namespace {

struct PoolMean {
  double sum = 0.0;
  int n = 0;
};

PoolMean pool_change(const EstimationSample& s, std::size_t g, int t0, int t1,
                     std::span<const std::size_t> pool, std::vector<ContrastUse>* audit) {
  PoolMean m;
  const auto self = s.index[g];
  for (auto j : pool) {
    if (j == g || s.index[j] == self) continue;
    if (auto c = s.outcome.change(j, t0, t1)) {
      m.sum += *c;
      ++m.n;
      if (audit) audit->push_back({s.index[j], t0, t1, false});
    }
  }
  return m;
}

}  // namespace

double delta_increment(const TreatmentPath& path, const SwitchProfile& profile, int horizon) {
  if (!profile.first_switch || horizon < 1 || horizon > profile.valid_horizons) {
    throw DomainError("horizon " + std::to_string(horizon) + " outside the valid window of unit '" +
                      profile.unit + "'");
  }
  const int f = *profile.first_switch;
  double total = 0.0;
  for (int k = 0; k < horizon; ++k) total += path.bins[static_cast<std::size_t>(f + k)] - profile.baseline_bin;
  return total;
}

namespace {

template <class PoolFn>
CellResult did_gl_with(const EstimationSample& sample, std::size_t g, int horizon, PoolFn&& pool_mean,
                       std::vector<ContrastUse>* audit) {
  const auto& prof = sample.profile(g);
  if (!prof.is_switcher_in() || horizon < 1 || horizon > prof.valid_horizons) {
    return {std::nullopt, DropReason::outside_window};
  }
  const int t0 = *prof.first_switch - 1;
  const int t1 = t0 + horizon;
  const auto treated = sample.outcome.change(g, t0, t1);
  if (!treated) return {std::nullopt, DropReason::missing_treated};
  const PoolMean controls = pool_mean(t0, t1);
  if (controls.n == 0) return {std::nullopt, DropReason::no_controls};
  if (audit) audit->push_back({sample.index[g], t0, t1, true});

  const auto& path = sample.path(g);
  CellEffect cell;
  cell.unit = g;
  cell.source = sample.index[g];
  cell.horizon = horizon;
  cell.did = *treated - controls.sum / controls.n;
  cell.n_controls = controls.n;
  cell.increment = path.bins[static_cast<std::size_t>(t1)] - prof.baseline_bin;
  cell.cumulative_increment = delta_increment(path, prof, horizon);
  return {cell, DropReason::none};
}

template <class PoolFn>
PlaceboResult placebo_lead_with(const EstimationSample& sample, std::size_t g, int lead, PoolFn&& pool_mean,
                                std::vector<ContrastUse>* audit) {
  const auto& prof = sample.profile(g);
  if (!prof.is_switcher_in() || lead < 1) return {std::nullopt, DropReason::outside_window};
  const int end = *prof.first_switch - 1;
  const int start = end - lead;
  if (start < 0) return {std::nullopt, DropReason::insufficient_pre_periods};
  const auto treated = sample.outcome.change(g, start, end);
  if (!treated) return {std::nullopt, DropReason::missing_treated};
  const PoolMean controls = pool_mean(start, end);
  if (controls.n == 0) return {std::nullopt, DropReason::no_controls};
  if (audit) audit->push_back({sample.index[g], start, end, true});
  return {PlaceboCell{g, sample.index[g], lead, *treated - controls.sum / controls.n, controls.n},
          DropReason::none};
}

}  // namespace

CellResult did_gl(const EstimationSample& sample, std::size_t g, int horizon,
                  std::span<const std::size_t> pool, std::vector<ContrastUse>* audit) {
  return did_gl_with(
      sample, g, horizon, [&](int t0, int t1) { return pool_change(sample, g, t0, t1, pool, audit); }, audit);
}

PlaceboResult placebo_lead(const EstimationSample& sample, std::size_t g, int lead,
                           std::span<const std::size_t> pool, std::vector<ContrastUse>* audit) {
  return placebo_lead_with(
      sample, g, lead, [&](int t0, int t1) { return pool_change(sample, g, t0, t1, pool, audit); }, audit);
}

CellSet compute_cells(const EstimationSample& sample, const EstimatorOptions& options,
                      std::vector<ContrastUse>* audit) {
  CellSet out;
  const auto m = sample.size();

  // Matching groups sorted by first-switch period; never-switchers last.
  struct Group {
    std::vector<std::size_t> members;
    std::vector<int> first_switch;
    // suffix(k, t): sum of levels at t over members[k..]; filled only when
    // every member is complete and no audit is requested.
    Eigen::MatrixXd suffix;
  };
  std::map<std::pair<int, int>, Group> groups;
  auto switch_key = [](const SwitchProfile& p) { return p.first_switch.value_or(INT_MAX); };
  for (std::size_t i = 0; i < m; ++i) {
    groups[{sample.profile(i).baseline_bin, sample.clusters[i]}].members.push_back(i);
  }
  for (auto& [_, grp] : groups) {
    std::stable_sort(grp.members.begin(), grp.members.end(), [&](std::size_t a, std::size_t b) {
      return switch_key(sample.profile(a)) < switch_key(sample.profile(b));
    });
    for (auto i : grp.members) grp.first_switch.push_back(switch_key(sample.profile(i)));
    if (audit) continue;
    const bool complete = std::all_of(grp.members.begin(), grp.members.end(),
                                      [&](std::size_t i) { return sample.outcome.complete(i); });
    if (!complete) continue;
    const auto k = static_cast<Eigen::Index>(grp.members.size());
    const auto t_count = static_cast<Eigen::Index>(sample.outcome.n_periods());
    grp.suffix = Eigen::MatrixXd::Zero(k + 1, t_count);
    for (Eigen::Index r = k - 1; r >= 0; --r) {
      const auto u = grp.members[static_cast<std::size_t>(r)];
      for (Eigen::Index t = 0; t < t_count; ++t) {
        grp.suffix(r, t) = grp.suffix(r + 1, t) + sample.outcome.level(u, static_cast<int>(t));
      }
    }
  }
  // Offset of the first member with F > t, i.e. unchanged through t.
  auto offset_after = [](const Group& grp, int t) {
    const auto it = std::upper_bound(grp.first_switch.begin(), grp.first_switch.end(), t);
    return static_cast<std::size_t>(it - grp.first_switch.begin());
  };
  auto pool_mean = [&](const Group& grp, std::size_t g, std::size_t offset, int t0, int t1) {
    if (grp.suffix.size() == 0) {
      return pool_change(sample, g, t0, t1, std::span<const std::size_t>(grp.members).subspan(offset), audit);
    }
    // Drop g and its bootstrap copies, which sit in the run sharing g's F.
    const auto self = sample.index[g];
    const auto run = std::equal_range(grp.first_switch.begin(), grp.first_switch.end(),
                                      switch_key(sample.profile(g)));
    const auto lo = std::max(offset, static_cast<std::size_t>(run.first - grp.first_switch.begin()));
    const auto hi = static_cast<std::size_t>(run.second - grp.first_switch.begin());
    int copies = 0;
    for (auto k = lo; k < hi; ++k) copies += sample.index[grp.members[k]] == self ? 1 : 0;
    const auto o = static_cast<Eigen::Index>(offset);
    PoolMean m;
    m.n = static_cast<int>(grp.members.size() - offset) - copies;
    if (m.n <= 0) return PoolMean{};
    m.sum = grp.suffix(o, t1) - grp.suffix(o, t0) -
            copies * (sample.outcome.level(g, t1) - sample.outcome.level(g, t0));
    return m;
  };

  for (std::size_t g = 0; g < m; ++g) {
    const auto& prof = sample.profile(g);
    switch (prof.direction) {
      case SwitchDirection::none: ++out.never_switchers; continue;
      case SwitchDirection::out: ++out.switchers_out; continue;
      case SwitchDirection::in: ++out.switchers_in; break;
    }
    if (prof.valid_horizons < options.min_valid_horizons) {
      ++out.below_min_horizons;
      continue;
    }
    const auto& grp = groups.at({prof.baseline_bin, sample.clusters[g]});
    const int f = *prof.first_switch;
    for (int l = 1; l <= prof.valid_horizons; ++l) {
      const auto offset = offset_after(grp, f - 1 + l);
      auto r = did_gl_with(
          sample, g, l, [&](int t0, int t1) { return pool_mean(grp, g, offset, t0, t1); }, audit);
      if (r.cell) {
        out.effects.push_back(*r.cell);
      } else {
        out.dropped.push_back({g, l, r.reason});
      }
    }
    const auto placebo_offset = offset_after(grp, f - 1);
    for (int p = 1; p <= options.placebos; ++p) {
      auto r = placebo_lead_with(
          sample, g, p, [&](int t0, int t1) { return pool_mean(grp, g, placebo_offset, t0, t1); }, audit);
      if (r.cell) {
        out.placebos.push_back(*r.cell);
      } else {
        out.dropped.push_back({g, -p, r.reason});
      }
    }
  }
  return out;
}

std::vector<HorizonEffect> event_study(std::span<const CellEffect> cells, int max_horizon) {
  std::vector<HorizonEffect> acc(static_cast<std::size_t>(std::max(max_horizon, 0)));
  for (const auto& c : cells) {
    if (c.horizon < 1 || c.horizon > max_horizon) continue;
    auto& h = acc[static_cast<std::size_t>(c.horizon - 1)];
    h.did += c.did;
    h.mean_abs_delta += std::abs(c.cumulative_increment);
    ++h.n;
  }
  std::vector<HorizonEffect> out;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto h = acc[i];
    if (h.n == 0) continue;
    h.horizon = static_cast<int>(i) + 1;
    h.did /= static_cast<double>(h.n);
    h.mean_abs_delta /= static_cast<double>(h.n);
    h.normalized = 0.0;
    out.push_back(h);
  }
  return out;
}

std::vector<HorizonEffect> normalized_event_study(std::span<const CellEffect> cells, int max_horizon) {
  auto out = event_study(cells, max_horizon);
  for (auto& h : out) {
    if (!(h.mean_abs_delta > 0.0)) {
      throw EstimationError("zero mean treatment increment at horizon " + std::to_string(h.horizon));
    }
    h.normalized = h.did / h.mean_abs_delta;
  }
  return out;
}

LagWeightTable lag_weights(const EstimationSample& sample, std::span<const CellEffect> cells,
                           int max_horizon) {
  LagWeightTable table;
  const auto horizons = event_study(cells, max_horizon);
  for (const auto& h : horizons) {
    std::vector<double> w(static_cast<std::size_t>(h.horizon), 0.0);
    for (const auto& c : cells) {
      if (c.horizon != h.horizon) continue;
      const auto& prof = sample.profiles[c.source];
      const auto& path = sample.paths[c.source];
      const int t = *prof.first_switch - 1 + h.horizon;
      for (int k = 0; k < h.horizon; ++k) {
        w[static_cast<std::size_t>(k)] +=
            std::abs(path.bins[static_cast<std::size_t>(t - k)] - prof.baseline_bin);
      }
    }
    for (double& v : w) v = v / static_cast<double>(h.n) / h.mean_abs_delta;
    table.horizons.push_back(h.horizon);
    table.weights.push_back(std::move(w));
  }
  return table;
}

std::optional<double> average_total_effect(std::span<const CellEffect> cells) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : cells) {
    num += c.did;
    den += c.increment;
  }
  if (cells.empty() || den == 0.0) return std::nullopt;
  return num / den;
}

std::vector<PlaceboEffect> placebo_study(std::span<const PlaceboCell> cells, int placebos) {
  std::vector<PlaceboEffect> acc(static_cast<std::size_t>(std::max(placebos, 0)));
  for (const auto& c : cells) {
    if (c.lead < 1 || c.lead > placebos) continue;
    auto& p = acc[static_cast<std::size_t>(c.lead - 1)];
    p.did += c.did;
    ++p.n;
  }
  std::vector<PlaceboEffect> out;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].n == 0) continue;
    out.push_back({static_cast<int>(i) + 1, acc[i].did / static_cast<double>(acc[i].n), acc[i].n});
  }
  return out;
}

PointEstimates estimate(const EstimationSample& sample, const EstimatorOptions& options,
                        std::vector<ContrastUse>* audit) {
  PointEstimates est;
  est.cells = compute_cells(sample, options, audit);
  const auto& effects = est.cells.effects;
  est.horizons = normalized_event_study(effects, options.max_horizon);
  est.placebos = placebo_study(est.cells.placebos, options.placebos);
  est.weights = lag_weights(sample, effects, options.max_horizon);
  est.ate = average_total_effect(effects);
  est.ate_cells = effects.size();
  std::set<std::size_t> units;
  for (const auto& c : effects) units.insert(c.unit);
  est.units_estimated = units.size();
  est.switchers_without_cells =
      est.cells.switchers_in - est.cells.below_min_horizons - est.units_estimated;
  return est;
}

std::vector<double> flatten(const PointEstimates& estimates, const EstimatorOptions& options) {
  const auto l = static_cast<std::size_t>(options.max_horizon);
  const auto p = static_cast<std::size_t>(options.placebos);
  std::vector<double> out(2 * l + p + 1, kMissing);
  for (const auto& h : estimates.horizons) {
    out[static_cast<std::size_t>(h.horizon - 1)] = h.did;
    out[l + static_cast<std::size_t>(h.horizon - 1)] = h.normalized;
  }
  for (const auto& pl : estimates.placebos) out[2 * l + static_cast<std::size_t>(pl.lead - 1)] = pl.did;
  if (estimates.ate) out.back() = *estimates.ate;
  return out;
}

}  // namespace idid
