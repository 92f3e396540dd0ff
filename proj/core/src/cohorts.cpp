#include "idid/cohorts.hpp"

#include <ostream>

#include "idid/errors.hpp"

namespace idid {

const char* to_string(SwitchDirection d) noexcept {
  switch (d) {
    case SwitchDirection::in: return "in";
    case SwitchDirection::out: return "out";
    case SwitchDirection::none: break;
  }
  return "none";
}

SwitchProfile detect_first_switch(const TreatmentPath& path) {
  if (path.bins.empty()) throw DomainError("treatment path of unit '" + path.unit + "' is empty");
  SwitchProfile p;
  p.unit = path.unit;
  p.baseline_bin = path.bins.front();
  const int n = static_cast<int>(path.bins.size());
  for (int t = 1; t < n; ++t) {
    if (path.bins[t] != p.baseline_bin) {
      p.first_switch = t;
      p.direction = path.bins[t] > p.baseline_bin ? SwitchDirection::in : SwitchDirection::out;
      if (p.direction == SwitchDirection::in) p.valid_horizons = n - t;
      break;
    }
  }
  return p;
}

SwitchProfile apply_one_sided_window(const SwitchProfile& profile, const TreatmentPath& path) {
  if (!profile.is_switcher_in() || !profile.first_switch) {
    throw DomainError("one-sided window applies to switchers-in only (unit '" + profile.unit + "')");
  }
  SwitchProfile p = profile;
  const int n = static_cast<int>(path.bins.size());
  const int f = *p.first_switch;
  p.trimmed_periods.clear();
  p.trim_from.reset();
  for (int t = f; t < n; ++t) {
    if (path.bins[t] < p.baseline_bin) {
      p.trim_from = t;
      break;
    }
  }
  const int end = p.trim_from.value_or(n);
  p.valid_horizons = end - f;
  for (int t = end; t < n; ++t) p.trimmed_periods.push_back(t);
  return p;
}

std::vector<SwitchProfile> build_profiles(const std::vector<TreatmentPath>& paths) {
  std::vector<SwitchProfile> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    auto p = detect_first_switch(path);
    if (p.is_switcher_in()) p = apply_one_sided_window(p, path);
    out.push_back(std::move(p));
  }
  return out;
}

ControlPool build_control_pool(std::size_t treated, int horizon,
                               const std::vector<SwitchProfile>& profiles,
                               const std::vector<int>& clusters) {
  const auto& g = profiles.at(treated);
  if (!g.is_switcher_in()) throw DomainError("control pools are built for switchers-in only");
  if (horizon < 0 || horizon > g.valid_horizons) {
    throw DomainError("horizon " + std::to_string(horizon) + " outside the valid window of unit '" +
                      g.unit + "'");
  }
  const int last = *g.first_switch - 1 + horizon;
  ControlPool pool{treated, horizon, {}};
  for (std::size_t j = 0; j < profiles.size(); ++j) {
    if (j == treated) continue;
    const auto& c = profiles[j];
    if (c.baseline_bin != g.baseline_bin) continue;
    if (!clusters.empty() && clusters[j] != clusters[treated]) continue;
    if (!c.unchanged_through(last)) continue;
    pool.members.push_back(j);
  }
  return pool;
}

void write_switch_audit(std::ostream& out, const std::vector<SwitchProfile>& profiles,
                        const std::vector<int>& periods, char delimiter) {
  const char d = delimiter;
  out << "unit" << d << "baseline_bin" << d << "first_switch" << d << "direction" << d
      << "valid_horizons" << d << "trim_from" << d << "trim_reason\n";
  for (const auto& p : profiles) {
    out << p.unit << d << p.baseline_bin << d;
    if (p.first_switch) out << periods.at(static_cast<std::size_t>(*p.first_switch));
    out << d << to_string(p.direction) << d << p.valid_horizons << d;
    if (p.trim_from) out << periods.at(static_cast<std::size_t>(*p.trim_from));
    out << d;
    if (p.trim_from) {
      out << "full_reversal";
    } else if (p.direction == SwitchDirection::out) {
      out << "switcher_out_control_only";
    }
    out << '\n';
  }
}

}  // namespace idid
