#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idid/clustering.hpp"
#include "idid/exposure.hpp"

namespace idid {

enum class SwitchDirection { none, in, out };

const char* to_string(SwitchDirection d) noexcept;

/// First-switch summary of one unit. Period fields are column indices into
/// the panel's period grid.
struct SwitchProfile {
  std::string unit;
  int baseline_bin = 0;
  std::optional<int> first_switch;
  SwitchDirection direction = SwitchDirection::none;
  /// Horizons 1..valid_horizons are estimable: F-1+l stays inside the panel
  /// and the path never dipped strictly below baseline up to F-1+l.
  int valid_horizons = 0;
  /// First period strictly below baseline after the switch (full reversal).
  std::optional<int> trim_from;
  std::vector<int> trimmed_periods;

  bool is_switcher_in() const noexcept { return direction == SwitchDirection::in; }
  /// True when this unit's treatment is still at baseline at period `t`.
  bool unchanged_through(int t) const noexcept { return !first_switch || *first_switch > t; }
};

/// F = first period whose bin differs from the period-one bin.
SwitchProfile detect_first_switch(const TreatmentPath& path);

/// Restricts a switcher-in to horizons where the path stays weakly above
/// its baseline bin and trims every period from the first strict dip on.
/// Throws DomainError when the profile is not a switcher-in.
SwitchProfile apply_one_sided_window(const SwitchProfile& profile, const TreatmentPath& path);

/// detect_first_switch, then apply_one_sided_window for switchers-in.
std::vector<SwitchProfile> build_profiles(const std::vector<TreatmentPath>& paths);

struct ControlPool {
  std::size_t treated = 0;
  int horizon = 0;
  std::vector<std::size_t> members;
};

/// Units with the treated unit's baseline bin and cluster whose treatment
/// has not changed by F-1+horizon. Horizon 0 gives the pool unchanged
/// through F-1, used for placebo leads. `clusters` may be empty (one cluster).
ControlPool build_control_pool(std::size_t treated, int horizon,
                               const std::vector<SwitchProfile>& profiles,
                               const std::vector<int>& clusters);

/// Delimited audit table: unit, baseline bin, first switch, direction,
/// valid horizons, trim start and reason.
void write_switch_audit(std::ostream& out, const std::vector<SwitchProfile>& profiles,
                        const std::vector<int>& periods, char delimiter = ',');

}  // namespace idid
