#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "idid/cohorts.hpp"
#include "idid/errors.hpp"

using namespace idid;

namespace {

TreatmentPath path(std::vector<int> bins) { return {"u", std::move(bins), 1.0}; }

}  // namespace

TEST(Cohorts, SwitcherIn) {
  const auto p = detect_first_switch(path({0, 0, 1, 2}));
  EXPECT_EQ(p.direction, SwitchDirection::in);
  ASSERT_TRUE(p.first_switch);
  EXPECT_EQ(*p.first_switch, 2);
  EXPECT_EQ(p.valid_horizons, 2);
  EXPECT_TRUE(p.is_switcher_in());
  EXPECT_TRUE(p.unchanged_through(1));
  EXPECT_FALSE(p.unchanged_through(2));
}

TEST(Cohorts, SwitcherOutAndNever) {
  const auto out = detect_first_switch(path({2, 2, 1, 3}));
  EXPECT_EQ(out.direction, SwitchDirection::out);
  EXPECT_EQ(*out.first_switch, 2);
  EXPECT_EQ(out.valid_horizons, 0);
  const auto never = detect_first_switch(path({1, 1, 1}));
  EXPECT_EQ(never.direction, SwitchDirection::none);
  EXPECT_FALSE(never.first_switch);
  EXPECT_TRUE(never.unchanged_through(100));
  EXPECT_STREQ(to_string(SwitchDirection::out), "out");
}

TEST(Cohorts, PartialReversalKept) {
  const auto p = build_profiles({path({0, 2, 1, 0, 3})})[0];
  EXPECT_EQ(p.valid_horizons, 4);
  EXPECT_FALSE(p.trim_from);
}

TEST(Cohorts, FullReversalTrimmed) {
  const auto p = build_profiles({path({1, 1, 2, 0, 2, 2})})[0];
  EXPECT_EQ(*p.first_switch, 2);
  ASSERT_TRUE(p.trim_from);
  EXPECT_EQ(*p.trim_from, 3);
  EXPECT_EQ(p.valid_horizons, 1);
  EXPECT_EQ(p.trimmed_periods, std::vector<int>({3, 4, 5}));
}

TEST(Cohorts, OneSidedWindowRequiresSwitcherIn) {
  const auto tp = path({0, 0, 0});
  EXPECT_THROW(apply_one_sided_window(detect_first_switch(tp), tp), DomainError);
}

TEST(Cohorts, ControlPoolMatchesBinClusterAndTiming) {
  const std::vector<std::vector<int>> bins{
      {0, 0, 1, 1},  // treated, F=2
      {0, 0, 0, 1},  // F=3
      {0, 0, 0, 0},  // never
      {1, 1, 1, 1},  // other baseline bin
      {0, 0, 0, 0},  // never, other cluster
      {0, -1, -1, -1},  // switcher-out at 1
  };
  const auto profiles = build_profiles(fixtures::paths_from_bins(bins));
  const std::vector<int> clusters{1, 1, 1, 1, 2, 1};
  EXPECT_EQ(build_control_pool(0, 1, profiles, clusters).members, std::vector<std::size_t>({1, 2}));
  EXPECT_EQ(build_control_pool(0, 2, profiles, clusters).members, std::vector<std::size_t>({2}));
  EXPECT_EQ(build_control_pool(0, 0, profiles, clusters).members, std::vector<std::size_t>({1, 2}));
  EXPECT_EQ(build_control_pool(0, 1, profiles, {}).members, std::vector<std::size_t>({1, 2, 4}));
  EXPECT_THROW(build_control_pool(0, 3, profiles, clusters), DomainError);
  EXPECT_THROW(build_control_pool(2, 1, profiles, clusters), DomainError);
}

TEST(Cohorts, SwitchAuditTable) {
  const auto profiles = build_profiles(fixtures::paths_from_bins({{0, 0, 1, -1}, {0, 0, 0, 0}, {1, 0, 0, 0}}));
  std::ostringstream out;
  write_switch_audit(out, profiles, {2010, 2011, 2012, 2013});
  const std::string text = out.str();
  EXPECT_NE(text.find("unit,baseline_bin,first_switch,direction,valid_horizons,trim_from,trim_reason"),
            std::string::npos);
  EXPECT_NE(text.find("u1,0,2012,in,1,2013,full_reversal"), std::string::npos);
  EXPECT_NE(text.find("u2,0,,none,0,,"), std::string::npos);
  EXPECT_NE(text.find("u3,1,2011,out,0,,switcher_out_control_only"), std::string::npos);
}

TEST(CohortsProperty, PoolMembersUnchangedThroughComparisonPeriod) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto panel = fixtures::random_tiny_panel(rng, 8, 7);
    const auto paths = fixtures::paths_from_bins(panel.bins);
    const auto profiles = build_profiles(paths);
    for (std::size_t g = 0; g < profiles.size(); ++g) {
      if (!profiles[g].is_switcher_in()) continue;
      for (int l = 0; l <= profiles[g].valid_horizons; ++l) {
        const int t = *profiles[g].first_switch - 1 + l;
        for (auto h : build_control_pool(g, l, profiles, panel.clusters).members) {
          EXPECT_NE(h, g);
          EXPECT_EQ(paths[h].bins[0], paths[g].bins[0]);
          EXPECT_EQ(panel.clusters[h], panel.clusters[g]);
          for (int s = 0; s <= t; ++s) EXPECT_EQ(paths[h].bins[static_cast<std::size_t>(s)], paths[h].bins[0]);
        }
      }
    }
  }
}
