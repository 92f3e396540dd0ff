#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "idid/errors.hpp"
#include "idid/inference.hpp"

using namespace idid;

TEST(Inference, QuantileType7) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({1, std::nan(""), 3}, 0.5), 2.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(Inference, NormalPValue) {
  EXPECT_NEAR(normal_p_value(1.959963984540054, 1.0), 0.05, 1e-12);
  EXPECT_NEAR(normal_p_value(0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(normal_p_value(-2.0, 2.0), normal_p_value(1.0, 1.0), 1e-15);
}

TEST(Inference, UnitDrawsKeepClusterKeys) {
  const std::vector<int> clusters{1, 1, 2, 2, 3};
  const auto a = draw_resample(clusters, ResampleLevel::unit, 7, 3);
  const auto b = draw_resample(clusters, ResampleLevel::unit, 7, 3);
  EXPECT_EQ(a.units, b.units);
  ASSERT_EQ(a.units.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.clusters[i], clusters[a.units[i]]);
  EXPECT_NE(draw_resample(clusters, ResampleLevel::unit, 7, 4).units, a.units);
}

TEST(Inference, ClusterDrawsRelabelBlocks) {
  const std::vector<int> clusters{1, 1, 2, 2, 2, 3};
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto r = draw_resample(clusters, ResampleLevel::cluster, 1, rep);
    // Three blocks drawn, each keeps all its members under a fresh key 1..3.
    std::map<int, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < r.units.size(); ++i) blocks[r.clusters[i]].push_back(r.units[i]);
    EXPECT_EQ(blocks.size(), 3u);
    for (const auto& [key, members] : blocks) {
      EXPECT_GE(key, 1);
      EXPECT_LE(key, 3);
      const int source = clusters[members[0]];
      std::size_t expected = 0;
      for (int c : clusters) expected += c == source;
      EXPECT_EQ(members.size(), expected);
      for (auto u : members) EXPECT_EQ(clusters[u], source);
    }
  }
}

TEST(Inference, BootstrapOfMeanMatchesAnalyticSe) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> x(400);
  for (auto& v : x) v = z(rng);
  std::vector<int> clusters(x.size());
  std::iota(clusters.begin(), clusters.end(), 1);
  const BootstrapStatistic mean = [&](const Resample& r) -> std::optional<std::vector<double>> {
    double s = 0.0;
    for (auto u : r.units) s += x[u];
    return std::vector<double>{s / static_cast<double>(r.units.size())};
  };
  const auto res = bootstrap_inference(mean, clusters, {1000, ResampleLevel::unit, 5, 1, 0.8});
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / 400.0;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double analytic = std::sqrt(ss / 400.0 / 400.0);
  EXPECT_NEAR(res.se[0], analytic, 0.1 * analytic);
  EXPECT_LT(res.percentile_lo[0], m);
  EXPECT_GT(res.percentile_hi[0], m);
  EXPECT_EQ(res.succeeded, 1000);
}

TEST(Inference, BootstrapIndependentOfThreadCount) {
  std::vector<double> x{1, 5, 2, 8, 3, 9, 4, 4, 7, 1};
  const std::vector<int> clusters{1, 1, 2, 2, 3, 3, 4, 4, 5, 5};
  const BootstrapStatistic stat = [&](const Resample& r) -> std::optional<std::vector<double>> {
    double s = 0.0;
    for (auto u : r.units) s += x[u] * x[u];
    return std::vector<double>{s, static_cast<double>(r.units.size())};
  };
  const auto one = bootstrap_inference(stat, clusters, {200, ResampleLevel::cluster, 99, 1, 0.8});
  const auto four = bootstrap_inference(stat, clusters, {200, ResampleLevel::cluster, 99, 4, 0.8});
  EXPECT_EQ(one.replicates, four.replicates);
  EXPECT_EQ(one.se, four.se);
}

TEST(Inference, BootstrapFailureRules) {
  const std::vector<int> clusters{1, 2, 3};
  const BootstrapStatistic ok = [](const Resample&) -> std::optional<std::vector<double>> {
    return std::vector<double>{1.0};
  };
  EXPECT_THROW(bootstrap_inference(ok, clusters, {49, ResampleLevel::unit, 1, 1, 0.8}), DomainError);
  std::atomic<int> calls{0};
  const BootstrapStatistic flaky = [&](const Resample& r) -> std::optional<std::vector<double>> {
    ++calls;
    if (r.units[0] == 0) return std::nullopt;
    return std::vector<double>{1.0};
  };
  // About a third of draws start with unit 0, so 80% success is out of reach.
  EXPECT_THROW(bootstrap_inference(flaky, clusters, {300, ResampleLevel::unit, 1, 1, 0.8}), EstimationError);
  const auto res = bootstrap_inference(flaky, clusters, {300, ResampleLevel::unit, 1, 1, 0.5});
  EXPECT_EQ(res.succeeded + res.failed, 300);
  EXPECT_GT(res.failed, 0);
}

TEST(Inference, JointWaldTest) {
  const auto t = joint_placebo_test({1.0, 2.0}, Eigen::Matrix2d::Identity());
  EXPECT_DOUBLE_EQ(t.statistic, 5.0);
  EXPECT_EQ(t.df, 2);
  EXPECT_NEAR(t.p_value, std::exp(-2.5), 1e-12);

  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  const auto s = joint_placebo_test({1.0, 1.0}, singular);
  EXPECT_EQ(s.df, 1);
  EXPECT_NEAR(s.statistic, 1.0, 1e-12);

  const auto zero = joint_placebo_test({0.0, 0.0}, Eigen::Matrix2d::Identity());
  EXPECT_DOUBLE_EQ(zero.p_value, 1.0);
}

TEST(Inference, JointWaldTestIgnoresRoundingNoise) {
  Eigen::Matrix2d tiny;
  tiny << 4e-36, 1e-36, 1e-36, 9e-36;
  const std::vector<double> noise{-2.3e-17, 3.1e-17};
  EXPECT_LT(joint_placebo_test(noise, tiny).p_value, 1e-10);
  const auto t = joint_placebo_test(noise, tiny, 1e-12);
  EXPECT_DOUBLE_EQ(t.statistic, 0.0);
  EXPECT_DOUBLE_EQ(t.p_value, 1.0);

  // A real placebo with variance at the noise floor is still flagged.
  const auto real = joint_placebo_test({0.5, 0.0}, tiny, 1e-12);
  EXPECT_TRUE(std::isinf(real.statistic));
  EXPECT_DOUBLE_EQ(real.p_value, 0.0);
}

TEST(Inference, JointWaldTestRankCap) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  v.diagonal() << 4.0, 1.0, 1e-9;
  const std::vector<double> p{2.0, 1.0, 1e-3};
  const auto full = joint_placebo_test(p, v);
  EXPECT_EQ(full.df, 3);
  EXPECT_NEAR(full.statistic, 1.0 + 1.0 + 1000.0, 1e-6);
  const auto capped = joint_placebo_test(p, v, 0.0, 2);
  EXPECT_EQ(capped.df, 2);
  EXPECT_NEAR(capped.statistic, 2.0, 1e-12);
  EXPECT_NEAR(capped.p_value, std::exp(-1.0), 1e-12);
  const auto none = joint_placebo_test(p, v, 0.0, 0);
  EXPECT_TRUE(std::isnan(none.statistic));
  EXPECT_TRUE(std::isnan(none.p_value));
}

TEST(Inference, ReplicateCovariance) {
  BootstrapResult r;
  r.replicates.resize(4, 2);
  r.replicates << 1, 2, 2, 4, 3, 6, std::nan(""), 1;
  const std::vector<std::size_t> cols{0, 1};
  const auto v = replicate_covariance(r, cols);
  EXPECT_NEAR(v(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(v(0, 1), 2.0, 1e-12);
  EXPECT_NEAR(v(1, 1), 4.0, 1e-12);
}

TEST(Inference, ParallelForRunsEveryIndexAndRethrows) {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
