#include <cmath>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "idid/errors.hpp"
#include "idid/exposure.hpp"

using namespace idid;

TEST(Exposure, BinExamples) {
  EXPECT_EQ(bin_of(0.7, 1.0), 0);
  EXPECT_EQ(bin_of(1.5, 1.0), 1);
  EXPECT_EQ(bin_of(-2.5, 1.0), -3);
  EXPECT_EQ(bin_of(7.3, 5.0), 1);
  EXPECT_EQ(bin_of(0.0, 1.0), 0);
  EXPECT_EQ(bin_of(1.0, 1.0), 1);
  EXPECT_EQ(bin_of(-0.1, 1.0), -1);
}

TEST(Exposure, QuotientsNearIntegersSnap) {
  // 0.1 + 0.2 is 0.30000000000000004; 0.3 / 0.1 is 2.9999999999999996.
  EXPECT_EQ(bin_of(0.3, 0.1), 3);
  EXPECT_EQ(bin_of(0.1 + 0.2, 0.1), 3);
}

TEST(Exposure, NonPositiveWidthRejected) {
  EXPECT_THROW(bin_of(1.0, 0.0), DomainError);
  EXPECT_THROW(bin_of(1.0, -1.0), DomainError);
  EXPECT_THROW(discretize(ExposureSeries{"a", {0.0}}, 0.0), DomainError);
}

TEST(Exposure, CumulativeShareIsRunningSumOverBaseline) {
  const auto s = cumulative_share({0.0, 5.0, -2.0, 10.0}, 500.0);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 1.0);
  EXPECT_DOUBLE_EQ(s[2], 0.6);
  EXPECT_DOUBLE_EQ(s[3], 2.6);
}

TEST(Exposure, MissingFlowCountsAsZero) {
  const auto s = cumulative_share({1.0, std::nan(""), 1.0}, 100.0);
  EXPECT_DOUBLE_EQ(s[1], 1.0);
  EXPECT_DOUBLE_EQ(s[2], 2.0);
}

TEST(Exposure, RebinExamples) {
  const std::vector<ExposureSeries> e{{"a", {7.3}}, {"b", {0.0}}};
  const auto m = rebin(e, {1, 2, 5, 10});
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.at(1)[0].bins[0], 7);
  EXPECT_EQ(m.at(2)[0].bins[0], 3);
  EXPECT_EQ(m.at(5)[0].bins[0], 1);
  EXPECT_EQ(m.at(10)[0].bins[0], 0);
  for (const auto& [w, paths] : m) {
    EXPECT_EQ(paths[1].bins[0], 0) << "width " << w;
    EXPECT_DOUBLE_EQ(paths[0].bin_width, w);
  }
  EXPECT_THROW(rebin(e, {}), DomainError);
  EXPECT_THROW(rebin(e, {1, 0}), DomainError);
}

TEST(Exposure, SingleWidthRebinMatchesDiscretize) {
  const std::vector<ExposureSeries> e{{"a", {0.0, 0.4, 1.7, -0.2, 3.9}}};
  EXPECT_EQ(rebin(e, {1}).at(1)[0].bins, discretize(e[0], 1.0).bins);
}

TEST(ExposureProperty, DoublingWidthNeverIncreasesMagnitude) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> share(0.0, 60.0);
  std::uniform_real_distribution<double> width(0.1, 10.0);
  for (int i = 0; i < 5000; ++i) {
    const double s = share(rng);
    const double w = width(rng);
    EXPECT_LE(std::abs(bin_of(s, 2 * w)), std::abs(bin_of(s, w))) << s << " " << w;
  }
}

TEST(ExposureProperty, BinContainsShare) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> share(-30.0, 30.0);
  for (double w : {1.0, 2.0, 5.0, 10.0}) {
    for (int i = 0; i < 2000; ++i) {
      const double s = share(rng);
      const int b = bin_of(s, w);
      EXPECT_LE(b * w, s + 1e-9);
      EXPECT_GT((b + 1) * w, s);
    }
  }
}
