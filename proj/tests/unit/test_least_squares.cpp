#include <random>

#include <gtest/gtest.h>

#include "idid/errors.hpp"
#include "idid/least_squares.hpp"

using namespace idid;

TEST(LeastSquares, ExactLinearFit) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7;
  const auto fit = least_squares(x, y);
  EXPECT_EQ(fit.rank, 2);
  EXPECT_NEAR(fit.coefficients(0), 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients(1), 2.0, 1e-12);
  EXPECT_LE(fit.residuals.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LeastSquares, HandComputedSlope) {
  // y = 0, 1, 1, 3 on x = 0..3: slope 0.9, intercept -0.1.
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 3;
  const auto fit = least_squares(x, y);
  EXPECT_NEAR(fit.coefficients(1), 0.9, 1e-12);
  EXPECT_NEAR(fit.coefficients(0), -0.1, 1e-12);
}

TEST(LeastSquares, FirstOfCollinearColumnsSurvives) {
  Eigen::MatrixXd x(5, 4);
  x << 1, 2, 0, 4,
       1, 3, 1, 6,
       1, 5, 0, 10,
       1, 7, 1, 14,
       1, 1, 0, 2;
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 6;
  const auto fit = least_squares(x, y);
  EXPECT_EQ(fit.rank, 3);
  EXPECT_EQ(fit.kept, std::vector<bool>({true, true, true, false}));
  EXPECT_DOUBLE_EQ(fit.coefficients(3), 0.0);
  EXPECT_EQ(fit.kept_columns(x).cols(), 3);
  EXPECT_FALSE(fit.warnings.empty());
}

TEST(LeastSquares, ZeroRowsRejected) {
  EXPECT_THROW(least_squares(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), DomainError);
}

TEST(LeastSquaresProperty, ResidualsOrthogonalToDesign) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 20 + rep;
    const int p = 1 + rep % 6;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = z(rng);
      y(i) = z(rng) * 10.0;
    }
    const auto fit = least_squares(x, y);
    EXPECT_LE((x.transpose() * fit.residuals).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((fit.fitted + fit.residuals - y).cwiseAbs().maxCoeff(), 1e-12);
  }
}
