#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace idid {

struct LeastSquaresFit {
  /// One entry per input column; dropped columns carry 0.
  Eigen::VectorXd coefficients;
  std::vector<bool> kept;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  int rank = 0;
  std::vector<std::string> warnings;

  /// Design restricted to kept columns, in their original order.
  Eigen::MatrixXd kept_columns(const Eigen::MatrixXd& x) const;
};

/// Householder-QR least squares. Columns are screened in order: a column
/// numerically inside the span of the columns already kept (relative
/// residual norm below `tolerance`) is dropped, so the first-listed of a
/// collinear set survives. Throws DomainError on zero rows.
LeastSquaresFit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              double tolerance = 1e-10);

}  // namespace idid
