#include "idid/least_squares.hpp"

#include <algorithm>

#include <Eigen/QR>

#include "idid/errors.hpp"

namespace idid {

Eigen::MatrixXd LeastSquaresFit::kept_columns(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), rank);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (kept[static_cast<std::size_t>(j)]) out.col(c++) = x.col(j);
  }
  return out;
}

LeastSquaresFit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tolerance) {
  if (x.rows() == 0) throw DomainError("least squares: zero usable rows");
  if (x.rows() != y.size()) throw DomainError("least squares: row count mismatch");

  LeastSquaresFit fit;
  fit.kept.assign(static_cast<std::size_t>(x.cols()), false);

  // Orthonormal basis of the kept columns (twice-iterated Gram-Schmidt).
  Eigen::MatrixXd basis(x.rows(), std::min(x.rows(), x.cols()));
  Eigen::Index dim = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    if (norm == 0.0 || dim == x.rows()) {
      fit.warnings.push_back("column " + std::to_string(j) + " dropped (" +
                             (norm == 0.0 ? "all zero" : "no residual degrees of freedom") + ")");
      continue;
    }
    Eigen::VectorXd r = x.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      if (dim > 0) r -= basis.leftCols(dim) * (basis.leftCols(dim).transpose() * r);
    }
    const double rnorm = r.norm();
    if (rnorm <= tolerance * norm) {
      fit.warnings.push_back("column " + std::to_string(j) + " dropped (collinear)");
      continue;
    }
    basis.col(dim++) = r / rnorm;
    fit.kept[static_cast<std::size_t>(j)] = true;
  }
  fit.rank = static_cast<int>(dim);

  fit.coefficients = Eigen::VectorXd::Zero(x.cols());
  if (fit.rank > 0) {
    const Eigen::MatrixXd xk = fit.kept_columns(x);
    const Eigen::VectorXd beta = xk.householderQr().solve(y);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (fit.kept[static_cast<std::size_t>(j)]) fit.coefficients(j) = beta(c++);
    }
    fit.fitted = xk * beta;
  } else {
    fit.fitted = Eigen::VectorXd::Zero(x.rows());
  }
  fit.residuals = y - fit.fitted;
  return fit;
}

}  // namespace idid
