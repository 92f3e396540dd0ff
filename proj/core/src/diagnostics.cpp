#include "idid/diagnostics.hpp"

#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "idid/errors.hpp"
#include "idid/least_squares.hpp"

namespace idid {

SooResult soo_check(const PanelMatrix& outcome, const std::vector<SwitchProfile>& profiles,
                    const std::vector<std::vector<double>>& features, const std::vector<int>& clusters) {
  const auto n = profiles.size();
  if (static_cast<std::size_t>(outcome.rows()) != n) throw DomainError("soo: outcome rows differ from units");
  for (const auto& f : features) {
    if (f.size() != n) throw DomainError("soo: feature length differs from units");
  }
  std::set<int> cohorts;
  for (const auto& p : profiles) {
    if (p.is_switcher_in()) cohorts.insert(*p.first_switch);
  }
  if (cohorts.size() < 2) throw DomainError("soo check needs at least two switch cohorts");
  std::set<int> cluster_set(clusters.begin(), clusters.end());
  const std::vector<int> cluster_list(cluster_set.begin(), cluster_set.end());
  const std::vector<int> cohort_list(cohorts.begin(), cohorts.end());

  struct Obs {
    std::size_t unit;
    double y;
    std::vector<double> x;
  };
  std::vector<Obs> rows;
  for (std::size_t ci = 0; ci < cohort_list.size(); ++ci) {
    const int f = cohort_list[ci];
    for (std::size_t u = 0; u < n; ++u) {
      const auto& p = profiles[u];
      const bool treated = p.is_switcher_in() && *p.first_switch == f;
      if (!treated && !p.unchanged_through(f)) continue;
      const double y = outcome(static_cast<Eigen::Index>(u), f);
      const double lag = outcome(static_cast<Eigen::Index>(u), f - 1);
      if (is_missing(y) || is_missing(lag)) continue;
      std::vector<double> x{1.0, treated ? 1.0 : 0.0, lag};
      for (const auto& feat : features) x.push_back(feat[u]);
      for (std::size_t c = 1; c < cohort_list.size(); ++c) x.push_back(c == ci ? 1.0 : 0.0);
      for (std::size_t c = 1; c < cluster_list.size(); ++c) {
        x.push_back(!clusters.empty() && clusters[u] == cluster_list[c] ? 1.0 : 0.0);
      }
      rows.push_back({u, y, std::move(x)});
    }
  }
  if (rows.empty()) throw DomainError("soo: no usable observations");
  const auto nobs = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows.front().x.size());
  Eigen::MatrixXd x(nobs, k);
  Eigen::VectorXd y(nobs);
  for (Eigen::Index i = 0; i < nobs; ++i) {
    y(i) = rows[static_cast<std::size_t>(i)].y;
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = rows[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(j)];
  }

  SooResult out;
  const auto fit = least_squares(x, y);
  for (const auto& w : fit.warnings) out.warnings.push_back("soo regression: " + w);
  if (!fit.kept[1]) throw EstimationError("soo: treated indicator is collinear with the controls");

  const Eigen::MatrixXd xk = fit.kept_columns(x);
  const Eigen::MatrixXd bread = (xk.transpose() * xk).inverse();
  std::map<std::size_t, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < nobs; ++i) {
    const auto u = rows[static_cast<std::size_t>(i)].unit;
    Eigen::VectorXd s = xk.row(i).transpose() * fit.residuals(i);
    auto it = scores.find(u);
    if (it == scores.end()) {
      scores.emplace(u, std::move(s));
    } else {
      it->second += s;
    }
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(xk.cols(), xk.cols());
  for (const auto& [_, s] : scores) meat += s * s.transpose();
  const double g = static_cast<double>(scores.size());
  const double nn = static_cast<double>(nobs);
  const double kk = static_cast<double>(xk.cols());
  const double scale = (g / (g - 1.0)) * ((nn - 1.0) / (nn - kk));
  const Eigen::MatrixXd v = scale * bread * meat * bread;

  const Eigen::Index pos = fit.kept[0] ? 1 : 0;
  out.coefficient = fit.coefficients(1);
  out.se = std::sqrt(std::max(v(pos, pos), 0.0));
  out.observations = rows.size();
  out.units = scores.size();
  out.cohorts = cohort_list.size();
  if (out.se > 0.0 && g > 1.0) {
    const boost::math::students_t dist(g - 1.0);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.coefficient / out.se)));
  } else {
    out.p_value = out.coefficient == 0.0 ? 1.0 : 0.0;
  }
  return out;
}

double twfe_estimate(const PanelMatrix& outcome, const std::vector<TreatmentPath>& paths) {
  const auto n = outcome.rows();
  const auto t = outcome.cols();
  if (static_cast<std::size_t>(n) != paths.size()) throw DomainError("twfe: one path per unit required");
  if (outcome.hasNaN()) throw DomainError("twfe requires a complete outcome matrix");
  Eigen::MatrixXd d(n, t);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index s = 0; s < t; ++s) d(i, s) = paths[static_cast<std::size_t>(i)].bins.at(static_cast<std::size_t>(s));
  }
  auto demean = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd rows = m.rowwise().mean();
    const Eigen::RowVectorXd cols = m.colwise().mean();
    Eigen::MatrixXd out = m;
    out.colwise() -= rows;
    out.rowwise() -= cols;
    out.array() += m.mean();
    return out;
  };
  const Eigen::MatrixXd dd = demean(d);
  const Eigen::MatrixXd yy = demean(outcome);
  const double ss = dd.squaredNorm();
  if (ss <= 1e-12 * std::max(1.0, d.squaredNorm())) throw EstimationError("twfe: no treatment variation");
  return dd.cwiseProduct(yy).sum() / ss;
}

}  // namespace idid
