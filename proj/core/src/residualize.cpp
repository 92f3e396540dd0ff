#include "idid/residualize.hpp"

#include <map>
#include <set>

#include "idid/errors.hpp"

namespace idid {
namespace {

struct FitSpec {
  std::vector<std::size_t> rows;  // units in scope
  int baseline_bin = 0;
  std::optional<int> cluster;
  bool pooled = false;
};

bool controls_observed(const std::vector<PanelMatrix>& x, Eigen::Index u, Eigen::Index t) {
  for (const auto& m : x) {
    if (is_missing(m(u, t))) return false;
  }
  return true;
}

class Residualizer {
 public:
  Residualizer(const PanelMatrix& y, const std::vector<PanelMatrix>& x,
               std::span<const std::optional<int>> first_switch, ControlVariant variant)
      : y_(y), x_(x), first_switch_(first_switch), variant_(variant) {}

  std::vector<std::pair<std::size_t, int>> fitting_cells(const std::vector<std::size_t>& rows) const {
    std::vector<std::pair<std::size_t, int>> cells;
    for (auto r : rows) {
      const auto u = static_cast<Eigen::Index>(r);
      for (Eigen::Index t = 1; t < y_.cols(); ++t) {
        const auto& f = first_switch_[r];
        if (f && t >= *f) break;
        if (is_missing(y_(u, t)) || !controls_observed(x_, u, t)) continue;
        cells.emplace_back(r, static_cast<int>(t));
      }
    }
    return cells;
  }

  static std::size_t regressor_count(std::size_t n_controls, ControlVariant v,
                                     const std::vector<std::pair<std::size_t, int>>& cells) {
    std::set<int> periods;
    for (const auto& c : cells) periods.insert(c.second);
    const std::size_t per = v == ControlVariant::quadratic ? 2 : 1;
    return 1 + per * n_controls + (periods.empty() ? 0 : periods.size() - 1);
  }

  Eigen::RowVectorXd row(Eigen::Index u, Eigen::Index t) const {
    const auto nx = static_cast<Eigen::Index>(x_.size());
    const Eigen::Index sq = variant_ == ControlVariant::quadratic ? nx : 0;
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(1 + nx + sq + (y_.cols() - 1));
    r(0) = 1.0;
    for (Eigen::Index j = 0; j < nx; ++j) {
      const double v = x_[static_cast<std::size_t>(j)](u, t);
      r(1 + j) = v;
      if (sq) r(1 + nx + j) = v * v;
    }
    r(1 + nx + sq + (t - 1)) = 1.0;
    return r;
  }

  std::vector<std::string> names(const std::vector<std::string>& control_names) const {
    std::vector<std::string> n{"intercept"};
    for (const auto& c : control_names) n.push_back("d_" + c);
    if (variant_ == ControlVariant::quadratic) {
      for (const auto& c : control_names) n.push_back("d_" + c + "^2");
    }
    for (Eigen::Index t = 1; t < y_.cols(); ++t) n.push_back("period_" + std::to_string(t));
    return n;
  }

  AuxRegression fit(const FitSpec& spec, const std::vector<std::pair<std::size_t, int>>& cells,
                    const std::vector<std::string>& control_names) const {
    AuxRegression reg;
    reg.baseline_bin = spec.baseline_bin;
    reg.cluster = spec.cluster;
    reg.pooled = spec.pooled;
    reg.regressors = names(control_names);
    reg.cells = cells;
    const auto n = static_cast<Eigen::Index>(cells.size());
    reg.design.resize(n, static_cast<Eigen::Index>(reg.regressors.size()));
    reg.response.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = static_cast<Eigen::Index>(cells[static_cast<std::size_t>(i)].first);
      const auto t = static_cast<Eigen::Index>(cells[static_cast<std::size_t>(i)].second);
      reg.design.row(i) = row(u, t);
      reg.response(i) = y_(u, t);
    }
    reg.fit = least_squares(reg.design, reg.response);
    return reg;
  }

  void apply(const AuxRegression& reg, const std::vector<std::size_t>& rows, PanelMatrix& out) const {
    std::set<int> present;
    for (const auto& c : reg.cells) present.insert(c.second);
    for (auto r : rows) {
      const auto u = static_cast<Eigen::Index>(r);
      for (Eigen::Index t = 1; t < y_.cols(); ++t) {
        if (!present.count(static_cast<int>(t)) || is_missing(y_(u, t)) || !controls_observed(x_, u, t)) {
          out(u, t) = kMissing;
          continue;
        }
        out(u, t) = y_(u, t) - row(u, t).dot(reg.fit.coefficients);
      }
    }
  }

 private:
  const PanelMatrix& y_;
  const std::vector<PanelMatrix>& x_;
  std::span<const std::optional<int>> first_switch_;
  ControlVariant variant_;
};

}  // namespace

ResidualizedOutcome residualize_differences(const PanelMatrix& outcome_diffs,
                                            const std::vector<PanelMatrix>& control_diffs,
                                            std::span<const int> baseline_bins,
                                            std::span<const std::optional<int>> first_switch,
                                            const std::vector<int>& clusters,
                                            const ResidualizeOptions& options) {
  const auto n = static_cast<std::size_t>(outcome_diffs.rows());
  if (baseline_bins.size() != n || first_switch.size() != n || (!clusters.empty() && clusters.size() != n)) {
    throw DomainError("residualize: unit metadata does not match the outcome rows");
  }
  for (const auto& x : control_diffs) {
    if (x.rows() != outcome_diffs.rows() || x.cols() != outcome_diffs.cols()) {
      throw DomainError("residualize: control dimensions differ from the outcome");
    }
  }
  ResidualizedOutcome out;
  out.residuals = PanelMatrix::Constant(outcome_diffs.rows(), outcome_diffs.cols(), kMissing);
  if (options.variant == ControlVariant::none) {
    out.residuals = outcome_diffs;
    out.residuals.col(0).setConstant(kMissing);
    return out;
  }
  if (control_diffs.empty()) throw ConfigError("residualization needs at least one control column");

  std::vector<std::string> control_names;
  for (std::size_t j = 0; j < control_diffs.size(); ++j) control_names.push_back("x" + std::to_string(j + 1));

  std::map<std::pair<int, int>, FitSpec> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const int cl = (options.scope == ResidualizeScope::bin_within_cluster && !clusters.empty()) ? clusters[i] : 0;
    auto& g = groups[{baseline_bins[i], cl}];
    g.rows.push_back(i);
    g.baseline_bin = baseline_bins[i];
    if (options.scope == ResidualizeScope::bin_within_cluster && !clusters.empty()) g.cluster = cl;
  }

  Residualizer res(outcome_diffs, control_diffs, first_switch, options.variant);
  std::vector<std::size_t> thin_rows;
  for (const auto& [key, spec] : groups) {
    const auto cells = res.fitting_cells(spec.rows);
    const auto p = Residualizer::regressor_count(control_diffs.size(), options.variant, cells);
    if (cells.size() < p + static_cast<std::size_t>(options.min_extra_rows)) {
      thin_rows.insert(thin_rows.end(), spec.rows.begin(), spec.rows.end());
      out.warnings.push_back("baseline bin " + std::to_string(key.first) +
                             (spec.cluster ? ", cluster " + std::to_string(*spec.cluster) : std::string()) +
                             ": " + std::to_string(cells.size()) +
                             " fitting rows; using the pooled regression");
      continue;
    }
    auto reg = res.fit(spec, cells, control_names);
    res.apply(reg, spec.rows, out.residuals);
    out.regressions.push_back(std::move(reg));
  }

  if (!thin_rows.empty()) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    FitSpec pooled{all, 0, std::nullopt, true};
    const auto cells = res.fitting_cells(all);
    if (cells.empty()) {
      out.warnings.push_back("pooled regression has no fitting rows; residuals left missing");
    } else {
      std::sort(thin_rows.begin(), thin_rows.end());
      auto reg = res.fit(pooled, cells, control_names);
      res.apply(reg, thin_rows, out.residuals);
      out.regressions.push_back(std::move(reg));
    }
  }
  return out;
}

ResidualizedOutcome residualize_outcome(const PanelDataset& panel, const std::string& outcome,
                                        const std::vector<std::string>& controls,
                                        const std::vector<SwitchProfile>& profiles,
                                        const std::vector<int>& clusters,
                                        const ResidualizeOptions& options) {
  if (profiles.size() != panel.n_units()) throw DomainError("residualize: one profile per unit required");
  const auto dy = first_difference(panel.outcome(outcome));
  std::vector<PanelMatrix> dx;
  for (const auto& c : controls) {
    if (panel.covariates().count(c)) {
      dx.push_back(first_difference(panel.covariate(c)));
    } else if (panel.flows().count(c)) {
      dx.push_back(first_difference(panel.flow(c)));
    } else {
      throw ConfigError("control column '" + c + "' is neither a covariate nor a flow");
    }
  }
  std::vector<int> bins;
  std::vector<std::optional<int>> first;
  for (const auto& p : profiles) {
    bins.push_back(p.baseline_bin);
    first.push_back(p.first_switch);
  }
  auto out = residualize_differences(dy, dx, bins, first, clusters, options);
  for (auto& reg : out.regressions) {
    for (std::size_t j = 0; j < controls.size(); ++j) {
      reg.regressors[1 + j] = "d_" + controls[j];
      if (options.variant == ControlVariant::quadratic) {
        reg.regressors[1 + controls.size() + j] = "d_" + controls[j] + "^2";
      }
    }
  }
  return out;
}

}  // namespace idid
