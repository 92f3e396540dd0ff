#include "idid/exposure.hpp"

#include <algorithm>
#include <cmath>

#include "idid/errors.hpp"

namespace idid {

std::vector<double> cumulative_share(const std::vector<double>& flows, double baseline_population) {
  if (!(baseline_population > 0.0)) throw DomainError("baseline population must be positive");
  std::vector<double> shares;
  shares.reserve(flows.size());
  double running = 0.0;
  for (double f : flows) {
    // A missing flow counts as zero net migration for that year.
    if (!is_missing(f)) running += f;
    shares.push_back(100.0 * running / baseline_population);
  }
  return shares;
}

std::vector<ExposureSeries> cumulative_exposure(const PanelDataset& panel, const std::string& flow) {
  const auto& m = panel.flow(flow);
  std::vector<ExposureSeries> out;
  out.reserve(panel.n_units());
  for (std::size_t u = 0; u < panel.n_units(); ++u) {
    std::vector<double> flows(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index t = 0; t < m.cols(); ++t) flows[static_cast<std::size_t>(t)] = m(static_cast<Eigen::Index>(u), t);
    out.push_back({panel.units()[u], cumulative_share(flows, panel.baseline_population()[u])});
  }
  return out;
}

int bin_of(double share, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  const double q = share / bin_width;
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, std::abs(q))) return static_cast<int>(nearest);
  return static_cast<int>(std::floor(q));
}

TreatmentPath discretize(const ExposureSeries& exposure, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  TreatmentPath path{exposure.unit, {}, bin_width};
  path.bins.reserve(exposure.shares.size());
  for (double s : exposure.shares) path.bins.push_back(bin_of(s, bin_width));
  return path;
}

std::vector<TreatmentPath> discretize(const std::vector<ExposureSeries>& exposure, double bin_width) {
  std::vector<TreatmentPath> out;
  out.reserve(exposure.size());
  for (const auto& e : exposure) out.push_back(discretize(e, bin_width));
  return out;
}

std::map<double, std::vector<TreatmentPath>> rebin(const std::vector<ExposureSeries>& exposure,
                                                   const std::vector<double>& widths) {
  if (widths.empty()) throw DomainError("rebin needs at least one bin width");
  for (double w : widths) {
    if (!(w > 0.0)) throw DomainError("bin width must be positive");
  }
  std::map<double, std::vector<TreatmentPath>> out;
  for (double w : widths) out.emplace(w, discretize(exposure, w));
  return out;
}

}  // namespace idid
