#pragma once

#include <map>
#include <string>
#include <vector>

#include "idid/panel.hpp"

namespace idid {

/// Cumulative net flow as a percentage of baseline population, one row per
/// unit. Kept as exact running sums so any bin width can be applied later.
struct ExposureSeries {
  std::string unit;
  std::vector<double> shares;
};

/// Integer treatment bins: bins[t] = floor(share_t / bin_width).
struct TreatmentPath {
  std::string unit;
  std::vector<int> bins;
  double bin_width = 1.0;

  int baseline() const { return bins.front(); }
  std::size_t size() const noexcept { return bins.size(); }
};

std::vector<ExposureSeries> cumulative_exposure(const PanelDataset& panel, const std::string& flow);

/// Share for a single series; `flows` in persons, result in percent.
std::vector<double> cumulative_share(const std::vector<double>& flows, double baseline_population);

/// Floor toward -inf, so bin 0 holds [0, width) and -2.5% lands in bin -3.
/// Quotients within 1e-9 of an integer snap to it before flooring.
int bin_of(double share, double bin_width);

TreatmentPath discretize(const ExposureSeries& exposure, double bin_width);
std::vector<TreatmentPath> discretize(const std::vector<ExposureSeries>& exposure, double bin_width);

std::map<double, std::vector<TreatmentPath>> rebin(const std::vector<ExposureSeries>& exposure,
                                                   const std::vector<double>& widths);

}  // namespace idid
