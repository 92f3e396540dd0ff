#include "fixtures.hpp"

#include <fstream>
#include <sstream>

namespace fixtures {

std::vector<idid::TreatmentPath> paths_from_bins(const std::vector<std::vector<int>>& bins) {
  std::vector<idid::TreatmentPath> out;
  for (std::size_t i = 0; i < bins.size(); ++i) out.push_back({"u" + std::to_string(i + 1), bins[i], 1.0});
  return out;
}

idid::PanelMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  idid::PanelMatrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t t = 0; t < rows[i].size(); ++t) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[i][t];
    }
  }
  return m;
}

oracle::TinyPanel random_tiny_panel(std::mt19937_64& rng, int max_units, int max_periods) {
  std::uniform_int_distribution<int> n_dist(3, max_units);
  std::uniform_int_distribution<int> t_dist(3, max_periods);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = n_dist(rng);
  const int periods = t_dist(rng);
  const bool two_clusters = unif(rng) < 0.3;

  oracle::TinyPanel p;
  for (int i = 0; i < n; ++i) {
    const int base = unif(rng) < 0.7 ? 0 : 1;
    std::vector<int> b(periods, base);
    const double kind = unif(rng);
    if (kind > 0.3) {
      const int f = std::uniform_int_distribution<int>(1, periods - 1)(rng);
      int level = base;
      for (int t = f; t < periods; ++t) {
        const int move = std::uniform_int_distribution<int>(-1, 2)(rng);
        level = t == f ? base + (kind > 0.85 ? -1 : std::max(1, move)) : level + move;
        b[t] = level;
      }
    }
    std::vector<double> y(periods);
    for (auto& v : y) v = normal(rng) * 3.0;
    p.bins.push_back(b);
    p.y.push_back(y);
    p.clusters.push_back(two_clusters ? 1 + (i % 2) : 1);
  }
  return p;
}

idid::PointEstimates estimate_tiny(const oracle::TinyPanel& panel, const idid::EstimatorOptions& options,
                                   std::vector<idid::TreatmentPath>& paths,
                                   std::vector<idid::SwitchProfile>& profiles) {
  paths = paths_from_bins(panel.bins);
  profiles = idid::build_profiles(paths);
  auto sample = idid::make_sample(paths, profiles, panel.clusters,
                                  idid::OutcomeChanges::from_levels(matrix_from_rows(panel.y)));
  return idid::estimate(sample, options);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("idid-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fixtures
