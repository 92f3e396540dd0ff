#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "idid/analysis.hpp"
#include "idid/cohorts.hpp"
#include "idid/config.hpp"
#include "idid/diagnostics.hpp"
#include "idid/panel.hpp"

namespace idid {

struct RunOptions {
  int threads = 1;
  bool verbose = false;
  /// Replaces every treatment's bin widths when set.
  std::optional<std::vector<double>> bin_widths;
};

/// One (treatment, bin width, outcome) estimation.
struct JobResult {
  std::string treatment;
  double bin_width = 1.0;
  std::string outcome;
  std::string stem;
  std::uint64_t seed = 0;
  /// False when no switcher-in had an estimable cell; `result` is then empty.
  bool estimated = false;
  EventStudyResult result;
  std::optional<double> twfe;
  std::optional<SooResult> soo;
  std::vector<std::string> warnings;
};

struct TreatmentProfiles {
  std::string treatment;
  double bin_width = 1.0;
  std::vector<SwitchProfile> profiles;
};

struct RunResult {
  std::string config_hash;
  std::uint64_t seed = 0;
  LoadReport load;
  std::vector<std::string> units;
  std::vector<int> periods;
  /// Empty when clustering is off.
  std::vector<int> clusters;
  int n_clusters = 1;
  /// Resampling actually used; cluster falls back to unit with one cluster.
  ResampleLevel resample = ResampleLevel::cluster;
  std::vector<TreatmentProfiles> profiles;
  std::vector<JobResult> jobs;
  std::vector<std::string> warnings;
};

/// Loads, clusters, builds treatments and estimates every job in memory.
/// Throws EstimationError only when no job could be estimated.
RunResult run_analysis(const RunConfig& config, const RunOptions& options = {});

/// Writes every report into `directory`. Files are staged first and only
/// moved into place once all of them were written.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const RunConfig& config,
                                                 const std::filesystem::path& directory);

/// run_analysis followed by write_outputs into the configured directory.
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Re-runs the analysis with the given bin widths for every treatment and
/// writes the same reports, including the bin-width comparison table.
RunResult run_binwidth_harness(const RunConfig& config, const std::vector<double>& widths,
                               const RunOptions& options = {});

/// Shortest round-trip text for a double; NA when missing.
std::string format_number(double value);

}  // namespace idid
