#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idid/inference.hpp"
#include "idid/residualize.hpp"

namespace idid {

struct OutcomeSpec {
  std::string column;
  bool log = false;
};

struct TreatmentSpec {
  std::string name;
  std::string flow;
  std::vector<double> bin_widths{1.0};
};

struct ClusteringSpec {
  std::vector<std::string> features;
  int k = 3;
  bool attractiveness = false;
  std::vector<std::string> attractiveness_dimensions;
};

struct RunConfig {
  std::filesystem::path input_path;
  std::string unit_column = "unit";
  std::string period_column = "period";
  std::string population_column = "population";
  char delimiter = ',';
  std::optional<double> min_baseline_population;

  int baseline_period = 0;
  std::vector<TreatmentSpec> treatments;
  std::vector<OutcomeSpec> outcomes;
  ClusteringSpec clustering;

  std::vector<std::string> control_columns;
  ControlVariant control_variant = ControlVariant::none;
  ResidualizeScope control_scope = ResidualizeScope::bin_within_cluster;

  int horizons = 7;
  int placebos = 3;
  int min_valid_horizons = 1;

  int replications = 200;
  ResampleLevel resample = ResampleLevel::cluster;
  std::uint64_t seed = 0;

  bool soo = false;
  bool twfe = true;

  std::filesystem::path output_dir = "out";

  /// Canonical (sorted-key) JSON of the parsed document, for hashing.
  std::string canonical;
};

/// Parses and validates a run configuration. Relative paths resolve against
/// `base_dir`. Throws ConfigError naming the offending key.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view text);

const char* to_string(ControlVariant v) noexcept;
const char* to_string(ResidualizeScope s) noexcept;
const char* to_string(ResampleLevel l) noexcept;

}  // namespace idid
