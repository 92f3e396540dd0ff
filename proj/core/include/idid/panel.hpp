#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace idid {

/// Missing values are quiet NaNs; a NaN is never produced by valid arithmetic
/// on observed cells, so it stays distinguishable from every real value.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Unit x period matrix (rows follow `PanelDataset::units`, columns `periods`).
using PanelMatrix = Eigen::MatrixXd;

/// Balanced unit x period panel. Immutable once built by `load_panel` or
/// `PanelDataset::create`.
class PanelDataset {
 public:
  struct Parts {
    std::vector<std::string> units;
    std::vector<int> periods;
    std::vector<double> baseline_population;
    std::map<std::string, PanelMatrix> outcomes;
    std::map<std::string, PanelMatrix> flows;
    std::map<std::string, PanelMatrix> covariates;
    std::map<std::string, std::vector<double>> features;
  };

  /// Validates dimensions, period ordering and population positivity.
  static PanelDataset create(Parts parts);

  std::size_t n_units() const noexcept { return parts_.units.size(); }
  std::size_t n_periods() const noexcept { return parts_.periods.size(); }

  const std::vector<std::string>& units() const noexcept { return parts_.units; }
  const std::vector<int>& periods() const noexcept { return parts_.periods; }
  const std::vector<double>& baseline_population() const noexcept {
    return parts_.baseline_population;
  }

  const std::map<std::string, PanelMatrix>& outcomes() const noexcept { return parts_.outcomes; }
  const std::map<std::string, PanelMatrix>& flows() const noexcept { return parts_.flows; }
  const std::map<std::string, PanelMatrix>& covariates() const noexcept {
    return parts_.covariates;
  }
  /// Pre-baseline, time-invariant unit features (clustering inputs).
  const std::map<std::string, std::vector<double>>& features() const noexcept {
    return parts_.features;
  }

  const PanelMatrix& outcome(const std::string& name) const;
  const PanelMatrix& flow(const std::string& name) const;
  const PanelMatrix& covariate(const std::string& name) const;
  const std::vector<double>& feature(const std::string& name) const;

  std::optional<std::size_t> period_index(int period) const;

  /// Copy with only the units at `keep` (in that order).
  PanelDataset subset(const std::vector<std::size_t>& keep) const;
  /// Copy with one outcome replaced or added.
  PanelDataset with_outcome(const std::string& name, PanelMatrix values) const;

 private:
  explicit PanelDataset(Parts parts) : parts_(std::move(parts)) {}
  Parts parts_;
};

/// Column mapping for delimited panel files.
struct PanelSchema {
  std::string unit = "unit";
  std::string period = "period";
  std::string population = "population";
  std::vector<std::string> outcomes;
  std::vector<std::string> flows;
  /// Time-varying controls.
  std::vector<std::string> covariates;
  /// Time-invariant features, read from the baseline-period row.
  std::vector<std::string> features;
  char delimiter = ',';
  /// Period whose population row is the exposure denominator. Defaults to
  /// the first period of the panel.
  std::optional<int> baseline_period;
  /// Units with baseline population below this are dropped at load time.
  std::optional<double> min_baseline_population;
  /// Outcomes replaced by their natural log at ingestion.
  std::vector<std::string> log_outcomes;
};

struct LoadReport {
  std::size_t rows = 0;
  std::size_t dropped_small_units = 0;
  std::vector<std::string> warnings;
};

/// Reads a delimited text panel. Missing values are empty fields or `NA`.
/// Throws ConfigError for absent columns, ParseError, StructuralError,
/// DuplicateError and DomainError for bad data.
PanelDataset load_panel(std::istream& source, const PanelSchema& schema,
                        LoadReport* report = nullptr);

/// Writes the panel back in long format with the given schema's column
/// names. Numbers use the shortest round-trip representation.
void write_panel(std::ostream& sink, const PanelDataset& panel, const PanelSchema& schema);

/// First differences of one outcome: column t holds Y_t - Y_{t-1}; column 0
/// is always missing. Missing when either operand is missing.
struct DiffSeries {
  std::vector<std::string> units;
  std::vector<int> periods;
  PanelMatrix values;
};

DiffSeries first_difference(const PanelDataset& panel, const std::string& outcome);
/// Same rule applied to any unit x period matrix.
PanelMatrix first_difference(const PanelMatrix& levels);

}  // namespace idid
