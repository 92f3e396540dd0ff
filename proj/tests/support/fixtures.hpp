#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "idid/cohorts.hpp"
#include "idid/estimator.hpp"
#include "idid/exposure.hpp"
#include "idid/panel.hpp"

namespace fixtures {

std::vector<idid::TreatmentPath> paths_from_bins(const std::vector<std::vector<int>>& bins);
idid::PanelMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows);

/// Random panel with at most `max_units` units and `max_periods` periods,
/// mixing never-switchers, switchers-in, switchers-out and reversals.
oracle::TinyPanel random_tiny_panel(std::mt19937_64& rng, int max_units, int max_periods);

/// Library estimate on a tiny panel.
idid::PointEstimates estimate_tiny(const oracle::TinyPanel& panel, const idid::EstimatorOptions& options,
                                   std::vector<idid::TreatmentPath>& paths,
                                   std::vector<idid::SwitchProfile>& profiles);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
