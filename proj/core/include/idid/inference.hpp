#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace idid {

enum class ResampleLevel { cluster, unit };

/// One bootstrap draw: rows into the original sample (repeats allowed) and
/// the matching key each drawn row carries. Under cluster resampling every
/// drawn block gets its own key so repeated blocks do not match each other.
struct Resample {
  std::vector<std::size_t> units;
  std::vector<int> clusters;
};

/// Identity draw.
Resample full_sample(const std::vector<int>& clusters);

/// Draws one resample; deterministic in (seed, replication).
Resample draw_resample(const std::vector<int>& clusters, ResampleLevel level, std::uint64_t seed,
                       std::uint64_t replication);

/// Returns the statistic vector for a draw, or nullopt when the draw cannot
/// be estimated. Must be safe to call concurrently.
using BootstrapStatistic = std::function<std::optional<std::vector<double>>(const Resample&)>;

struct BootstrapOptions {
  int replications = 200;
  ResampleLevel level = ResampleLevel::cluster;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Minimum fraction of successful replications.
  double min_success = 0.8;
};

struct BootstrapResult {
  int requested = 0;
  int succeeded = 0;
  int failed = 0;
  /// succeeded x k replicate values, NaN where a statistic was absent.
  Eigen::MatrixXd replicates;
  /// Per statistic; NaN when fewer than min_success * requested finite draws.
  std::vector<double> se;
  std::vector<double> percentile_lo;
  std::vector<double> percentile_hi;
};

/// Nonparametric block bootstrap. Replication b uses a generator seeded from
/// (seed, b) alone, so results do not depend on `threads`. Throws
/// EstimationError when fewer than min_success of the draws succeed, and
/// DomainError for fewer than 50 replications.
BootstrapResult bootstrap_inference(const BootstrapStatistic& statistic, const std::vector<int>& clusters,
                                    const BootstrapOptions& options);

/// Covariance across replicates of the given statistic columns, over rows
/// where all of them are finite.
Eigen::MatrixXd replicate_covariance(const BootstrapResult& result, std::span<const std::size_t> columns);

struct WaldTest {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// p' V^- p against chi-square(rank V); V^- is the eigen pseudo-inverse.
/// Placebos within `zero_tol` of zero count as exact zeros, and variance
/// directions below zero_tol^2 are dropped from the rank. `max_rank` >= 0
/// keeps only that many leading directions; a bootstrap over G blocks
/// supports at most G-1.
WaldTest joint_placebo_test(const std::vector<double>& placebos, const Eigen::MatrixXd& covariance,
                            double zero_tol = 0.0, int max_rank = -1);

/// Two-sided normal p-value of estimate / se.
double normal_p_value(double estimate, double se);

/// Linear-interpolation (type 7) quantile of the finite values.
double quantile(std::vector<double> values, double q);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace idid
