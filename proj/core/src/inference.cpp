#include "idid/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include "idid/errors.hpp"

namespace idid {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

Resample full_sample(const std::vector<int>& clusters) {
  Resample r;
  r.units.resize(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) r.units[i] = i;
  r.clusters = clusters;
  return r;
}

Resample draw_resample(const std::vector<int>& clusters, ResampleLevel level, std::uint64_t seed,
                       std::uint64_t replication) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
  std::mt19937_64 rng(seq);
  Resample r;
  const auto n = clusters.size();
  if (n == 0) return r;
  if (level == ResampleLevel::unit) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto u = pick(rng);
      r.units.push_back(u);
      r.clusters.push_back(clusters[u]);
    }
    return r;
  }
  std::map<int, std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < n; ++i) blocks[clusters[i]].push_back(i);
  std::vector<const std::vector<std::size_t>*> list;
  for (const auto& [_, members] : blocks) list.push_back(&members);
  std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
  for (std::size_t d = 0; d < list.size(); ++d) {
    const auto& members = *list[pick(rng)];
    for (auto u : members) {
      r.units.push_back(u);
      r.clusters.push_back(static_cast<int>(d) + 1);
    }
  }
  return r;
}

double quantile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapResult bootstrap_inference(const BootstrapStatistic& statistic, const std::vector<int>& clusters,
                                    const BootstrapOptions& options) {
  if (options.replications < 50) throw DomainError("bootstrap needs at least 50 replications");
  const auto b = static_cast<std::size_t>(options.replications);
  std::vector<std::optional<std::vector<double>>> draws(b);
  parallel_for(b, options.threads, [&](std::size_t i) {
    draws[i] = statistic(draw_resample(clusters, options.level, options.seed, i));
  });

  BootstrapResult out;
  out.requested = options.replications;
  std::size_t k = 0;
  for (const auto& d : draws) {
    if (d) {
      ++out.succeeded;
      k = std::max(k, d->size());
    }
  }
  out.failed = out.requested - out.succeeded;
  const auto needed = options.min_success * options.replications;
  if (out.succeeded < needed) {
    throw EstimationError("bootstrap: only " + std::to_string(out.succeeded) + " of " +
                          std::to_string(out.requested) + " replications succeeded");
  }
  out.replicates = Eigen::MatrixXd::Constant(out.succeeded, static_cast<Eigen::Index>(k),
                                             std::numeric_limits<double>::quiet_NaN());
  Eigen::Index row = 0;
  for (const auto& d : draws) {
    if (!d) continue;
    for (std::size_t j = 0; j < d->size(); ++j) out.replicates(row, static_cast<Eigen::Index>(j)) = (*d)[j];
    ++row;
  }
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> col;
    for (Eigen::Index r = 0; r < out.replicates.rows(); ++r) {
      const double v = out.replicates(r, static_cast<Eigen::Index>(j));
      if (std::isfinite(v)) col.push_back(v);
    }
    double se = std::numeric_limits<double>::quiet_NaN();
    if (col.size() >= 2 && static_cast<double>(col.size()) >= needed) {
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(col.size());
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      se = std::sqrt(ss / static_cast<double>(col.size() - 1));
    }
    out.se.push_back(se);
    out.percentile_lo.push_back(quantile(col, 0.025));
    out.percentile_hi.push_back(quantile(col, 0.975));
  }
  return out;
}

Eigen::MatrixXd replicate_covariance(const BootstrapResult& result, std::span<const std::size_t> columns) {
  const auto k = static_cast<Eigen::Index>(columns.size());
  std::vector<Eigen::VectorXd> rows;
  for (Eigen::Index r = 0; r < result.replicates.rows(); ++r) {
    Eigen::VectorXd v(k);
    bool ok = true;
    for (Eigen::Index j = 0; j < k; ++j) {
      v(j) = result.replicates(r, static_cast<Eigen::Index>(columns[static_cast<std::size_t>(j)]));
      ok = ok && std::isfinite(v(j));
    }
    if (ok) rows.push_back(std::move(v));
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  if (rows.size() < 2) return cov;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  for (const auto& v : rows) mean += v;
  mean /= static_cast<double>(rows.size());
  for (const auto& v : rows) cov += (v - mean) * (v - mean).transpose();
  return cov / static_cast<double>(rows.size() - 1);
}

WaldTest joint_placebo_test(const std::vector<double>& placebos, const Eigen::MatrixXd& covariance,
                            double zero_tol, int max_rank) {
  const auto k = static_cast<Eigen::Index>(placebos.size());
  if (k == 0) throw DomainError("joint placebo test needs at least one placebo");
  if (covariance.rows() != k || covariance.cols() != k) throw DomainError("covariance has wrong shape");
  Eigen::VectorXd p(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double v = placebos[static_cast<std::size_t>(i)];
    p(i) = std::abs(v) <= zero_tol ? 0.0 : v;
  }

  WaldTest test;
  if (p.isZero(0.0)) return test;
  if (max_rank == 0) {
    test.statistic = test.p_value = std::numeric_limits<double>::quiet_NaN();
    return test;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (covariance + covariance.transpose()));
  const auto& values = eig.eigenvalues();
  const double top = values.cwiseAbs().maxCoeff();
  const double tol = std::max(std::max(top, 0.0) * static_cast<double>(k) * 1e-12, zero_tol * zero_tol);
  double stat = 0.0;
  int rank = 0;
  // Eigenvalues come in increasing order; walk from the largest.
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    if (max_rank >= 0 && rank >= max_rank) break;
    if (values(i) > tol && values(i) > 0.0) {
      const double proj = eig.eigenvectors().col(i).dot(p);
      stat += proj * proj / values(i);
      ++rank;
    }
  }
  test.df = rank;
  if (rank == 0) {
    test.statistic = std::numeric_limits<double>::infinity();
    test.p_value = 0.0;
    return test;
  }
  test.statistic = stat;
  test.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(rank), stat));
  return test;
}

double normal_p_value(double estimate, double se) {
  if (!(se > 0.0) || !std::isfinite(se)) {
    if (estimate == 0.0) return 1.0;
    return std::isnan(se) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  }
  return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

}  // namespace idid
