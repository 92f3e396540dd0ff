#include "idid/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idid/errors.hpp"

namespace idid {

const std::vector<double>& FeatureMatrix::column(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return columns[j];
  }
  throw ConfigError("feature column '" + name + "' not found");
}

FeatureMatrix standardize(const FeatureMatrix& features, std::vector<std::string>* warnings) {
  const auto n = features.n_units();
  if (n < 2) throw DomainError("standardize needs at least 2 units");
  FeatureMatrix out = features;
  for (std::size_t j = 0; j < features.n_features(); ++j) {
    auto& col = out.columns[j];
    if (col.size() != n) throw DomainError("feature column '" + features.names[j] + "' has wrong length");
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      std::fill(col.begin(), col.end(), 0.0);
      if (warnings) warnings->push_back("feature '" + features.names[j] + "' is constant; set to zero");
      continue;
    }
    for (double& v : col) v = (v - mean) / sd;
  }
  out.standardized = true;
  return out;
}

Dendrogram complete_linkage(const FeatureMatrix& features) {
  const auto n = features.n_units();
  if (n < 2) throw DomainError("complete linkage needs at least 2 units");
  for (const auto& col : features.columns) {
    for (double v : col) {
      if (std::isnan(v)) throw DomainError("NaN in clustering features");
    }
  }

  // dist[i][j] between active clusters, indexed by slot; slot i starts as leaf i.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double ss = 0.0;
      for (const auto& col : features.columns) ss += (col[i] - col[j]) * (col[i] - col[j]);
      dist[i][j] = dist[j][i] = std::sqrt(ss);
    }
  }
  std::vector<int> slot_id(n);
  std::iota(slot_id.begin(), slot_id.end(), 0);
  std::vector<bool> active(n, true);

  // Each active slot caches its nearest active partner under the
  // (distance, id pair) order; merged distances only grow, so only rows that
  // pointed at a merged slot need a rescan.
  struct Nearest {
    double d = std::numeric_limits<double>::infinity();
    std::pair<int, int> ids{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    std::size_t j = 0;
  };
  auto better = [](double d, const std::pair<int, int>& ids, const Nearest& cur) {
    return d < cur.d || (d == cur.d && ids < cur.ids);
  };
  std::vector<Nearest> nearest(n);
  auto rescan = [&](std::size_t i) {
    Nearest best;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const std::pair<int, int> ids = std::minmax(slot_id[i], slot_id[j]);
      if (better(dist[i][j], ids, best)) best = {dist[i][j], ids, j};
    }
    nearest[i] = best;
  };
  for (std::size_t i = 0; i < n; ++i) rescan(i);

  Dendrogram tree;
  tree.n_leaves = n;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    std::size_t bi = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && (bi == n || better(nearest[i].d, nearest[i].ids, nearest[bi]))) bi = i;
    }
    std::size_t bj = nearest[bi].j;
    if (bj < bi) std::swap(bi, bj);
    tree.merges.push_back({nearest[bi].ids.first, nearest[bi].ids.second, nearest[bi].d});
    // Merged cluster lives in slot bi.
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double d = std::max(dist[bi][k], dist[bj][k]);
      dist[bi][k] = dist[k][bi] = d;
    }
    active[bj] = false;
    slot_id[bi] = static_cast<int>(n + m);
    for (std::size_t k = 0; k < n; ++k) {
      if (active[k] && (k == bi || nearest[k].j == bi || nearest[k].j == bj)) rescan(k);
    }
  }
  return tree;
}

ClusterAssignment cut(const Dendrogram& dendrogram, int k) {
  const auto n = dendrogram.n_leaves;
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw DomainError("cluster count k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  // Union-find over the first n-k merges.
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto applied = n - static_cast<std::size_t>(k);
  for (std::size_t m = 0; m < applied; ++m) {
    const auto& mg = dendrogram.merges.at(m);
    const auto node = n + m;
    parent[find(static_cast<std::size_t>(mg.a))] = node;
    parent[find(static_cast<std::size_t>(mg.b))] = node;
  }
  ClusterAssignment out;
  out.labels.resize(n);
  std::vector<int> label_of_root(2 * n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = label_of_root[find(i)];
    if (l == 0) l = ++next;
    out.labels[i] = l;
  }
  out.k = next;
  return out;
}

std::vector<double> mean_zscore(const std::vector<std::vector<double>>& zscores) {
  if (zscores.empty()) return {};
  const auto n = zscores.front().size();
  std::vector<double> out(n, 0.0);
  for (const auto& col : zscores) {
    for (std::size_t i = 0; i < n; ++i) out[i] += col.at(i);
  }
  for (double& v : out) v /= static_cast<double>(zscores.size());
  return out;
}

std::vector<double> attractiveness_index(const FeatureMatrix& features,
                                         const std::vector<std::string>& dimensions) {
  if (dimensions.size() != 5) throw ConfigError("attractiveness index needs exactly 5 dimensions");
  FeatureMatrix dims;
  dims.units = features.units;
  for (const auto& d : dimensions) {
    dims.names.push_back(d);
    dims.columns.push_back(features.column(d));
  }
  return mean_zscore(standardize(dims).columns);
}

}  // namespace idid
