#pragma once

#include <string>
#include <vector>

namespace idid {

/// Units x named real features, stored column-wise.
struct FeatureMatrix {
  std::vector<std::string> units;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  bool standardized = false;

  std::size_t n_units() const noexcept { return units.size(); }
  std::size_t n_features() const noexcept { return columns.size(); }
  const std::vector<double>& column(const std::string& name) const;
};

/// One agglomeration step. Leaves are 0..n-1, the cluster created by merge m
/// has id n+m.
struct Merge {
  int a = 0;
  int b = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;
};

/// labels[i] in 1..k, numbered in order of first appearance over units.
struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;
};

/// Z-scores every column with the sample (n-1) standard deviation. Constant
/// columns become zeros and add a message to `warnings` when given.
FeatureMatrix standardize(const FeatureMatrix& features, std::vector<std::string>* warnings = nullptr);

/// Complete-linkage agglomeration over Euclidean distances. Ties go to the
/// lexicographically smallest (a, b) cluster-id pair.
Dendrogram complete_linkage(const FeatureMatrix& features);

/// Partition obtained by undoing the last k-1 merges.
ClusterAssignment cut(const Dendrogram& dendrogram, int k);

/// Mean of z-scored dimensions per unit.
std::vector<double> mean_zscore(const std::vector<std::vector<double>>& zscores);

/// Standardizes the five named dimensions and averages them with equal weight.
std::vector<double> attractiveness_index(const FeatureMatrix& features,
                                         const std::vector<std::string>& dimensions);

}  // namespace idid
