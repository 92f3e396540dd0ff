#pragma once

// Reference implementations written straight from the definitions with
// plain loops. They share no code with the library.

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

struct TinyPanel {
  std::vector<std::vector<int>> bins;    // unit x period
  std::vector<std::vector<double>> y;    // unit x period, complete
  std::vector<int> clusters;             // one per unit
};

struct DidOracle {
  std::map<int, double> did;             // horizon -> DID_l
  std::map<int, double> did_normalized;  // horizon -> DID^n_l
  std::map<int, double> mean_abs_delta;
  std::map<int, double> placebo;         // lead -> placebo
  std::optional<double> delta;
};

DidOracle brute_force_did(const TinyPanel& panel, int max_horizon, int placebos);

struct OracleMerge {
  int a;
  int b;
  double height;
};

/// Complete linkage recomputed from leaf sets at every step.
std::vector<OracleMerge> brute_force_linkage(const std::vector<std::vector<double>>& points);

/// Labels (1..k by first appearance) after applying the first n-k merges.
std::vector<int> brute_force_cut(const std::vector<OracleMerge>& merges, int n, int k);

}  // namespace oracle
