#pragma once

#include <vector>

#include "idid/analysis.hpp"
#include "idid/cohorts.hpp"
#include "idid/dgp.hpp"
#include "idid/exposure.hpp"

namespace bench {

struct Sim {
  idid::SimulatedPanel sim;
  std::vector<idid::TreatmentPath> paths;
  std::vector<idid::SwitchProfile> profiles;

  idid::AnalysisInput input(bool with_controls = false) const {
    idid::AnalysisInput in{paths, profiles, sim.truth.clusters, sim.panel.outcome(idid::DgpColumns::outcome), {}};
    if (with_controls) in.controls.push_back(sim.panel.covariate(idid::DgpColumns::covariate));
    return in;
  }
};

inline Sim make_sim(int units, int periods, int clusters = 3) {
  idid::DgpSpec spec;
  spec.n_units = units;
  spec.n_periods = periods;
  spec.baseline_bins = {0, 1, 2};
  spec.baseline_weights = {1.0, 1.0, 1.0};
  spec.step_values = {0, 1};
  spec.step_weights = {1.0, 1.0};
  spec.n_clusters = clusters;
  spec.gamma = 0.5;
  spec.seed = 7;
  Sim s{idid::simulate(spec), {}, {}};
  s.paths = idid::discretize(idid::cumulative_exposure(s.sim.panel, idid::DgpColumns::flow), 1.0);
  s.profiles = idid::build_profiles(s.paths);
  return s;
}

}  // namespace bench
