#include "idid/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <set>

#include <json.hpp>

#include "idid/clustering.hpp"
#include "idid/errors.hpp"
#include "idid/exposure.hpp"
#include "idid/version.hpp"

namespace idid {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Job seeds depend on treatment and outcome but not on the bin width, so the
// same draws are reused across widths.
std::uint64_t job_seed(std::uint64_t seed, const std::string& treatment, const std::string& outcome) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(treatment + '\x1f' + outcome)),
                    static_cast<std::uint32_t>(fnv1a(treatment + '\x1f' + outcome) >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

ordered_json num(double v) { return is_missing(v) || !std::isfinite(v) ? ordered_json(nullptr) : ordered_json(v); }

ordered_json row_json(const EstimateRow& r) {
  return {{"horizon", r.horizon},    {"estimate", num(r.estimate)},     {"se", num(r.se)},
          {"ci_lo", num(r.ci_lo)},    {"ci_hi", num(r.ci_hi)},          {"percentile_lo", num(r.percentile_lo)},
          {"percentile_hi", num(r.percentile_hi)}, {"n", r.n}};
}

void write_rows(std::ostream& out, const std::vector<EstimateRow>& rows, const char* first = "horizon") {
  out << first << ",estimate,se,ci_lo,ci_hi,n\n";
  for (const auto& r : rows) {
    out << r.horizon << ',' << format_number(r.estimate) << ',' << format_number(r.se) << ','
        << format_number(r.ci_lo) << ',' << format_number(r.ci_hi) << ',' << r.n << '\n';
  }
}

PanelSchema schema_for(const RunConfig& c) {
  PanelSchema s;
  s.unit = c.unit_column;
  s.period = c.period_column;
  s.population = c.population_column;
  s.delimiter = c.delimiter;
  s.baseline_period = c.baseline_period;
  s.min_baseline_population = c.min_baseline_population;
  std::set<std::string> seen;
  for (const auto& o : c.outcomes) {
    if (!seen.insert(o.column).second) throw ConfigError("outcome '" + o.column + "' listed twice");
    s.outcomes.push_back(o.column);
    if (o.log) s.log_outcomes.push_back(o.column);
  }
  std::set<std::string> flows;
  for (const auto& t : c.treatments) {
    if (flows.insert(t.flow).second) s.flows.push_back(t.flow);
  }
  s.covariates = c.control_columns;
  std::set<std::string> feats;
  for (const auto& f : c.clustering.features) {
    if (feats.insert(f).second) s.features.push_back(f);
  }
  if (c.clustering.attractiveness) {
    for (const auto& f : c.clustering.attractiveness_dimensions) {
      if (feats.insert(f).second) s.features.push_back(f);
    }
  }
  return s;
}

std::vector<int> cluster_units(const PanelDataset& panel, const RunConfig& c, int* k_out,
                               std::vector<std::string>& warnings) {
  FeatureMatrix fm;
  fm.units = panel.units();
  for (const auto& f : c.clustering.features) {
    fm.names.push_back(f);
    fm.columns.push_back(panel.feature(f));
  }
  if (c.clustering.attractiveness) {
    FeatureMatrix dims;
    dims.units = panel.units();
    for (const auto& d : c.clustering.attractiveness_dimensions) {
      dims.names.push_back(d);
      dims.columns.push_back(panel.feature(d));
    }
    fm.names.push_back("attractiveness");
    fm.columns.push_back(attractiveness_index(dims, c.clustering.attractiveness_dimensions));
  }
  if (fm.columns.empty()) {
    *k_out = 1;
    return {};
  }
  if (static_cast<std::size_t>(c.clustering.k) > panel.n_units()) {
    throw ConfigError("'clustering.k' exceeds the number of units");
  }
  const auto z = standardize(fm, &warnings);
  const auto assignment = cut(complete_linkage(z), c.clustering.k);
  *k_out = assignment.k;
  return assignment.labels;
}

void log(const RunOptions& o, const std::string& msg) {
  if (o.verbose) std::cerr << "idid: " << msg << '\n';
}

}  // namespace

std::string format_number(double value) {
  if (is_missing(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

RunResult run_analysis(const RunConfig& config, const RunOptions& options) {
  RunResult out;
  out.config_hash = fnv1a_hex(config.canonical);
  out.seed = config.seed;

  std::ifstream in(config.input_path);
  if (!in) throw ConfigError("cannot open input file '" + config.input_path.string() + "'");
  const auto panel = load_panel(in, schema_for(config), &out.load);
  out.units = panel.units();
  out.periods = panel.periods();
  out.warnings = out.load.warnings;
  log(options, "loaded " + std::to_string(panel.n_units()) + " units x " + std::to_string(panel.n_periods()) +
                   " periods");

  out.clusters = cluster_units(panel, config, &out.n_clusters, out.warnings);
  out.resample = config.resample;
  if (config.resample == ResampleLevel::cluster && out.n_clusters < 2) {
    out.resample = ResampleLevel::unit;
    out.warnings.push_back("only one cluster: bootstrap resamples units instead of clusters");
  }

  std::vector<PanelMatrix> controls;
  for (const auto& name : config.control_columns) controls.push_back(panel.covariate(name));

  std::vector<std::vector<double>> soo_features;
  for (const auto& f : config.clustering.features) soo_features.push_back(panel.feature(f));

  // Paths and profiles per (treatment, width); jobs reference them by index.
  std::vector<std::vector<TreatmentPath>> paths;
  for (const auto& t : config.treatments) {
    const auto exposure = cumulative_exposure(panel, t.flow);
    const auto widths = options.bin_widths ? *options.bin_widths : t.bin_widths;
    if (widths.empty()) throw ConfigError("no bin widths given");
    for (double w : widths) {
      if (!(w > 0.0)) throw ConfigError("bin widths must be positive");
      paths.push_back(discretize(exposure, w));
      out.profiles.push_back({t.name, w, build_profiles(paths.back())});
    }
  }

  struct Job {
    std::size_t treatment_slot;
    std::size_t outcome;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < out.profiles.size(); ++s) {
    for (std::size_t o = 0; o < config.outcomes.size(); ++o) jobs.push_back({s, o});
  }
  out.jobs.resize(jobs.size());

  const int threads = std::max(1, options.threads);
  const bool fan_out_jobs = jobs.size() > 1 && threads > 1;

  std::mutex log_mutex;
  parallel_for(jobs.size(), fan_out_jobs ? threads : 1, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& prof = out.profiles[job.treatment_slot];
    const auto& outcome = config.outcomes[job.outcome].column;
    JobResult& r = out.jobs[j];
    r.treatment = prof.treatment;
    r.bin_width = prof.bin_width;
    r.outcome = outcome;
    r.stem = sanitize(outcome) + "_" + sanitize(prof.treatment) + "_w" + sanitize(format_number(prof.bin_width));
    r.seed = job_seed(config.seed, prof.treatment, outcome);

    AnalysisInput input{paths[job.treatment_slot], prof.profiles, out.clusters, panel.outcome(outcome), controls};
    AnalysisOptions ao;
    ao.estimator.max_horizon = config.horizons;
    ao.estimator.placebos = config.placebos;
    ao.estimator.min_valid_horizons = config.min_valid_horizons;
    ao.residualize.variant = config.control_variant;
    ao.residualize.scope = config.control_scope;
    ao.bootstrap.replications = config.replications;
    ao.bootstrap.level = out.resample;
    ao.bootstrap.seed = r.seed;
    ao.bootstrap.threads = fan_out_jobs ? 1 : threads;
    try {
      r.result = analyze(input, ao);
      r.estimated = true;
    } catch (const EstimationError& e) {
      r.warnings.push_back(std::string("not estimated: ") + e.what());
      return;
    }
    r.warnings.insert(r.warnings.end(), r.result.warnings.begin(), r.result.warnings.end());

    if (config.twfe) {
      try {
        r.twfe = twfe_estimate(input.outcome, paths[job.treatment_slot]);
      } catch (const Error& e) {
        r.warnings.push_back(std::string("TWFE comparison skipped: ") + e.what());
      }
    }
    if (config.soo) {
      try {
        r.soo = soo_check(input.outcome, prof.profiles, soo_features, out.clusters);
        for (const auto& w : r.soo->warnings) r.warnings.push_back(w);
      } catch (const Error& e) {
        r.warnings.push_back(std::string("selection-on-observables check skipped: ") + e.what());
      }
    }
    const std::lock_guard lock(log_mutex);
    log(options, "estimated " + r.stem);
  });
  if (std::none_of(out.jobs.begin(), out.jobs.end(), [](const JobResult& j) { return j.estimated; })) {
    std::string msg = "no job could be estimated";
    if (!out.jobs.empty() && !out.jobs.front().warnings.empty()) msg += " (" + out.jobs.front().warnings.front() + ")";
    throw EstimationError(msg);
  }
  return out;
}

std::vector<fs::path> write_outputs(const RunResult& result, const RunConfig& config, const fs::path& directory) {
  fs::create_directories(directory);
  const fs::path staging = directory / ".idid-staging";
  fs::remove_all(staging);
  fs::create_directories(staging);

  std::vector<std::string> names;
  auto open = [&](const std::string& name) {
    names.push_back(name);
    std::ofstream f(staging / name, std::ios::binary);
    if (!f) throw Error("cannot write '" + (directory / name).string() + "'");
    return f;
  };

  try {
    for (const auto& p : result.profiles) {
      auto f = open("switch_audit_" + sanitize(p.treatment) + "_w" + sanitize(format_number(p.bin_width)) + ".csv");
      write_switch_audit(f, p.profiles, result.periods);
    }

    for (const auto& job : result.jobs) {
      const auto& r = job.result;
      {
        auto f = open(job.stem + "_event_study.csv");
        write_rows(f, r.effects);
      }
      {
        auto f = open(job.stem + "_normalized.csv");
        write_rows(f, r.normalized);
      }
      {
        auto f = open(job.stem + "_placebo.csv");
        write_rows(f, r.placebos);
      }
      {
        auto f = open(job.stem + "_weights.csv");
        f << "horizon,lag,weight\n";
        for (std::size_t i = 0; i < r.weights.horizons.size(); ++i) {
          for (std::size_t k = 0; k < r.weights.weights[i].size(); ++k) {
            f << r.weights.horizons[i] << ',' << k << ',' << format_number(r.weights.weights[i][k]) << '\n';
          }
        }
      }
      {
        ordered_json j;
        j["outcome"] = job.outcome;
        j["treatment"] = job.treatment;
        j["bin_width"] = job.bin_width;
        j["seed"] = job.seed;
        j["estimated"] = job.estimated;
        j["ate"] = {{"estimate", num(r.ate.estimate)}, {"se", num(r.ate.se)},
                    {"ci_lo", num(r.ate.ci_lo)},       {"ci_hi", num(r.ate.ci_hi)},
                    {"percentile_lo", num(r.ate.percentile_lo)}, {"percentile_hi", num(r.ate.percentile_hi)},
                    {"p_value", num(r.ate.p_value)},   {"cells", r.ate.cells}};
        for (const auto& row : r.effects) j["event_study"].push_back(row_json(row));
        for (std::size_t i = 0; i < r.normalized.size(); ++i) {
          auto n = row_json(r.normalized[i]);
          n["mean_abs_delta"] = num(r.mean_abs_delta[i]);
          j["normalized"].push_back(n);
        }
        for (const auto& row : r.placebos) j["placebo"].push_back(row_json(row));
        if (r.has_joint_placebo) {
          j["joint_placebo"] = {{"statistic", num(r.joint_placebo.statistic)},
                                {"df", r.joint_placebo.df},
                                {"p_value", num(r.joint_placebo.p_value)}};
        } else {
          j["joint_placebo"] = nullptr;
        }
        j["weights"] = ordered_json::array();
        for (std::size_t i = 0; i < r.weights.horizons.size(); ++i) {
          ordered_json w;
          w["horizon"] = r.weights.horizons[i];
          w["lags"] = ordered_json::array();
          for (double x : r.weights.weights[i]) w["lags"].push_back(num(x));
          j["weights"].push_back(w);
        }
        j["bootstrap"] = {{"requested", r.replications},
                          {"succeeded", r.replications_succeeded},
                          {"failed", r.replications_failed}};
        j["twfe"] = job.twfe ? num(*job.twfe) : ordered_json(nullptr);
        if (job.soo) {
          j["soo"] = {{"coefficient", num(job.soo->coefficient)}, {"se", num(job.soo->se)},
                      {"p_value", num(job.soo->p_value)},        {"observations", job.soo->observations},
                      {"units", job.soo->units},                  {"cohorts", job.soo->cohorts}};
        }
        j["warnings"] = job.warnings;
        auto f = open(job.stem + ".json");
        f << j.dump(2) << '\n';
      }
    }

    {
      auto f = open("ate_summary.csv");
      f << "outcome,treatment,bin_width,estimate,se,p_value_ate,p_value_placebo,ci_lo,ci_hi,cells,units_estimated,"
           "twfe\n";
      for (const auto& job : result.jobs) {
        auto a = job.result.ate;
        if (!job.estimated) a = {kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, 0};
        f << job.outcome << ',' << job.treatment << ',' << format_number(job.bin_width) << ','
          << format_number(a.estimate) << ',' << format_number(a.se) << ',' << format_number(a.p_value) << ','
          << format_number(job.result.has_joint_placebo ? job.result.joint_placebo.p_value : kMissing) << ','
          << format_number(a.ci_lo) << ',' << format_number(a.ci_hi) << ',' << a.cells << ','
          << job.result.units_estimated << ',' << format_number(job.twfe ? *job.twfe : kMissing) << '\n';
      }
    }

    std::set<std::string> treatments_with_widths;
    std::map<std::string, int> width_count;
    for (const auto& p : result.profiles) ++width_count[p.treatment];
    const bool compare = std::any_of(width_count.begin(), width_count.end(), [](auto& kv) { return kv.second > 1; });
    if (compare) {
      auto f = open("binwidth_comparison.csv");
      f << "outcome,treatment,bin_width,estimate,p_value_ate,p_value_placebo,ci_lo,ci_hi\n";
      for (const auto& job : result.jobs) {
        auto a = job.result.ate;
        if (!job.estimated) a = {kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, kMissing, 0};
        f << job.outcome << ',' << job.treatment << ',' << format_number(job.bin_width) << ','
          << format_number(a.estimate) << ',' << format_number(a.p_value) << ','
          << format_number(job.result.has_joint_placebo ? job.result.joint_placebo.p_value : kMissing) << ','
          << format_number(a.ci_lo) << ',' << format_number(a.ci_hi) << '\n';
      }
    }

    if (config.soo) {
      auto f = open("soo_summary.csv");
      f << "outcome,treatment,bin_width,coefficient,se,p_value,observations,cohorts\n";
      for (const auto& job : result.jobs) {
        if (!job.soo) continue;
        f << job.outcome << ',' << job.treatment << ',' << format_number(job.bin_width) << ','
          << format_number(job.soo->coefficient) << ',' << format_number(job.soo->se) << ','
          << format_number(job.soo->p_value) << ',' << job.soo->observations << ',' << job.soo->cohorts << '\n';
      }
    }

    {
      ordered_json m;
      m["tool"] = "idid";
      m["version"] = kVersion;
      m["config_hash"] = result.config_hash;
      m["seed"] = result.seed;
      m["input"] = {{"file", config.input_path.filename().string()},
                    {"rows", result.load.rows},
                    {"units", result.units.size()},
                    {"periods", result.periods.size()},
                    {"dropped_small_units", result.load.dropped_small_units}};
      m["clusters"] = result.n_clusters;
      m["replications"] = config.replications;
      m["resample"] = to_string(result.resample);
      m["controls"] = {{"columns", config.control_columns},
                       {"variant", to_string(config.control_variant)},
                       {"scope", to_string(config.control_scope)}};
      m["jobs"] = ordered_json::array();
      for (const auto& job : result.jobs) {
        const auto& r = job.result;
        m["jobs"].push_back({{"outcome", job.outcome},
                             {"estimated", job.estimated},
                             {"treatment", job.treatment},
                             {"bin_width", job.bin_width},
                             {"units", r.units},
                             {"switchers_in", r.switchers_in},
                             {"switchers_out", r.switchers_out},
                             {"never_switchers", r.never_switchers},
                             {"units_estimated", r.units_estimated},
                             {"switchers_without_controls", r.switchers_without_controls},
                             {"below_min_horizons", r.below_min_horizons},
                             {"trimmed_units", r.trimmed_units},
                             {"replications_succeeded", r.replications_succeeded},
                             {"replications_failed", r.replications_failed}});
      }
      m["warnings"] = result.warnings;
      auto listed = names;
      listed.push_back("manifest.json");
      m["files"] = listed;
      auto f = open("manifest.json");
      f << m.dump(2) << '\n';
    }

    std::vector<fs::path> written;
    for (const auto& n : names) {
      fs::rename(staging / n, directory / n);
      written.push_back(directory / n);
    }
    fs::remove_all(staging);
    return written;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  auto result = run_analysis(config, options);
  write_outputs(result, config, config.output_dir);
  return result;
}

RunResult run_binwidth_harness(const RunConfig& config, const std::vector<double>& widths,
                               const RunOptions& options) {
  auto opts = options;
  opts.bin_widths = widths;
  auto result = run_analysis(config, opts);
  write_outputs(result, config, config.output_dir);
  return result;
}

}  // namespace idid
