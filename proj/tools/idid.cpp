// idid: batch front-end for the intertemporal event-study estimator.
//
//   idid run      --config run.json [--out DIR] [--threads N] [--verbose]
//   idid binwidth --config run.json [--out DIR] [--threads N] [--verbose]
//   idid simulate --config dgp.json --out DIR

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "idid/dgp.hpp"
#include "idid/errors.hpp"
#include "idid/pipeline.hpp"
#include "idid/version.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kEstimation = 4, kOther = 1 };

void report(const char* kind, const std::exception& e) {
  nlohmann::json err = {{"error", kind}, {"message", e.what()}};
  std::cerr << err.dump() << '\n';
}

int simulate_command(const fs::path& config, const fs::path& out) {
  std::ifstream in(config);
  if (!in) throw idid::ConfigError("cannot read '" + config.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto spec = idid::dgp_from_json(buf.str());
  const auto sim = idid::simulate(spec);

  idid::PanelSchema schema;
  schema.outcomes = {idid::DgpColumns::outcome};
  schema.flows = {idid::DgpColumns::flow};
  schema.covariates = {idid::DgpColumns::covariate};
  for (const auto& [name, _] : sim.panel.features()) schema.features.push_back(name);

  fs::create_directories(out);
  {
    std::ofstream f(out / "panel.csv", std::ios::binary);
    idid::write_panel(f, sim.panel, schema);
  }
  nlohmann::ordered_json truth;
  truth["delta"] = sim.truth.delta;
  truth["did"] = nlohmann::ordered_json::array();
  for (double d : sim.truth.did) truth["did"].push_back(std::isnan(d) ? nlohmann::ordered_json() : nlohmann::ordered_json(d));
  truth["clusters"] = sim.truth.clusters;
  truth["spec"] = nlohmann::ordered_json::parse(idid::dgp_to_json(spec));
  std::ofstream f(out / "truth.json", std::ios::binary);
  f << truth.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intertemporal difference-in-differences for cumulative, non-binary treatments"};
  app.set_version_flag("--version", idid::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int threads = 1;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output directory (overrides the configuration)");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", verbose, "Progress messages on stderr");
  };
  auto* run_cmd = app.add_subcommand("run", "Estimate every configured outcome and treatment");
  add_common(run_cmd);
  auto* bin_cmd = app.add_subcommand("binwidth", "Re-estimate with bin widths 1, 2, 5 and 10");
  add_common(bin_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic panel and its ground truth");
  add_common(sim_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (sim_cmd->parsed()) {
      if (out.empty()) throw idid::ConfigError("simulate requires --out");
      return simulate_command(config, out);
    }
    auto cfg = idid::load_run_config(config);
    if (!out.empty()) cfg.output_dir = out;
    idid::RunOptions options;
    options.threads = threads;
    options.verbose = verbose;
    const auto result = bin_cmd->parsed() ? idid::run_binwidth_harness(cfg, {1.0, 2.0, 5.0, 10.0}, options)
                                          : idid::run(cfg, options);
    if (verbose) {
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& job : result.jobs) {
        for (const auto& w : job.warnings) std::cerr << "warning [" << job.stem << "]: " << w << '\n';
      }
    }
    std::cout << "wrote " << result.jobs.size() << " estimation(s) to " << cfg.output_dir.string() << '\n';
    return kOk;
  } catch (const idid::ConfigError& e) {
    report("config", e);
    return kConfig;
  } catch (const idid::DataError& e) {
    report("data", e);
    return kData;
  } catch (const idid::EstimationError& e) {
    report("estimation", e);
    return kEstimation;
  } catch (const std::exception& e) {
    report("internal", e);
    return kOther;
  }
}
