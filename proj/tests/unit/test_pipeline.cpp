#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "idid/config.hpp"
#include "idid/dgp.hpp"
#include "idid/errors.hpp"
#include "idid/pipeline.hpp"

using namespace idid;
namespace fs = std::filesystem;

namespace {

void write_sim(const SimulatedPanel& sim, const fs::path& file) {
  PanelSchema s;
  s.outcomes = {"y"};
  s.flows = {"flow"};
  s.covariates = {"x"};
  for (const auto& [name, _] : sim.panel.features()) s.features.push_back(name);
  std::ofstream out(file);
  write_panel(out, sim.panel, s);
}

std::string config_text(const std::string& extra_outcome = "") {
  return R"({
    "input": {"path": "panel.csv", "unit": "unit", "period": "period", "population": "population"},
    "baseline_period": 2010,
    "treatments": [{"name": "inflow", "flow": "flow", "bin_widths": [1]}],
    "outcomes": ["y")" + extra_outcome + R"(],
    "clustering": {"features": ["pre_migration", "pre_population"], "k": 2},
    "controls": {"columns": ["x"], "variant": "linear"},
    "estimation": {"horizons": 5, "placebos": 2},
    "inference": {"replications": 60, "resample": "cluster", "seed": 17},
    "output": {"directory": "out"}
  })";
}

fs::path setup(const std::string& name, const DgpSpec& spec, const std::string& config) {
  const auto dir = fixtures::scratch_dir(name);
  write_sim(simulate(spec), dir / "panel.csv");
  std::ofstream(dir / "run.json") << config;
  return dir;
}

DgpSpec small_spec() {
  DgpSpec spec;
  spec.n_units = 80;
  spec.n_periods = 8;
  spec.noise_sd = 1.0;
  spec.n_clusters = 2;
  spec.gamma = 0.5;
  spec.seed = 3;
  return spec;
}

}  // namespace

TEST(Config, ParsesFullDocument) {
  const auto c = parse_run_config(config_text(), "/data");
  EXPECT_EQ(c.input_path, fs::path("/data/panel.csv"));
  EXPECT_EQ(c.baseline_period, 2010);
  ASSERT_EQ(c.treatments.size(), 1u);
  EXPECT_EQ(c.treatments[0].flow, "flow");
  EXPECT_EQ(c.clustering.k, 2);
  EXPECT_EQ(c.control_variant, ControlVariant::linear);
  EXPECT_EQ(c.horizons, 5);
  EXPECT_EQ(c.placebos, 2);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.output_dir, fs::path("/data/out"));
}

TEST(Config, RejectsBadDocuments) {
  const std::string base = config_text();
  auto replaced = [&](const std::string& from, const std::string& to) {
    auto s = base;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_THROW(parse_run_config(replaced("\"seed\": 17", "\"sed\": 17")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced(", \"seed\": 17", "")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced("\"baseline_period\": 2010,", "")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced("\"linear\"", "\"cubic\"")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced("[1]", "[0]")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced("\"replications\": 60", "\"replications\": 10")), ConfigError);
  EXPECT_THROW(parse_run_config(replaced("\"k\": 2", "\"k\": 2, \"method\": \"ward\"")), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(parse_run_config(config_text()).canonical, parse_run_config(config_text()).canonical);
  EXPECT_NE(fnv1a_hex(parse_run_config(config_text()).canonical),
            fnv1a_hex(parse_run_config(config_text(", \"x\"")).canonical));
}

TEST(Pipeline, WritesReportsAndManifest) {
  const auto dir = setup("reports", small_spec(), config_text());
  const auto cfg = load_run_config(dir / "run.json");
  const auto result = run(cfg);
  ASSERT_EQ(result.jobs.size(), 1u);
  EXPECT_EQ(result.n_clusters, 2);
  for (const char* f : {"ate_summary.csv", "manifest.json", "switch_audit_inflow_w1.csv", "y_inflow_w1.json",
                        "y_inflow_w1_event_study.csv", "y_inflow_w1_normalized.csv", "y_inflow_w1_placebo.csv",
                        "y_inflow_w1_weights.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "out" / ".idid-staging"));
  const auto es = fixtures::read_file(dir / "out" / "y_inflow_w1_event_study.csv");
  EXPECT_EQ(es.substr(0, es.find('\n')), "horizon,estimate,se,ci_lo,ci_hi,n");
  const auto manifest = fixtures::read_file(dir / "out" / "manifest.json");
  EXPECT_NE(manifest.find(fnv1a_hex(cfg.canonical)), std::string::npos);
  EXPECT_NE(manifest.find("\"switchers_in\""), std::string::npos);
}

TEST(Pipeline, SingleClusterFallsBackToUnitResampling) {
  auto text = config_text();
  text.replace(text.find("\"k\": 2"), 6, "\"k\": 1");
  const auto dir = setup("one-cluster", small_spec(), text);
  const auto result = run(load_run_config(dir / "run.json"));
  EXPECT_EQ(result.n_clusters, 1);
  EXPECT_EQ(result.resample, ResampleLevel::unit);
  EXPECT_GT(result.jobs[0].result.ate.se, 0.0);
  EXPECT_NE(fixtures::read_file(dir / "out" / "manifest.json").find("\"resample\": \"unit\""), std::string::npos);
}

TEST(Pipeline, NullDesignAteCoversZero) {
  auto spec = small_spec();
  spec.beta = 0.0;
  spec.n_units = 150;
  const auto dir = setup("null", spec, config_text());
  const auto result = run(load_run_config(dir / "run.json"));
  const auto& ate = result.jobs[0].result.ate;
  EXPECT_LE(ate.ci_lo, 0.0);
  EXPECT_GE(ate.ci_hi, 0.0);
}

TEST(Pipeline, RerunAndThreadCountGiveIdenticalFiles) {
  auto text = config_text(", \"y\"");
  text = config_text();
  text.replace(text.find("[1]"), 3, "[1, 2]");
  const auto dir = setup("determinism", small_spec(), text);
  auto cfg = load_run_config(dir / "run.json");
  std::vector<std::vector<std::string>> contents;
  for (int threads : {1, 1, 3}) {
    cfg.output_dir = dir / ("out" + std::to_string(contents.size()));
    RunOptions opt;
    opt.threads = threads;
    const auto written = write_outputs(run_analysis(cfg, opt), cfg, cfg.output_dir);
    std::vector<std::string> files;
    for (const auto& p : written) files.push_back(p.filename().string() + "\n" + fixtures::read_file(p));
    contents.push_back(files);
  }
  EXPECT_EQ(contents[0], contents[1]);
  EXPECT_EQ(contents[0], contents[2]);
}

TEST(Pipeline, BinwidthHarnessWidthOneMatchesMainRun) {
  const auto dir = setup("binwidth", small_spec(), config_text());
  auto cfg = load_run_config(dir / "run.json");
  const auto main_run = run_analysis(cfg);
  cfg.output_dir = dir / "harness";
  const auto harness = run_binwidth_harness(cfg, {1, 2, 5, 10});
  ASSERT_EQ(harness.jobs.size(), 4u);
  EXPECT_EQ(harness.jobs[0].bin_width, 1.0);
  EXPECT_EQ(harness.jobs[0].result.ate.estimate, main_run.jobs[0].result.ate.estimate);
  EXPECT_EQ(harness.jobs[0].result.ate.se, main_run.jobs[0].result.ate.se);
  const auto table = fixtures::read_file(cfg.output_dir / "binwidth_comparison.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "outcome,treatment,bin_width,estimate,p_value_ate,p_value_placebo,ci_lo,ci_hi");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

TEST(Pipeline, MissingColumnIsConfigErrorNamingIt) {
  auto text = config_text();
  text.replace(text.find("\"x\"]"), 4, "\"rent\"]");
  const auto dir = setup("missing", small_spec(), text);
  try {
    run(load_run_config(dir / "run.json"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rent"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Pipeline, FailedWriteLeavesNoPartialOutputs) {
  const auto dir = setup("partial", small_spec(), config_text());
  auto cfg = load_run_config(dir / "run.json");
  auto result = run_analysis(cfg);
  // A directory squatting on a report name makes the final move fail.
  fs::create_directories(dir / "out" / "y_inflow_w1.json" / "blocker");
  EXPECT_ANY_THROW(write_outputs(result, cfg, dir / "out"));
  EXPECT_FALSE(fs::exists(dir / "out" / ".idid-staging"));
}

#ifdef IDID_CLI_PATH
namespace {

int cli(const std::string& args) {
  const int status = std::system((std::string(IDID_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = setup("cli", small_spec(), config_text());
  EXPECT_EQ(cli("run --config " + (dir / "run.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));

  auto text = config_text();
  text.replace(text.find("\"y\"]"), 4, "\"students\"]");
  std::ofstream(dir / "bad.json") << text;
  EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 2);

  std::ofstream(dir / "panel_bad.csv") << "unit,period,population,y,flow,x,pre_migration,pre_population\n"
                                          "a,2010,0,1,0,0,0,0\na,2011,0,1,0,0,0,0\n";
  auto bad_data = config_text();
  bad_data.replace(bad_data.find("panel.csv"), 9, "panel_bad.csv");
  std::ofstream(dir / "bad_data.json") << bad_data;
  EXPECT_EQ(cli("run --config " + (dir / "bad_data.json").string()), 3);

  DgpSpec no_switch;
  no_switch.n_units = 30;
  no_switch.never_share = 1.0;
  write_sim(simulate(no_switch), dir / "panel_flat.csv");
  auto flat = config_text();
  flat.replace(flat.find("panel.csv"), 9, "panel_flat.csv");
  std::ofstream(dir / "flat.json") << flat;
  EXPECT_EQ(cli("run --config " + (dir / "flat.json").string()), 4);

  std::ofstream(dir / "dgp.json") << "{\"n_units\": 20, \"seed\": 4}";
  EXPECT_EQ(cli("simulate --config " + (dir / "dgp.json").string() + " --out " + (dir / "sim").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "sim" / "panel.csv"));
  EXPECT_TRUE(fs::exists(dir / "sim" / "truth.json"));
}
#endif
