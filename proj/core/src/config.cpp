#include "idid/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idid/errors.hpp"

namespace idid {
namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + where + "." + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + "." + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

std::vector<std::string> strings(const json& obj, const char* key, const std::string& where) {
  return get_or<std::vector<std::string>>(obj, key, where, {});
}

}  // namespace

const char* to_string(ControlVariant v) noexcept {
  switch (v) {
    case ControlVariant::linear: return "linear";
    case ControlVariant::quadratic: return "quadratic";
    case ControlVariant::none: break;
  }
  return "none";
}

const char* to_string(ResidualizeScope s) noexcept {
  return s == ResidualizeScope::bin ? "bin" : "bin_within_cluster";
}

const char* to_string(ResampleLevel l) noexcept { return l == ResampleLevel::unit ? "unit" : "cluster"; }

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  only_keys(doc, "config",
            {"input", "baseline_period", "treatments", "outcomes", "clustering", "controls", "estimation",
             "inference", "diagnostics", "output"});
  RunConfig c;
  c.canonical = doc.dump();

  const auto& in = doc.contains("input") ? doc.at("input") : throw ConfigError("missing required key 'input'");
  only_keys(in, "input", {"path", "delimiter", "unit", "period", "population", "min_baseline_population"});
  c.input_path = get<std::string>(in, "path", "input");
  if (c.input_path.is_relative() && !base_dir.empty()) c.input_path = base_dir / c.input_path;
  const auto delim = get_or<std::string>(in, "delimiter", "input", ",");
  if (delim.size() != 1) throw ConfigError("'input.delimiter' must be a single character");
  c.delimiter = delim[0];
  c.unit_column = get_or<std::string>(in, "unit", "input", c.unit_column);
  c.period_column = get_or<std::string>(in, "period", "input", c.period_column);
  c.population_column = get_or<std::string>(in, "population", "input", c.population_column);
  if (in.contains("min_baseline_population") && !in.at("min_baseline_population").is_null()) {
    c.min_baseline_population = get<double>(in, "min_baseline_population", "input");
  }

  c.baseline_period = get<int>(doc, "baseline_period", "config");

  if (!doc.contains("treatments") || !doc.at("treatments").is_array() || doc.at("treatments").empty()) {
    throw ConfigError("'treatments' must be a non-empty array");
  }
  std::set<std::string> treatment_names;
  for (const auto& t : doc.at("treatments")) {
    only_keys(t, "treatments[]", {"name", "flow", "bin_widths"});
    TreatmentSpec spec;
    spec.flow = get<std::string>(t, "flow", "treatments[]");
    spec.name = get_or<std::string>(t, "name", "treatments[]", spec.flow);
    spec.bin_widths = get_or<std::vector<double>>(t, "bin_widths", "treatments[]", {1.0});
    if (spec.bin_widths.empty()) throw ConfigError("'treatments[].bin_widths' must not be empty");
    for (double w : spec.bin_widths) {
      if (!(w > 0.0)) throw ConfigError("bin widths must be positive");
    }
    if (!treatment_names.insert(spec.name).second) throw ConfigError("duplicate treatment name '" + spec.name + "'");
    c.treatments.push_back(std::move(spec));
  }

  if (!doc.contains("outcomes") || !doc.at("outcomes").is_array() || doc.at("outcomes").empty()) {
    throw ConfigError("'outcomes' must be a non-empty array");
  }
  for (const auto& o : doc.at("outcomes")) {
    if (o.is_string()) {
      c.outcomes.push_back({o.get<std::string>(), false});
      continue;
    }
    only_keys(o, "outcomes[]", {"column", "log"});
    c.outcomes.push_back({get<std::string>(o, "column", "outcomes[]"), get_or<bool>(o, "log", "outcomes[]", false)});
  }

  if (doc.contains("clustering")) {
    const auto& cl = doc.at("clustering");
    only_keys(cl, "clustering", {"features", "k", "attractiveness"});
    c.clustering.features = strings(cl, "features", "clustering");
    c.clustering.k = get_or<int>(cl, "k", "clustering", 3);
    if (c.clustering.k < 1) throw ConfigError("'clustering.k' must be at least 1");
    if (cl.contains("attractiveness")) {
      const auto& a = cl.at("attractiveness");
      only_keys(a, "clustering.attractiveness", {"enabled", "dimensions"});
      c.clustering.attractiveness = get_or<bool>(a, "enabled", "clustering.attractiveness", false);
      c.clustering.attractiveness_dimensions = strings(a, "dimensions", "clustering.attractiveness");
      if (c.clustering.attractiveness && c.clustering.attractiveness_dimensions.size() != 5) {
        throw ConfigError("'clustering.attractiveness.dimensions' must name exactly 5 columns");
      }
    }
  }

  if (doc.contains("controls")) {
    const auto& ct = doc.at("controls");
    only_keys(ct, "controls", {"columns", "variant", "scope"});
    c.control_columns = strings(ct, "columns", "controls");
    const auto variant = get_or<std::string>(ct, "variant", "controls", c.control_columns.empty() ? "none" : "linear");
    if (variant == "none") {
      c.control_variant = ControlVariant::none;
    } else if (variant == "linear") {
      c.control_variant = ControlVariant::linear;
    } else if (variant == "quadratic") {
      c.control_variant = ControlVariant::quadratic;
    } else {
      throw ConfigError("'controls.variant' must be none, linear or quadratic");
    }
    const auto scope = get_or<std::string>(ct, "scope", "controls", "bin_within_cluster");
    if (scope == "bin_within_cluster") {
      c.control_scope = ResidualizeScope::bin_within_cluster;
    } else if (scope == "bin") {
      c.control_scope = ResidualizeScope::bin;
    } else {
      throw ConfigError("'controls.scope' must be bin_within_cluster or bin");
    }
    if (c.control_variant != ControlVariant::none && c.control_columns.empty()) {
      throw ConfigError("'controls.columns' must name at least one column for variant " + variant);
    }
  }

  if (doc.contains("estimation")) {
    const auto& e = doc.at("estimation");
    only_keys(e, "estimation", {"horizons", "placebos", "min_valid_horizons"});
    c.horizons = get_or<int>(e, "horizons", "estimation", c.horizons);
    c.placebos = get_or<int>(e, "placebos", "estimation", c.placebos);
    c.min_valid_horizons = get_or<int>(e, "min_valid_horizons", "estimation", c.min_valid_horizons);
    if (c.horizons < 1 || c.placebos < 0 || c.min_valid_horizons < 1) {
      throw ConfigError("'estimation' values out of range");
    }
  }

  if (!doc.contains("inference")) throw ConfigError("missing required key 'inference' (the seed is mandatory)");
  const auto& inf = doc.at("inference");
  only_keys(inf, "inference", {"replications", "resample", "seed"});
  c.seed = get<std::uint64_t>(inf, "seed", "inference");
  c.replications = get_or<int>(inf, "replications", "inference", c.replications);
  if (c.replications < 50) throw ConfigError("'inference.replications' must be at least 50");
  const auto level = get_or<std::string>(inf, "resample", "inference", "cluster");
  if (level == "cluster") {
    c.resample = ResampleLevel::cluster;
  } else if (level == "unit") {
    c.resample = ResampleLevel::unit;
  } else {
    throw ConfigError("'inference.resample' must be cluster or unit");
  }

  if (doc.contains("diagnostics")) {
    const auto& d = doc.at("diagnostics");
    only_keys(d, "diagnostics", {"soo", "twfe"});
    c.soo = get_or<bool>(d, "soo", "diagnostics", false);
    c.twfe = get_or<bool>(d, "twfe", "diagnostics", true);
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    only_keys(o, "output", {"directory"});
    c.output_dir = get_or<std::string>(o, "directory", "output", "out");
  }
  if (c.output_dir.empty()) c.output_dir = "out";
  if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

}  // namespace idid
