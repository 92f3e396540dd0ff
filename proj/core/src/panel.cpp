#include "idid/panel.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "idid/errors.hpp"

namespace idid {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.emplace_back(trim(field));
  return fields;
}

bool is_na(std::string_view s) { return s.empty() || s == "NA"; }

double parse_number(std::string_view text, std::size_t row, const std::string& column) {
  if (is_na(text)) return kMissing;
  double value = 0.0;
  const char* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(value)) {
    throw ParseError("non-numeric value '" + std::string(text) + "' at row " +
                         std::to_string(row) + ", column '" + column + "'",
                     row, column);
  }
  return value;
}

int parse_period(std::string_view text, std::size_t row, const std::string& column) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("period '" + std::string(text) + "' at row " + std::to_string(row) +
                         " is not an integer year",
                     row, column);
  }
  return value;
}

std::string format_number(double v) {
  if (is_missing(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class Map>
const typename Map::mapped_type& lookup(const Map& map, const std::string& name,
                                        const char* kind) {
  auto it = map.find(name);
  if (it == map.end()) throw ConfigError(std::string("unknown ") + kind + " '" + name + "'");
  return it->second;
}

}  // namespace

PanelDataset PanelDataset::create(Parts parts) {
  const auto n = parts.units.size();
  const auto t = parts.periods.size();
  if (n == 0 || t == 0) throw StructuralError("panel has no units or no periods");
  if (!std::is_sorted(parts.periods.begin(), parts.periods.end()) ||
      std::adjacent_find(parts.periods.begin(), parts.periods.end()) != parts.periods.end()) {
    throw StructuralError("periods must be strictly increasing");
  }
  if (std::set<std::string>(parts.units.begin(), parts.units.end()).size() != n) {
    throw DuplicateError("duplicated unit identifier");
  }
  if (parts.baseline_population.size() != n) {
    throw StructuralError("baseline population must have one entry per unit");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double pop = parts.baseline_population[i];
    if (!(pop > 0.0)) {
      throw DomainError("baseline population of unit '" + parts.units[i] +
                        "' must be positive");
    }
  }
  auto check = [&](const std::map<std::string, PanelMatrix>& m, const char* kind) {
    for (const auto& [name, mat] : m) {
      if (static_cast<std::size_t>(mat.rows()) != n || static_cast<std::size_t>(mat.cols()) != t) {
        throw StructuralError(std::string(kind) + " '" + name + "' has wrong dimensions");
      }
    }
  };
  check(parts.outcomes, "outcome");
  check(parts.flows, "flow");
  check(parts.covariates, "covariate");
  for (const auto& [name, col] : parts.features) {
    if (col.size() != n) throw StructuralError("feature '" + name + "' has wrong length");
  }
  return PanelDataset(std::move(parts));
}

const PanelMatrix& PanelDataset::outcome(const std::string& name) const {
  return lookup(parts_.outcomes, name, "outcome");
}
const PanelMatrix& PanelDataset::flow(const std::string& name) const {
  return lookup(parts_.flows, name, "flow");
}
const PanelMatrix& PanelDataset::covariate(const std::string& name) const {
  return lookup(parts_.covariates, name, "covariate");
}
const std::vector<double>& PanelDataset::feature(const std::string& name) const {
  return lookup(parts_.features, name, "feature");
}

std::optional<std::size_t> PanelDataset::period_index(int period) const {
  auto it = std::lower_bound(parts_.periods.begin(), parts_.periods.end(), period);
  if (it == parts_.periods.end() || *it != period) return std::nullopt;
  return static_cast<std::size_t>(it - parts_.periods.begin());
}

PanelDataset PanelDataset::subset(const std::vector<std::size_t>& keep) const {
  Parts out;
  out.periods = parts_.periods;
  const auto rows = static_cast<Eigen::Index>(keep.size());
  auto take = [&](const std::map<std::string, PanelMatrix>& src) {
    std::map<std::string, PanelMatrix> dst;
    for (const auto& [name, mat] : src) {
      PanelMatrix m(rows, mat.cols());
      for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = mat.row(static_cast<Eigen::Index>(keep[r]));
      dst.emplace(name, std::move(m));
    }
    return dst;
  };
  for (auto i : keep) {
    out.units.push_back(parts_.units.at(i));
    out.baseline_population.push_back(parts_.baseline_population.at(i));
  }
  out.outcomes = take(parts_.outcomes);
  out.flows = take(parts_.flows);
  out.covariates = take(parts_.covariates);
  for (const auto& [name, col] : parts_.features) {
    std::vector<double> v;
    for (auto i : keep) v.push_back(col.at(i));
    out.features.emplace(name, std::move(v));
  }
  return create(std::move(out));
}

PanelDataset PanelDataset::with_outcome(const std::string& name, PanelMatrix values) const {
  Parts copy = parts_;
  copy.outcomes[name] = std::move(values);
  return create(std::move(copy));
}

PanelDataset load_panel(std::istream& source, const PanelSchema& schema, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  std::string line;
  if (!std::getline(source, line)) throw StructuralError("input has no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  const auto header = split_line(line, schema.delimiter);

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);
  auto column = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw ConfigError("column '" + name + "' not found in input header");
    return it->second;
  };
  if (schema.outcomes.empty()) throw ConfigError("schema must name at least one outcome column");
  if (schema.flows.empty()) throw ConfigError("schema must name at least one flow column");

  const auto unit_col = column(schema.unit);
  const auto period_col = column(schema.period);
  const auto pop_col = column(schema.population);
  auto columns_of = [&](const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(column(n));
    return idx;
  };
  const auto outcome_cols = columns_of(schema.outcomes);
  const auto flow_cols = columns_of(schema.flows);
  const auto cov_cols = columns_of(schema.covariates);
  const auto feat_cols = columns_of(schema.features);
  for (const auto& name : schema.log_outcomes) {
    if (std::find(schema.outcomes.begin(), schema.outcomes.end(), name) == schema.outcomes.end()) {
      throw ConfigError("log-transformed outcome '" + name + "' is not a declared outcome");
    }
  }

  struct Row {
    std::size_t line;
    std::string unit;
    int period;
    std::vector<double> values;  // pop, outcomes, flows, covariates, features
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, schema.delimiter);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       line_no, "");
    }
    Row row{line_no, fields[unit_col], parse_period(fields[period_col], line_no, schema.period), {}};
    if (row.unit.empty()) throw ParseError("empty unit id at row " + std::to_string(line_no), line_no, schema.unit);
    row.values.push_back(parse_number(fields[pop_col], line_no, schema.population));
    auto push = [&](const std::vector<std::size_t>& cols) {
      for (auto c : cols) row.values.push_back(parse_number(fields[c], line_no, header[c]));
    };
    push(outcome_cols);
    push(flow_cols);
    push(cov_cols);
    push(feat_cols);
    rows.push_back(std::move(row));
  }
  rep.rows = rows.size();
  if (rows.empty()) throw StructuralError("input has no data rows");

  std::vector<std::string> units;
  std::set<int> period_set;
  std::unordered_map<std::string, std::size_t> unit_index;
  for (const auto& r : rows) {
    if (unit_index.emplace(r.unit, units.size()).second) units.push_back(r.unit);
    period_set.insert(r.period);
  }
  std::vector<int> periods(period_set.begin(), period_set.end());
  const auto n = units.size();
  const auto t = periods.size();

  std::vector<const Row*> cell(n * t, nullptr);
  for (const auto& r : rows) {
    const auto u = unit_index.at(r.unit);
    const auto p = static_cast<std::size_t>(std::lower_bound(periods.begin(), periods.end(), r.period) -
                                            periods.begin());
    auto& slot = cell[u * t + p];
    if (slot != nullptr) {
      throw DuplicateError("duplicate row for unit '" + r.unit + "', period " +
                           std::to_string(r.period) + " (rows " + std::to_string(slot->line) +
                           " and " + std::to_string(r.line) + ")");
    }
    slot = &r;
  }
  std::vector<std::string> missing_cells;
  std::size_t missing_count = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t p = 0; p < t; ++p) {
      if (cell[u * t + p] == nullptr) {
        ++missing_count;
        if (missing_cells.size() < 20) {
          missing_cells.push_back("(" + units[u] + ", " + std::to_string(periods[p]) + ")");
        }
      }
    }
  }
  if (missing_count > 0) {
    std::ostringstream msg;
    msg << "unbalanced panel: " << missing_count << " missing (unit, period) cell(s):";
    for (const auto& m : missing_cells) msg << ' ' << m;
    if (missing_count > missing_cells.size()) msg << " ...";
    throw StructuralError(msg.str());
  }

  std::size_t base_p = 0;
  if (schema.baseline_period) {
    auto it = std::lower_bound(periods.begin(), periods.end(), *schema.baseline_period);
    if (it == periods.end() || *it != *schema.baseline_period) {
      throw ConfigError("baseline period " + std::to_string(*schema.baseline_period) +
                        " is not in the panel");
    }
    base_p = static_cast<std::size_t>(it - periods.begin());
  }

  PanelDataset::Parts parts;
  parts.periods = periods;
  std::vector<std::size_t> keep;
  for (std::size_t u = 0; u < n; ++u) {
    const double pop = cell[u * t + base_p]->values[0];
    if (is_missing(pop) || !(pop > 0.0)) {
      throw DomainError("baseline population of unit '" + units[u] + "' must be positive");
    }
    if (schema.min_baseline_population && pop < *schema.min_baseline_population) {
      ++rep.dropped_small_units;
      continue;
    }
    keep.push_back(u);
  }
  if (keep.empty()) throw DomainError("every unit is below the minimum baseline population");

  const auto kept = static_cast<Eigen::Index>(keep.size());
  const auto cols = static_cast<Eigen::Index>(t);
  std::size_t offset = 1;
  auto fill = [&](const std::vector<std::string>& names, std::map<std::string, PanelMatrix>& dst) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      PanelMatrix m(kept, cols);
      for (Eigen::Index r = 0; r < kept; ++r) {
        for (Eigen::Index p = 0; p < cols; ++p) {
          m(r, p) = cell[keep[r] * t + static_cast<std::size_t>(p)]->values[offset + j];
        }
      }
      dst[names[j]] = std::move(m);
    }
    offset += names.size();
  };
  fill(schema.outcomes, parts.outcomes);
  fill(schema.flows, parts.flows);
  fill(schema.covariates, parts.covariates);
  for (std::size_t j = 0; j < schema.features.size(); ++j) {
    std::vector<double> col;
    for (auto u : keep) col.push_back(cell[u * t + base_p]->values[offset + j]);
    parts.features[schema.features[j]] = std::move(col);
  }
  for (auto u : keep) {
    parts.units.push_back(units[u]);
    parts.baseline_population.push_back(cell[u * t + base_p]->values[0]);
  }

  for (const auto& name : schema.log_outcomes) {
    auto& m = parts.outcomes.at(name);
    std::size_t zeros = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double& v = m.data()[i];
      if (is_missing(v)) continue;
      if (v < 0.0) throw DomainError("outcome '" + name + "' has a negative value; cannot take logs");
      if (v == 0.0) {
        v = kMissing;
        ++zeros;
      } else {
        v = std::log(v);
      }
    }
    if (zeros > 0) {
      rep.warnings.push_back("outcome '" + name + "': " + std::to_string(zeros) +
                             " zero count(s) set to missing before taking logs");
    }
  }
  if (rep.dropped_small_units > 0) {
    rep.warnings.push_back(std::to_string(rep.dropped_small_units) +
                           " unit(s) dropped below the minimum baseline population");
  }
  return PanelDataset::create(std::move(parts));
}

void write_panel(std::ostream& sink, const PanelDataset& panel, const PanelSchema& schema) {
  const char d = schema.delimiter;
  sink << schema.unit << d << schema.period << d << schema.population;
  auto names = [&](const std::map<std::string, PanelMatrix>& m) {
    std::vector<std::string> v;
    for (const auto& [k, _] : m) v.push_back(k);
    return v;
  };
  const auto outcomes = names(panel.outcomes());
  const auto flows = names(panel.flows());
  const auto covs = names(panel.covariates());
  std::vector<std::string> feats;
  for (const auto& [k, _] : panel.features()) feats.push_back(k);
  for (const std::vector<std::string>* group : {&outcomes, &flows, &covs, static_cast<const std::vector<std::string>*>(&feats)}) {
    for (const auto& n : *group) sink << d << n;
  }
  sink << '\n';
  for (std::size_t u = 0; u < panel.n_units(); ++u) {
    const auto r = static_cast<Eigen::Index>(u);
    for (std::size_t p = 0; p < panel.n_periods(); ++p) {
      const auto c = static_cast<Eigen::Index>(p);
      sink << panel.units()[u] << d << panel.periods()[p] << d
           << format_number(panel.baseline_population()[u]);
      for (const auto& n : outcomes) sink << d << format_number(panel.outcome(n)(r, c));
      for (const auto& n : flows) sink << d << format_number(panel.flow(n)(r, c));
      for (const auto& n : covs) sink << d << format_number(panel.covariate(n)(r, c));
      for (const auto& n : feats) sink << d << format_number(panel.feature(n)[u]);
      sink << '\n';
    }
  }
}

PanelMatrix first_difference(const PanelMatrix& levels) {
  PanelMatrix diff = PanelMatrix::Constant(levels.rows(), levels.cols(), kMissing);
  for (Eigen::Index t = 1; t < levels.cols(); ++t) {
    // NaN propagates through the subtraction.
    diff.col(t) = levels.col(t) - levels.col(t - 1);
  }
  return diff;
}

DiffSeries first_difference(const PanelDataset& panel, const std::string& outcome) {
  return DiffSeries{panel.units(), panel.periods(), first_difference(panel.outcome(outcome))};
}

}  // namespace idid
