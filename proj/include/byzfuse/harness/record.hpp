#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../game.hpp"
#include "../version.hpp"
#include "config.hpp"

namespace byzfuse::harness {

/// Rows are attacker strategies, columns defender strategies (or schemes).
struct ResultTable {
  std::string corner = "attacker\\defender";
  std::vector<std::string> row_names, col_names;
  Matrix values, stderr_;
  std::vector<std::vector<std::uint64_t>> trials;

  std::size_t rows() const { return row_names.size(); }
  std::size_t cols() const { return col_names.size(); }

  void resize(std::size_t r, std::size_t c) {
    values.assign(r, std::vector<double>(c, 0.0));
    stderr_.assign(r, std::vector<double>(c, 0.0));
    trials.assign(r, std::vector<std::uint64_t>(c, 0));
  }
  bool operator==(const ResultTable &) const = default;
};

/// x column plus named y columns.
struct Series {
  std::string x_label;
  std::vector<std::string> y_labels;
  std::vector<double> x;
  Matrix y;  // y[k][i] belongs to y_labels[k]

  void add_column(std::string label) {
    y_labels.push_back(std::move(label));
    y.emplace_back(x.size(), 0.0);
  }
};

struct ResultRecord {
  std::string config_name, scenario, config_hash, version = kVersion;
  std::uint64_t seed = 0, trials = 0;
  ResultTable table;
  std::optional<Equilibrium> equilibrium;
  std::map<std::string, Series> series;  // roc, delta_sweep, alpha_sweep, m_sweep
  std::uint64_t degenerate = 0, disconnected = 0;
  std::string edge_list;  // consensus topology, written as <name>.edges
  double wall_seconds = 0;
  Json extra = Json::object();
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest of %.6g / %.17g that reads back to the same double.
inline std::string strategy_name(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  return format_double(v);
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string &s, const std::string &where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ConfigError(where + ": not a number '" + s + "'");
  }
}

// Three blocks (value, stderr, trials) sharing one header row:
//   section,<corner>,<col names...>
//   value,<row name>,v...
inline void write_table_csv(std::ostream &os, const ResultTable &t) {
  os << "section," << t.corner;
  for (const auto &c : t.col_names) os << ',' << c;
  os << '\n';
  for (const char *section : {"value", "stderr", "trials"}) {
    for (std::size_t a = 0; a < t.rows(); ++a) {
      os << section << ',' << t.row_names[a];
      for (std::size_t d = 0; d < t.cols(); ++d) {
        os << ',';
        if (section[0] == 'v') os << format_double(t.values[a][d]);
        else if (section[0] == 's') os << format_double(t.stderr_[a][d]);
        else os << t.trials[a][d];
      }
      os << '\n';
    }
  }
}

inline ResultTable parse_table_csv(std::istream &is) {
  ResultTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: empty input");
  auto head = split_csv_line(line);
  if (head.size() < 2 || head[0] != "section") throw ConfigError("csv: header must start with 'section'");
  t.corner = head[1];
  t.col_names.assign(head.begin() + 2, head.end());
  std::map<std::string, std::vector<std::vector<std::string>>> blocks;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != head.size())
      throw ConfigError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(head.size()) + " cells");
    blocks[cells[0]].push_back(cells);
  }
  if (!blocks.count("value")) throw ConfigError("csv: no value rows");
  for (const auto &r : blocks["value"]) t.row_names.push_back(r[1]);
  t.resize(t.row_names.size(), t.col_names.size());
  auto fill = [&](const char *name, auto &&store) {
    const auto &rows = blocks[name];
    if (rows.empty()) return;
    if (rows.size() != t.rows()) throw ConfigError(std::string("csv: ") + name + " block has wrong row count");
    for (std::size_t a = 0; a < t.rows(); ++a)
      for (std::size_t d = 0; d < t.cols(); ++d) store(a, d, rows[a][d + 2]);
  };
  fill("value", [&](auto a, auto d, const std::string &s) { t.values[a][d] = parse_double(s, "csv value"); });
  fill("stderr", [&](auto a, auto d, const std::string &s) { t.stderr_[a][d] = parse_double(s, "csv stderr"); });
  fill("trials", [&](auto a, auto d, const std::string &s) { t.trials[a][d] = std::stoull(s); });
  return t;
}

inline std::string table_csv(const ResultTable &t) {
  std::ostringstream os;
  write_table_csv(os, t);
  return os.str();
}

/// Payoff matrix view of a table; the names must parse as numbers unless grid is given.
inline PayoffMatrix to_payoff(const ResultTable &t, std::uint64_t trials = 0, std::uint64_t seed = 0,
                              std::string scenario = {}) {
  PayoffMatrix p;
  p.v = t.values;
  p.stderr_ = t.stderr_;
  p.trials = trials;
  p.seed = seed;
  p.scenario = std::move(scenario);
  bool numeric = true;
  auto parse_names = [&](const std::vector<std::string> &names, std::vector<double> &out) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      try {
        out.push_back(parse_double(names[k], "strategy"));
      } catch (const ConfigError &) {
        numeric = false;
        out.push_back(double(k));
      }
    }
  };
  parse_names(t.row_names, p.grid.attacker);
  parse_names(t.col_names, p.grid.defender);
  if (!numeric) {
    for (std::size_t k = 0; k < p.grid.attacker.size(); ++k) p.grid.attacker[k] = double(k);
    for (std::size_t k = 0; k < p.grid.defender.size(); ++k) p.grid.defender[k] = double(k);
  }
  return p;
}

inline void write_series_csv(std::ostream &os, const Series &s) {
  os << s.x_label;
  for (const auto &l : s.y_labels) os << ',' << l;
  os << '\n';
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    os << format_double(s.x[i]);
    for (const auto &col : s.y) os << ',' << format_double(col[i]);
    os << '\n';
  }
}

inline Series parse_series_csv(std::istream &is) {
  Series s;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("series csv: empty input");
  auto head = split_csv_line(line);
  s.x_label = head.at(0);
  s.y_labels.assign(head.begin() + 1, head.end());
  s.y.resize(s.y_labels.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != head.size()) throw ConfigError("series csv: ragged row");
    s.x.push_back(parse_double(cells[0], "series x"));
    for (std::size_t k = 0; k < s.y.size(); ++k) s.y[k].push_back(parse_double(cells[k + 1], "series y"));
  }
  return s;
}

inline const char *kind_name(Equilibrium::Kind k) {
  switch (k) {
    case Equilibrium::Kind::PureDominant: return "pure_dominant";
    case Equilibrium::Kind::PureNash: return "pure_nash";
    case Equilibrium::Kind::Mixed: return "mixed";
  }
  return "mixed";
}

inline Json equilibrium_json(const Equilibrium &e) {
  return {{"kind", kind_name(e.kind)}, {"attacker", e.attacker}, {"defender", e.defender}, {"value", e.value}};
}

inline Json metadata_json(const ResultRecord &r, const ExperimentConfig &cfg) {
  Json j;
  j["config_name"] = r.config_name;
  j["scenario"] = r.scenario;
  j["config_hash"] = r.config_hash;
  j["version"] = r.version;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["rows"] = r.table.row_names;
  j["cols"] = r.table.col_names;
  if (r.equilibrium) j["equilibrium"] = equilibrium_json(*r.equilibrium);
  Json series = Json::array();
  for (const auto &[k, v] : r.series) series.push_back(k);
  j["series"] = series;
  j["degenerate_trials"] = r.degenerate;
  j["disconnected_trials"] = r.disconnected;
  j["wall_seconds"] = r.wall_seconds;
  j["extra"] = r.extra;
  j["config"] = to_json(cfg);
  return j;
}

struct OutputPaths {
  std::filesystem::path csv, json;
};

/// Writes <out>/<name>.csv and <out>/<name>.json. Only the JSON carries wall-clock time.
inline OutputPaths write_record(const ResultRecord &r, const ExperimentConfig &cfg, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  OutputPaths p{dir / (r.config_name + ".csv"), dir / (r.config_name + ".json")};
  if (!r.edge_list.empty()) {
    std::ofstream es(dir / (r.config_name + ".edges"), std::ios::binary);
    es << r.edge_list;
  }
  {
    std::ofstream os(p.csv, std::ios::binary);
    write_table_csv(os, r.table);
    if (!os) throw std::runtime_error("cannot write " + p.csv.string());
  }
  std::ofstream js(p.json, std::ios::binary);
  js << metadata_json(r, cfg).dump(2) << '\n';
  if (!js) throw std::runtime_error("cannot write " + p.json.string());
  return p;
}

/// Writes one stored series as CSV; kind is roc, delta_sweep, alpha_sweep or m_sweep.
inline std::filesystem::path emit_plot_data(const ResultRecord &r, const std::string &kind,
                                            const std::filesystem::path &dir) {
  const auto it = r.series.find(kind);
  if (it == r.series.end()) {
    std::string have;
    for (const auto &[k, v] : r.series) have += (have.empty() ? "" : ", ") + k;
    throw ConfigError("record '" + r.config_name + "' has no series '" + kind + "' (available: " +
                      (have.empty() ? "none" : have) + ")");
  }
  std::filesystem::create_directories(dir);
  const auto path = dir / (r.config_name + "." + kind + ".csv");
  std::ofstream os(path, std::ios::binary);
  write_series_csv(os, it->second);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return path;
}

}  // namespace byzfuse::harness
