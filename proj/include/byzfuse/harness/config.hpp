#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "../consensus.hpp"
#include "../errors.hpp"
#include "../game.hpp"
#include "../isolation.hpp"
#include "../model.hpp"
#include "../optimal.hpp"

namespace byzfuse::harness {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double lo = 0, hi = 8, step = 0.2;
  std::vector<double> values() const { return uniform_grid(lo, hi, step); }
};

struct IsolationOptions {
  std::string scheme = "soft";  // hard | soft
  SoftScoreForm form = SoftScoreForm::Oriented;
  std::size_t levels = 18;
  std::uint64_t pilot_trials = 2000;
  std::size_t intermediate_l = 0;  // 0: majority
  double fc_alpha = -1;            // negative: E[N_B]/n from the prior
  double p_mal_guess = 1.0;
};

struct MpBenchOptions {
  std::string sweep = "alpha";  // alpha | m
  std::vector<double> values;
  std::vector<double> p_mal{1.0};
  std::vector<std::string> schemes{"mp", "map", "majority"};
  std::size_t iterations = 5;
  std::string placement = "bernoulli";  // bernoulli | fixed_round
};

struct ConsensusOptions {
  double mu = 1.0, sigma = 1.0;
  double alpha = 0.1;
  std::string selection = "bernoulli";  // bernoulli | fixed
  std::size_t n_a = 2;
  GridSpec delta{0, 8, 0.2}, eta{0, 8, 0.2};
  std::string topology = "fully_connected";
  TopologyParams topo_params;
  std::uint64_t topology_seed = 1;
  bool iterate = false;
  // uncensored attack-success sweep over delta, fixed n_a nodes
  std::size_t sweep_n_a = 2;
  GridSpec sweep_delta{0, 18, 2};
  std::uint64_t sweep_trials = 0;  // 0: same as trials
};

struct SingleRunOptions {
  std::string rule = "map";  // map | mp | majority | hard | soft
  double p_mal_true = 1.0, p_mal_fc = 1.0;
  double eta = 0.0;
};

struct ComparisonRow {
  std::string label;
  ByzantinePrior prior;
};

struct ExperimentConfig {
  std::string name = "unnamed";
  std::string description;
  std::string scenario = "single_run";
  std::size_t n = 20, m = 4;
  double epsilon = 0.1;
  StatePrior states = StatePrior::iid();
  ByzantinePrior byz = ByzantinePrior::independent(0.3);
  std::vector<double> attacker_grid = default_pmal_grid();
  std::vector<double> defender_grid = default_pmal_grid();
  std::uint64_t trials = 50000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output = "out";
  ErrorMetric metric = ErrorMetric::PerBit;
  IsolationOptions iso;
  MpBenchOptions mp;
  ConsensusOptions cons;
  SingleRunOptions single;
  std::vector<ComparisonRow> comparison;

  DetectionSetup setup() const { return {n, m, epsilon, states, byz}; }
};

inline const std::vector<std::string> &scenario_names() {
  static const std::vector<std::string> names{"isolation_game", "optimal_game", "mp_benchmark",
                                              "consensus_game", "single_run", "comparison"};
  return names;
}

namespace detail {

[[noreturn]] inline void fail(const std::string &path, const std::string &msg) {
  throw ConfigError(path + ": " + msg);
}

template <class T>
T read(const Json &j, const char *key, const std::string &path, T fallback) {
  if (!j.contains(key)) return fallback;
  // the json library silently wraps negative numbers into unsigned targets
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
    if (!j.at(key).is_number_unsigned()) fail(path + "." + key, "expected a nonnegative integer");
  try {
    return j.at(key).get<T>();
  } catch (const std::exception &e) {
    fail(path + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

inline std::string one_of(const Json &j, const char *key, const std::string &path, std::string fallback,
                          const std::vector<std::string> &allowed) {
  auto v = read<std::string>(j, key, path, std::move(fallback));
  for (const auto &a : allowed)
    if (a == v) return v;
  std::string list;
  for (const auto &a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(path + "." + key, "'" + v + "' is not one of {" + list + "}");
}

inline Json prior_to_json(const ByzantinePrior &p) {
  Json j;
  switch (p.kind) {
    case ByzantinePrior::Kind::IndependentAlpha: j["kind"] = "independent"; j["alpha"] = p.alpha; break;
    case ByzantinePrior::Kind::FixedCount: j["kind"] = "fixed"; j["n_b"] = p.n_b; break;
    case ByzantinePrior::Kind::BoundedMaxEnt: j["kind"] = "bounded"; j["h"] = p.h; break;
    case ByzantinePrior::Kind::Unconstrained: j["kind"] = "unconstrained"; break;
  }
  return j;
}

inline ByzantinePrior prior_from_json(const Json &j, const std::string &path) {
  const auto kind = one_of(j, "kind", path, "independent", {"independent", "fixed", "bounded", "unconstrained"});
  if (kind == "independent") return ByzantinePrior::independent(read<double>(j, "alpha", path, 0.0));
  if (kind == "fixed") return ByzantinePrior::fixed(read<std::size_t>(j, "n_b", path, 0));
  if (kind == "bounded") return ByzantinePrior::bounded(read<std::size_t>(j, "h", path, 1));
  return ByzantinePrior::unconstrained();
}

inline Json grid_to_json(const GridSpec &g) { return Json{{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}}; }

inline GridSpec grid_from_json(const Json &j, const char *key, const std::string &path, GridSpec fallback) {
  if (!j.contains(key)) return fallback;
  const auto &g = j.at(key);
  const std::string p = path + "." + key;
  GridSpec out{read<double>(g, "lo", p, fallback.lo), read<double>(g, "hi", p, fallback.hi),
               read<double>(g, "step", p, fallback.step)};
  if (!(out.step > 0) || out.hi < out.lo) fail(p, "need step > 0 and hi >= lo");
  return out;
}

inline const char *topology_name(Topology::Kind k) {
  switch (k) {
    case Topology::Kind::FullyConnected: return "fully_connected";
    case Topology::Kind::ErdosRenyi: return "erdos_renyi";
    case Topology::Kind::SmallWorld: return "small_world";
    case Topology::Kind::ScaleFree: return "scale_free";
    case Topology::Kind::Explicit: return "explicit";
  }
  return "fully_connected";
}

}  // namespace detail

inline Topology::Kind topology_kind(const std::string &s) {
  if (s == "erdos_renyi") return Topology::Kind::ErdosRenyi;
  if (s == "small_world") return Topology::Kind::SmallWorld;
  if (s == "scale_free") return Topology::Kind::ScaleFree;
  if (s == "explicit") return Topology::Kind::Explicit;
  return Topology::Kind::FullyConnected;
}

/// Materialized config: every field explicit.
inline Json to_json(const ExperimentConfig &c) {
  Json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["scenario"] = c.scenario;
  j["n"] = c.n;
  j["m"] = c.m;
  j["epsilon"] = c.epsilon;
  j["state_prior"] = {{"kind", c.states.kind == StatePrior::Kind::IID ? "iid" : "markov"},
                      {"rho", c.states.rho},
                      {"p1", c.states.p1}};
  j["byzantine_prior"] = detail::prior_to_json(c.byz);
  j["attacker_grid"] = c.attacker_grid;
  j["defender_grid"] = c.defender_grid;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  j["error_metric"] = c.metric == ErrorMetric::PerBit ? "per_bit" : "per_sequence";
  j["isolation"] = {{"scheme", c.iso.scheme},
                    {"soft_form", c.iso.form == SoftScoreForm::Absolute ? "absolute" : "oriented"},
                    {"levels", c.iso.levels},
                    {"pilot_trials", c.iso.pilot_trials},
                    {"intermediate_l", c.iso.intermediate_l},
                    {"fc_alpha", c.iso.fc_alpha},
                    {"p_mal_guess", c.iso.p_mal_guess}};
  j["mp"] = {{"sweep", c.mp.sweep},       {"values", c.mp.values},         {"p_mal", c.mp.p_mal},
             {"schemes", c.mp.schemes},   {"iterations", c.mp.iterations}, {"placement", c.mp.placement}};
  Json edges = Json::array();
  for (auto [u, v] : c.cons.topo_params.edges) edges.push_back({u, v});
  j["consensus"] = {{"mu", c.cons.mu},
                    {"sigma", c.cons.sigma},
                    {"alpha", c.cons.alpha},
                    {"selection", c.cons.selection},
                    {"n_a", c.cons.n_a},
                    {"delta", detail::grid_to_json(c.cons.delta)},
                    {"eta", detail::grid_to_json(c.cons.eta)},
                    {"topology",
                     {{"kind", c.cons.topology},
                      {"p", c.cons.topo_params.p},
                      {"ring_degree", c.cons.topo_params.ring_degree},
                      {"rewire", c.cons.topo_params.rewire},
                      {"m_attach", c.cons.topo_params.m_attach},
                      {"edges", edges},
                      {"seed", c.cons.topology_seed}}},
                    {"iterate", c.cons.iterate},
                    {"sweep_n_a", c.cons.sweep_n_a},
                    {"sweep_delta", detail::grid_to_json(c.cons.sweep_delta)},
                    {"sweep_trials", c.cons.sweep_trials}};
  j["single"] = {{"rule", c.single.rule},
                 {"p_mal_true", c.single.p_mal_true},
                 {"p_mal_fc", c.single.p_mal_fc},
                 {"eta", c.single.eta}};
  Json rows = Json::array();
  for (const auto &r : c.comparison) rows.push_back({{"label", r.label}, {"prior", detail::prior_to_json(r.prior)}});
  j["comparison"] = rows;
  return j;
}

inline ExperimentConfig from_json(const Json &j) {
  using namespace detail;
  const std::string P = "config";
  if (!j.is_object()) fail(P, "expected an object");
  ExperimentConfig c;
  c.name = read<std::string>(j, "name", P, c.name);
  c.description = read<std::string>(j, "description", P, "");
  c.scenario = one_of(j, "scenario", P, c.scenario, scenario_names());
  c.n = read<std::size_t>(j, "n", P, c.n);
  c.m = read<std::size_t>(j, "m", P, c.m);
  c.epsilon = read<double>(j, "epsilon", P, c.epsilon);
  if (j.contains("state_prior")) {
    const auto &s = j["state_prior"];
    const std::string p = P + ".state_prior";
    const auto kind = one_of(s, "kind", p, "iid", {"iid", "markov"});
    const double p1 = read<double>(s, "p1", p, 0.5);
    c.states = kind == "iid" ? StatePrior::iid(p1) : StatePrior::markov(read<double>(s, "rho", p, 0.5), p1);
  }
  if (j.contains("byzantine_prior")) c.byz = prior_from_json(j["byzantine_prior"], P + ".byzantine_prior");
  c.attacker_grid = read<std::vector<double>>(j, "attacker_grid", P, c.attacker_grid);
  c.defender_grid = read<std::vector<double>>(j, "defender_grid", P, c.defender_grid);
  c.trials = read<std::uint64_t>(j, "trials", P, c.trials);
  c.seed = read<std::uint64_t>(j, "seed", P, c.seed);
  c.threads = read<unsigned>(j, "threads", P, c.threads);
  c.output = read<std::string>(j, "output", P, c.output);
  c.metric = one_of(j, "error_metric", P, "per_bit", {"per_bit", "per_sequence"}) == "per_bit" ? ErrorMetric::PerBit
                                                                                              : ErrorMetric::PerSequence;
  if (j.contains("isolation")) {
    const auto &s = j["isolation"];
    const std::string p = P + ".isolation";
    c.iso.scheme = one_of(s, "scheme", p, c.iso.scheme, {"hard", "soft"});
    c.iso.form = one_of(s, "soft_form", p, "oriented", {"absolute", "oriented"}) == "absolute"
                     ? SoftScoreForm::Absolute
                     : SoftScoreForm::Oriented;
    c.iso.levels = read<std::size_t>(s, "levels", p, c.iso.levels);
    c.iso.pilot_trials = read<std::uint64_t>(s, "pilot_trials", p, c.iso.pilot_trials);
    c.iso.intermediate_l = read<std::size_t>(s, "intermediate_l", p, c.iso.intermediate_l);
    c.iso.fc_alpha = read<double>(s, "fc_alpha", p, c.iso.fc_alpha);
    c.iso.p_mal_guess = read<double>(s, "p_mal_guess", p, c.iso.p_mal_guess);
    if (c.iso.levels < 2) fail(p + ".levels", "need at least 2 levels");
  }
  if (j.contains("mp")) {
    const auto &s = j["mp"];
    const std::string p = P + ".mp";
    c.mp.sweep = one_of(s, "sweep", p, c.mp.sweep, {"alpha", "m"});
    c.mp.values = read<std::vector<double>>(s, "values", p, c.mp.values);
    c.mp.p_mal = read<std::vector<double>>(s, "p_mal", p, c.mp.p_mal);
    c.mp.schemes = read<std::vector<std::string>>(s, "schemes", p, c.mp.schemes);
    for (const auto &sc : c.mp.schemes)
      if (sc != "mp" && sc != "map" && sc != "majority") fail(p + ".schemes", "unknown scheme '" + sc + "'");
    c.mp.iterations = read<std::size_t>(s, "iterations", p, c.mp.iterations);
    c.mp.placement = one_of(s, "placement", p, c.mp.placement, {"bernoulli", "fixed_round"});
  }
  if (j.contains("consensus")) {
    const auto &s = j["consensus"];
    const std::string p = P + ".consensus";
    c.cons.mu = read<double>(s, "mu", p, c.cons.mu);
    c.cons.sigma = read<double>(s, "sigma", p, c.cons.sigma);
    c.cons.alpha = read<double>(s, "alpha", p, c.cons.alpha);
    c.cons.selection = one_of(s, "selection", p, c.cons.selection, {"bernoulli", "fixed"});
    c.cons.n_a = read<std::size_t>(s, "n_a", p, c.cons.n_a);
    c.cons.delta = grid_from_json(s, "delta", p, c.cons.delta);
    c.cons.eta = grid_from_json(s, "eta", p, c.cons.eta);
    if (s.contains("topology")) {
      const auto &t = s["topology"];
      const std::string tp = p + ".topology";
      c.cons.topology = one_of(t, "kind", tp, c.cons.topology,
                               {"fully_connected", "erdos_renyi", "small_world", "scale_free", "explicit"});
      c.cons.topo_params.p = read<double>(t, "p", tp, c.cons.topo_params.p);
      c.cons.topo_params.ring_degree = read<std::size_t>(t, "ring_degree", tp, c.cons.topo_params.ring_degree);
      c.cons.topo_params.rewire = read<double>(t, "rewire", tp, c.cons.topo_params.rewire);
      c.cons.topo_params.m_attach = read<std::size_t>(t, "m_attach", tp, c.cons.topo_params.m_attach);
      c.cons.topology_seed = read<std::uint64_t>(t, "seed", tp, c.cons.topology_seed);
      for (const auto &e : read<std::vector<std::vector<std::size_t>>>(t, "edges", tp, {})) {
        if (e.size() != 2) fail(tp + ".edges", "each edge needs two endpoints");
        c.cons.topo_params.edges.emplace_back(e[0], e[1]);
      }
    }
    c.cons.iterate = read<bool>(s, "iterate", p, c.cons.iterate);
    c.cons.sweep_n_a = read<std::size_t>(s, "sweep_n_a", p, c.cons.sweep_n_a);
    c.cons.sweep_delta = grid_from_json(s, "sweep_delta", p, c.cons.sweep_delta);
    c.cons.sweep_trials = read<std::uint64_t>(s, "sweep_trials", p, c.cons.sweep_trials);
  }
  if (j.contains("single")) {
    const auto &s = j["single"];
    const std::string p = P + ".single";
    c.single.rule = one_of(s, "rule", p, c.single.rule, {"map", "mp", "majority", "hard", "soft"});
    c.single.p_mal_true = read<double>(s, "p_mal_true", p, c.single.p_mal_true);
    c.single.p_mal_fc = read<double>(s, "p_mal_fc", p, c.single.p_mal_fc);
    c.single.eta = read<double>(s, "eta", p, c.single.eta);
  }
  if (j.contains("comparison")) {
    std::size_t k = 0;
    for (const auto &r : j["comparison"]) {
      const std::string p = P + ".comparison[" + std::to_string(k++) + "]";
      if (!r.contains("prior")) fail(p, "missing prior");
      c.comparison.push_back({read<std::string>(r, "label", p, "row"), prior_from_json(r["prior"], p + ".prior")});
    }
  }
  // cross-field checks
  try {
    c.states.validate();
    c.byz.validate(c.n);
    LocalChannel{c.epsilon, 1.0}.validate();
    StrategyGrid{c.attacker_grid, c.defender_grid}.validate();
  } catch (const std::exception &e) {
    fail(P, e.what());
  }
  if (c.n < 1 || c.m < 1) fail(P, "n and m must be positive");
  if (c.trials < 1) fail(P + ".trials", "must be >= 1");
  return c;
}

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const std::exception &e) {
    throw ConfigError(path + ": parse error: " + e.what());
  }
  return from_json(j);
}

/// FNV-1a over the materialized config, without fields that cannot change results.
inline std::string config_hash(const ExperimentConfig &c) {
  Json j = to_json(c);
  j.erase("threads");
  j.erase("output");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace byzfuse::harness
