#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "../consensus.hpp"
#include "../fusion.hpp"
#include "../game.hpp"
#include "../isolation.hpp"
#include "../model.hpp"
#include "../mp.hpp"
#include "../optimal.hpp"
#include "../parallel.hpp"
#include "config.hpp"
#include "record.hpp"

namespace byzfuse::harness {

// Per-cell error sums: [2k] = sum e, [2k+1] = sum e^2 over trials.
using CellSums = Tally<std::uint64_t>;

inline void add_error(CellSums &acc, std::size_t cell, std::uint64_t e) {
  acc[2 * cell] += e;
  acc[2 * cell + 1] += e * e;
}

// Mean per-unit error and the standard error of that mean.
inline std::pair<double, double> cell_stats(const CellSums &acc, std::size_t cell, std::uint64_t trials, double units) {
  const double T = double(trials);
  const double mean = double(acc[2 * cell]) / T / units;
  const double second = double(acc[2 * cell + 1]) / T / (units * units);
  const double var = std::max(0.0, second - mean * mean);
  return {mean, trials > 1 ? std::sqrt(var / (T - 1)) : 0.0};
}

inline void store_cell(ResultTable &t, std::size_t a, std::size_t d, const CellSums &acc, std::size_t cell,
                       std::uint64_t trials, double units) {
  const auto [v, se] = cell_stats(acc, cell, trials, units);
  t.values[a][d] = v;
  t.stderr_[a][d] = se;
  t.trials[a][d] = trials;
}

inline std::vector<std::string> names_of(const std::vector<double> &g) {
  std::vector<std::string> out;
  for (double x : g) out.push_back(strategy_name(x));
  return out;
}

inline std::size_t index_of_max(const std::vector<double> &g) {
  return std::size_t(std::max_element(g.begin(), g.end()) - g.begin());
}

/// Fills the equilibrium of a numeric payoff table; solver failures are recorded, not thrown.
inline void attach_equilibrium(ResultRecord &rec, const ExperimentConfig &c) {
  const auto p = to_payoff(rec.table, c.trials, c.seed, c.scenario);
  try {
    rec.equilibrium = equilibrium_of(p);
    Json saddles = Json::array();
    for (auto [a, d] : find_pure_nash(p)) saddles.push_back({rec.table.row_names[a], rec.table.col_names[d]});
    rec.extra["pure_nash"] = saddles;
  } catch (const NumericError &e) {
    rec.extra["equilibrium_error"] = e.what();
  }
}

inline double fc_alpha_of(const ExperimentConfig &c, const ByzantinePrior &prior) {
  return c.iso.fc_alpha >= 0 ? c.iso.fc_alpha : prior.expected_count(c.n) / double(c.n);
}

inline NodePerformance channel_performance(const ExperimentConfig &c) {
  return NodePerformance::homogeneous(c.n, 1 - c.epsilon, c.epsilon);
}

/// Reputation scores under the configured isolation scheme.
inline ReputationScores isolation_scores(const ExperimentConfig &c, const ReportMatrix &r, double fc_alpha,
                                         const NodePerformance &perf) {
  if (c.iso.scheme == "hard") {
    const auto d = c.iso.intermediate_l ? intermediate_decisions(r, c.iso.intermediate_l) : majority_decisions(r);
    return hard_scores(r, d);
  }
  return soft_scores(r, fc_alpha, c.iso.p_mal_guess, perf, 1 - c.states.p1, c.iso.form);
}

/// Soft thresholds: `levels` evenly spaced points over the range of node
/// scores seen in a pilot run at the strongest attack.
inline std::vector<double> soft_threshold_grid(const ExperimentConfig &c, const DetectionSetup &setup,
                                               double fc_alpha) {
  ExperimentConfig soft = c;
  soft.iso.scheme = "soft";
  const auto perf = channel_performance(c);
  const double pmal = c.attacker_grid[index_of_max(c.attacker_grid)];
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::uint64_t t = 0; t < c.iso.pilot_trials; ++t) {
    const auto r = draw_trial(setup, pmal, sub_seed(c.seed, t, 0x9170));
    for (double s : isolation_scores(soft, r, fc_alpha, perf).scores) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (!(hi > lo)) return {lo};
  std::vector<double> g(c.iso.levels);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = lo + (hi - lo) * double(k) / double(g.size() - 1);
  return g;
}

inline std::vector<double> hard_threshold_grid(std::size_t m) {
  std::vector<double> g;
  for (std::size_t e = 0; e <= m; ++e) g.push_back(double(e));
  return g;
}

// ---- optimal_game --------------------------------------------------------

inline ResultRecord run_optimal_game(const ExperimentConfig &c) {
  ResultRecord rec;
  const auto setup = c.setup();
  const auto &A = c.attacker_grid, &D = c.defender_grid;
  std::vector<MapDecoder> proto;
  for (double pd : D) proto.emplace_back(c.n, c.m, MapConfig{c.byz, LocalChannel{c.epsilon, pd}, c.states});
  rec.table.row_names = names_of(A);
  rec.table.col_names = names_of(D);
  rec.table.resize(A.size(), D.size());
  const double units = error_units(c.metric, c.m);
  for (std::size_t a = 0; a < A.size(); ++a) {
    // the same trial seeds for every row and column
    const auto acc = run_trials<CellSums>(
        c.trials, c.threads, [&] { return CellSums(2 * D.size()); }, [&] { return proto; },
        [&](std::uint64_t t, CellSums &s, std::vector<MapDecoder> &dec) {
          const auto r = draw_trial(setup, A[a], sub_seed(c.seed, t));
          for (std::size_t d = 0; d < D.size(); ++d) add_error(s, d, count_errors(c.metric, dec[d].decode(r), r.truth));
        });
    for (std::size_t d = 0; d < D.size(); ++d) store_cell(rec.table, a, d, acc, d, c.trials, units);
  }
  attach_equilibrium(rec, c);
  return rec;
}

// ---- isolation_game ------------------------------------------------------

struct IsolationAcc {
  CellSums cells;
  Tally<double> roc;  // per column: byz rate sum, byz count, honest rate sum, honest count
  std::uint64_t degenerate = 0;
  IsolationAcc(std::size_t cells_, std::size_t cols) : cells(2 * cells_), roc(4 * cols) {}
  IsolationAcc &operator+=(const IsolationAcc &o) {
    cells += o.cells;
    roc += o.roc;
    degenerate += o.degenerate;
    return *this;
  }
};

inline ResultRecord run_isolation_game(const ExperimentConfig &c) {
  ResultRecord rec;
  const auto setup = c.setup();
  const auto &A = c.attacker_grid;
  const double fc_alpha = fc_alpha_of(c, c.byz);
  const auto perf = channel_performance(c);
  const auto D = c.iso.scheme == "soft" ? soft_threshold_grid(c, setup, fc_alpha) : c.defender_grid;
  const std::size_t roc_row = index_of_max(A);
  rec.table.corner = "p_mal\\eta";
  rec.table.row_names = names_of(A);
  rec.table.col_names = names_of(D);
  rec.table.resize(A.size(), D.size());
  rec.extra["eta_grid"] = D;
  rec.extra["fc_alpha"] = fc_alpha;
  const double units = error_units(c.metric, c.m);
  const auto acc = run_trials<IsolationAcc>(
      c.trials, c.threads, [&] { return IsolationAcc(A.size() * D.size(), D.size()); },
      [&](std::uint64_t t, IsolationAcc &s) {
        for (std::size_t a = 0; a < A.size(); ++a) {
          const auto r = draw_trial(setup, A[a], sub_seed(c.seed, t));
          const auto scores = isolation_scores(c, r, fc_alpha, perf);
          for (std::size_t d = 0; d < D.size(); ++d) {
            CounterRng coin(sub_seed(c.seed, t, 1 + d));
            const auto out = isolate_and_fuse(r, scores, {D[d], c.iso.intermediate_l}, coin);
            add_error(s.cells, a * D.size() + d, count_errors(c.metric, out.decision, r.truth));
            s.degenerate += out.degenerate;
            if (a != roc_row) continue;
            const auto [pb, ph] = isolation_rates(scores, r.placement, D[d]);
            if (pb) s.roc[4 * d] += *pb, s.roc[4 * d + 1] += 1;
            if (ph) s.roc[4 * d + 2] += *ph, s.roc[4 * d + 3] += 1;
          }
        }
      });
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t d = 0; d < D.size(); ++d) store_cell(rec.table, a, d, acc.cells, a * D.size() + d, c.trials, units);
  rec.degenerate = acc.degenerate;
  Series roc;
  roc.x_label = "eta";
  roc.x = D;
  roc.add_column("p_iso_honest");
  roc.add_column("p_iso_byzantine");
  for (std::size_t d = 0; d < D.size(); ++d) {
    roc.y[0][d] = acc.roc[4 * d + 3] > 0 ? acc.roc[4 * d + 2] / acc.roc[4 * d + 3] : 0.0;
    roc.y[1][d] = acc.roc[4 * d + 1] > 0 ? acc.roc[4 * d] / acc.roc[4 * d + 1] : 0.0;
  }
  rec.series["roc"] = roc;
  attach_equilibrium(rec, c);
  return rec;
}

// ---- comparison ----------------------------------------------------------

/// Per prior row: majority at the attacker's best strategy, hard and soft
/// isolation at p_mal = 1 with the best threshold, and the value of the
/// optimal-fusion game over the attacker x defender grid.
inline ResultRecord run_comparison(const ExperimentConfig &c) {
  ResultRecord rec;
  if (c.comparison.empty()) throw ConfigError("config.comparison: at least one row is required");
  const auto &A = c.attacker_grid, &D = c.defender_grid;
  const std::size_t top = index_of_max(A);
  const double units = error_units(c.metric, c.m);
  rec.table.corner = "setup\\scheme";
  rec.table.col_names = {"Maj", "HardIS", "SoftIS", "OPT"};
  for (const auto &row : c.comparison) rec.table.row_names.push_back(row.label);
  rec.table.resize(c.comparison.size(), 4);
  Json details = Json::array();
  const auto perf = channel_performance(c);
  for (std::size_t k = 0; k < c.comparison.size(); ++k) {
    DetectionSetup setup = c.setup();
    setup.byz = c.comparison[k].prior;
    setup.byz.validate(c.n);
    const double fc_alpha = fc_alpha_of(c, setup.byz);
    const auto hard_grid = hard_threshold_grid(c.m);
    const auto soft_grid = soft_threshold_grid(c, setup, fc_alpha);
    ExperimentConfig hard_cfg = c, soft_cfg = c;
    hard_cfg.iso.scheme = "hard";
    soft_cfg.iso.scheme = "soft";
    std::vector<MapDecoder> proto;
    for (double pd : D) proto.emplace_back(c.n, c.m, MapConfig{setup.byz, LocalChannel{c.epsilon, pd}, c.states});
    // cell layout: maj[A] | opt[A x D] | hard[H] | soft[S]
    const std::size_t maj0 = 0, opt0 = A.size(), hard0 = opt0 + A.size() * D.size(), soft0 = hard0 + hard_grid.size();
    const std::size_t ncells = soft0 + soft_grid.size();
    const auto acc = run_trials<IsolationAcc>(
        c.trials, c.threads, [&] { return IsolationAcc(ncells, 0); }, [&] { return proto; },
        [&](std::uint64_t t, IsolationAcc &s, std::vector<MapDecoder> &dec) {
          for (std::size_t a = 0; a < A.size(); ++a) {
            const auto r = draw_trial(setup, A[a], sub_seed(c.seed, t));
            add_error(s.cells, maj0 + a, count_errors(c.metric, majority_decisions(r), r.truth));
            for (std::size_t d = 0; d < D.size(); ++d)
              add_error(s.cells, opt0 + a * D.size() + d, count_errors(c.metric, dec[d].decode(r), r.truth));
            if (a != top) continue;
            for (int scheme = 0; scheme < 2; ++scheme) {
              const auto &grid = scheme ? soft_grid : hard_grid;
              const auto scores = isolation_scores(scheme ? soft_cfg : hard_cfg, r, fc_alpha, perf);
              for (std::size_t e = 0; e < grid.size(); ++e) {
                CounterRng coin(sub_seed(c.seed, t, 1 + e));
                const auto out = isolate_and_fuse(r, scores, {grid[e], c.iso.intermediate_l}, coin);
                add_error(s.cells, (scheme ? soft0 : hard0) + e, count_errors(c.metric, out.decision, r.truth));
                s.degenerate += out.degenerate;
              }
            }
          }
        });
    rec.degenerate += acc.degenerate;
    auto stats = [&](std::size_t cell) { return cell_stats(acc.cells, cell, c.trials, units); };
    // Maj: attacker's best row
    std::pair<double, double> maj{-1, 0};
    for (std::size_t a = 0; a < A.size(); ++a)
      if (stats(maj0 + a).first > maj.first) maj = stats(maj0 + a);
    auto best_of = [&](std::size_t first, std::size_t count) {
      std::size_t arg = 0;
      for (std::size_t e = 1; e < count; ++e)
        if (stats(first + e).first < stats(first + arg).first) arg = e;
      return arg;
    };
    const std::size_t hard_arg = best_of(hard0, hard_grid.size()), soft_arg = best_of(soft0, soft_grid.size());
    // OPT: value of the game
    PayoffMatrix game;
    game.grid = {A, D};
    game.v.assign(A.size(), std::vector<double>(D.size()));
    game.stderr_ = game.v;
    for (std::size_t a = 0; a < A.size(); ++a)
      for (std::size_t d = 0; d < D.size(); ++d)
        std::tie(game.v[a][d], game.stderr_[a][d]) = stats(opt0 + a * D.size() + d);
    Json row{{"label", c.comparison[k].label},
             {"fc_alpha", fc_alpha},
             {"hard_eta", hard_grid[hard_arg]},
             {"soft_eta", soft_grid[soft_arg]},
             {"opt_matrix", game.v}};
    double opt = NAN, opt_se = 0;
    try {
      const auto eq = equilibrium_of(game);
      opt = eq.value;
      for (std::size_t a = 0; a < A.size(); ++a)
        for (std::size_t d = 0; d < D.size(); ++d) opt_se += eq.attacker[a] * eq.defender[d] * game.stderr_[a][d];
      row["opt_equilibrium"] = equilibrium_json(eq);
    } catch (const NumericError &e) {
      row["opt_error"] = e.what();
    }
    const std::pair<double, double> cells[4] = {maj, stats(hard0 + hard_arg), stats(soft0 + soft_arg), {opt, opt_se}};
    for (std::size_t j = 0; j < 4; ++j) {
      rec.table.values[k][j] = cells[j].first;
      rec.table.stderr_[k][j] = cells[j].second;
      rec.table.trials[k][j] = c.trials;
    }
    details.push_back(row);
  }
  rec.extra["rows"] = details;
  return rec;
}

// ---- mp_benchmark --------------------------------------------------------

inline ResultRecord run_mp_benchmark(const ExperimentConfig &c) {
  ResultRecord rec;
  const auto &V = c.mp.values;
  if (V.empty()) throw ConfigError("config.mp.values: at least one value is required");
  const bool by_alpha = c.mp.sweep == "alpha";
  if (!by_alpha && c.byz.kind != ByzantinePrior::Kind::IndependentAlpha)
    throw ConfigError("config.byzantine_prior: an m sweep needs an independent prior for alpha");
  std::vector<std::string> cols;
  for (double p : c.mp.p_mal)
    for (const auto &s : c.mp.schemes) cols.push_back(s + "@" + strategy_name(p));
  rec.table.corner = by_alpha ? "alpha\\scheme" : "m\\scheme";
  rec.table.row_names = names_of(V);
  rec.table.col_names = cols;
  rec.table.resize(V.size(), cols.size());
  const bool want_map = std::find(c.mp.schemes.begin(), c.mp.schemes.end(), "map") != c.mp.schemes.end();
  for (std::size_t v = 0; v < V.size(); ++v) {
    const double alpha = by_alpha ? V[v] : c.byz.alpha;
    const std::size_t m = by_alpha ? c.m : std::size_t(std::llround(V[v]));
    if (m < 1) throw ConfigError("config.mp.values: m must be >= 1");
    DetectionSetup setup{c.n, m, c.epsilon, c.states, ByzantinePrior::independent(alpha)};
    double mp_alpha = alpha;
    if (c.mp.placement == "fixed_round") {
      setup.byz = ByzantinePrior::fixed(std::size_t(std::llround(alpha * double(c.n))));
      mp_alpha = double(setup.byz.n_b) / double(c.n);
    }
    setup.byz.validate(c.n);
    std::vector<MapDecoder> proto;
    if (want_map)
      for (double p : c.mp.p_mal)
        proto.emplace_back(c.n, m, MapConfig{setup.byz, LocalChannel{c.epsilon, p}, c.states});
    std::vector<MpConfig> mpc;
    for (double p : c.mp.p_mal) {
      MpConfig cfg;
      cfg.iterations = c.mp.iterations;
      cfg.states = c.states;
      cfg.alpha = mp_alpha;
      cfg.epsilon = c.epsilon;
      cfg.p_mal_fc = p;
      cfg.validate();
      mpc.push_back(cfg);
    }
    const double units = error_units(c.metric, m);
    const auto acc = run_trials<CellSums>(
        c.trials, c.threads, [&] { return CellSums(2 * cols.size()); }, [&] { return proto; },
        [&](std::uint64_t t, CellSums &s, std::vector<MapDecoder> &dec) {
          std::size_t col = 0;
          for (std::size_t k = 0; k < c.mp.p_mal.size(); ++k) {
            const auto r = draw_trial(setup, c.mp.p_mal[k], sub_seed(c.seed, t));
            for (const auto &scheme : c.mp.schemes) {
              StateSequence d;
              if (scheme == "mp") d = mp_decide(r, mpc[k]).decision;
              else if (scheme == "map") d = dec[k].decode(r);
              else d = majority_decisions(r);
              add_error(s, col++, count_errors(c.metric, d, r.truth));
            }
          }
        });
    for (std::size_t j = 0; j < cols.size(); ++j) store_cell(rec.table, v, j, acc, j, c.trials, units);
  }
  Series s;
  s.x_label = by_alpha ? "alpha" : "m";
  s.x = V;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    s.add_column(cols[j]);
    for (std::size_t v = 0; v < V.size(); ++v) s.y[j][v] = rec.table.values[v][j];
  }
  rec.series[by_alpha ? "alpha_sweep" : "m_sweep"] = s;
  return rec;
}

// ---- consensus_game ------------------------------------------------------

struct ConsensusAcc {
  CellSums cells;
  std::uint64_t disconnected = 0, empty = 0;
  explicit ConsensusAcc(std::size_t n) : cells(2 * n) {}
  ConsensusAcc &operator+=(const ConsensusAcc &o) {
    cells += o.cells;
    disconnected += o.disconnected;
    empty += o.empty;
    return *this;
  }
};

inline Topology consensus_topology(const ExperimentConfig &c) {
  return generate_topology(topology_kind(c.cons.topology), c.cons.topo_params, c.n, c.cons.topology_seed);
}

inline ResultRecord run_consensus_game(const ExperimentConfig &c) {
  ResultRecord rec;
  const auto topo = consensus_topology(c);
  const MeasurementModel model{c.cons.mu, c.cons.sigma, c.n};
  AttackSpec base;
  base.selection = c.cons.selection == "fixed" ? AttackSpec::Selection::FixedCount : AttackSpec::Selection::Bernoulli;
  base.alpha = c.cons.alpha;
  base.n_a = c.cons.n_a;
  const auto A = c.cons.delta.values(), D = c.cons.eta.values();
  rec.table.corner = "delta\\eta";
  rec.table.row_names = names_of(A);
  rec.table.col_names = names_of(D);
  rec.table.resize(A.size(), D.size());
  const auto acc = run_trials<ConsensusAcc>(
      c.trials, c.threads, [&] { return ConsensusAcc(A.size() * D.size()); },
      [&](std::uint64_t t, ConsensusAcc &s) {
        CounterRng rng(sub_seed(c.seed, t));
        const int hyp = rng.bernoulli(0.5);
        const auto x = draw_measurements(model, hyp, rng);
        const auto hit = attacked_nodes(base, c.n, rng);  // same corrupted set for every delta
        for (std::size_t a = 0; a < A.size(); ++a) {
          auto xa = x;
          for (std::size_t i = 0; i < c.n; ++i)
            if (hit[i]) xa[i] = hyp ? -A[a] : A[a];
          for (std::size_t d = 0; d < D.size(); ++d) {
            CounterRng coin(sub_seed(c.seed, t, 1 + d));
            const auto out = decide_censored(topo, xa, D[d], coin, c.cons.iterate);
            add_error(s.cells, a * D.size() + d, out.decision != hyp);
            s.disconnected += out.disconnected;
            s.empty += out.empty;
          }
        }
      });
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t d = 0; d < D.size(); ++d) store_cell(rec.table, a, d, acc.cells, a * D.size() + d, c.trials, 1.0);
  rec.disconnected = acc.disconnected;
  rec.degenerate = acc.empty;

  // uncensored attack success under H0 with a fixed number of corrupted nodes
  AttackSpec sweep;
  sweep.selection = AttackSpec::Selection::FixedCount;
  sweep.n_a = c.cons.sweep_n_a;
  const auto G = c.cons.sweep_delta.values();
  const std::uint64_t T = c.cons.sweep_trials ? c.cons.sweep_trials : c.trials;
  const auto hits = run_trials<CellSums>(
      T, c.threads, [&] { return CellSums(2 * G.size()); },
      [&](std::uint64_t t, CellSums &s) {
        CounterRng rng(sub_seed(c.seed, t, 0x5eed));
        const auto x = draw_measurements(model, 0, rng);
        const auto hit = attacked_nodes(sweep, c.n, rng);
        for (std::size_t g = 0; g < G.size(); ++g) {
          auto xa = x;
          for (std::size_t i = 0; i < c.n; ++i)
            if (hit[i]) xa[i] = G[g];
          const auto out = decide_censored(topo, xa, std::numeric_limits<double>::infinity(), rng, c.cons.iterate);
          add_error(s, g, out.decision == 1);
        }
      });
  Series ds;
  ds.x_label = "delta";
  ds.x = G;
  ds.add_column("p_success_mc");
  ds.add_column("p_success_stderr");
  ds.add_column("p_success_analytic");
  for (std::size_t g = 0; g < G.size(); ++g) {
    std::tie(ds.y[0][g], ds.y[1][g]) = cell_stats(hits, g, T, 1.0);
    sweep.delta = G[g];
    ds.y[2][g] = analytic_attack_success(sweep, model);
  }
  rec.series["delta_sweep"] = ds;
  std::ostringstream edges;
  write_edge_list(edges, topo);
  rec.edge_list = edges.str();
  attach_equilibrium(rec, c);
  return rec;
}

// ---- single_run ----------------------------------------------------------

inline ResultRecord run_single(const ExperimentConfig &c) {
  ResultRecord rec;
  const auto setup = c.setup();
  const auto &rule = c.single.rule;
  const double fc_alpha = fc_alpha_of(c, c.byz);
  const auto perf = channel_performance(c);
  ExperimentConfig iso_cfg = c;
  if (rule == "hard" || rule == "soft") iso_cfg.iso.scheme = rule;
  MpConfig mpc;
  mpc.iterations = c.mp.iterations;
  mpc.states = c.states;
  mpc.alpha = fc_alpha;
  mpc.epsilon = c.epsilon;
  mpc.p_mal_fc = c.single.p_mal_fc;
  std::vector<MapDecoder> proto;
  if (rule == "map") proto.emplace_back(c.n, c.m, MapConfig{c.byz, LocalChannel{c.epsilon, c.single.p_mal_fc}, c.states});
  const auto acc = run_trials<IsolationAcc>(
      c.trials, c.threads, [&] { return IsolationAcc(1, 0); }, [&] { return proto; },
      [&](std::uint64_t t, IsolationAcc &s, std::vector<MapDecoder> &dec) {
        const auto r = draw_trial(setup, c.single.p_mal_true, sub_seed(c.seed, t));
        StateSequence d;
        if (rule == "map") d = dec[0].decode(r);
        else if (rule == "mp") d = mp_decide(r, mpc).decision;
        else if (rule == "majority") d = majority_decisions(r);
        else {
          CounterRng coin(sub_seed(c.seed, t, 1));
          const auto out = isolate_and_fuse(r, isolation_scores(iso_cfg, r, fc_alpha, perf), {c.single.eta, c.iso.intermediate_l}, coin);
          s.degenerate += out.degenerate;
          d = out.decision;
        }
        add_error(s.cells, 0, count_errors(c.metric, d, r.truth));
      });
  rec.table.corner = "p_mal\\rule";
  rec.table.row_names = {strategy_name(c.single.p_mal_true)};
  rec.table.col_names = {rule};
  rec.table.resize(1, 1);
  store_cell(rec.table, 0, 0, acc.cells, 0, c.trials, error_units(c.metric, c.m));
  rec.degenerate = acc.degenerate;
  return rec;
}

// ---- dispatch ------------------------------------------------------------

/// Runs the scenario; when out_dir is nonempty also writes CSV, JSON sidecar and edge list.
inline ResultRecord run_experiment(const ExperimentConfig &c, const std::string &out_dir = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRecord rec;
  if (c.scenario == "optimal_game") rec = run_optimal_game(c);
  else if (c.scenario == "isolation_game") rec = run_isolation_game(c);
  else if (c.scenario == "comparison") rec = run_comparison(c);
  else if (c.scenario == "mp_benchmark") rec = run_mp_benchmark(c);
  else if (c.scenario == "consensus_game") rec = run_consensus_game(c);
  else if (c.scenario == "single_run") rec = run_single(c);
  else throw ConfigError("config.scenario: unknown scenario '" + c.scenario + "'");
  rec.config_name = c.name;
  rec.scenario = c.scenario;
  rec.config_hash = config_hash(c);
  rec.seed = c.seed;
  rec.trials = c.trials;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out_dir.empty()) write_record(rec, c, out_dir);
  return rec;
}

}  // namespace byzfuse::harness
