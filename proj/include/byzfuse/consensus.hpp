#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace byzfuse {

struct TopologyParams {
  double p = 0.5;               // ErdosRenyi edge probability
  std::size_t ring_degree = 4;  // SmallWorld: neighbours on the ring (even)
  double rewire = 0.1;          // SmallWorld rewiring probability
  std::size_t m_attach = 2;     // ScaleFree
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // Explicit
};

struct Topology {
  enum class Kind { FullyConnected, ErdosRenyi, SmallWorld, ScaleFree, Explicit };
  Kind kind = Kind::FullyConnected;
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> adj;  // sorted neighbour lists
  std::uint64_t seed = 0;
  bool may_be_disconnected = false;  // parameters imply disconnection

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto &a : adj) e += a.size();
    return e / 2;
  }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto &a : adj) d = std::max(d, a.size());
    return d;
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < n; ++u)
      for (auto v : adj[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }
};

namespace detail {
inline Topology from_edge_set(Topology::Kind kind, std::size_t n, const std::set<std::pair<std::size_t, std::size_t>> &e) {
  Topology t;
  t.kind = kind;
  t.n = n;
  t.adj.assign(n, {});
  for (auto [u, v] : e) {
    t.adj[u].push_back(v);
    t.adj[v].push_back(u);
  }
  for (auto &a : t.adj) std::sort(a.begin(), a.end());
  return t;
}

inline std::pair<std::size_t, std::size_t> ordered(std::size_t u, std::size_t v) { return {std::min(u, v), std::max(u, v)}; }
}  // namespace detail

inline Topology generate_topology(Topology::Kind kind, const TopologyParams &params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("topology: n must be positive");
  CounterRng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> e;
  bool warn = false;
  switch (kind) {
    case Topology::Kind::FullyConnected:
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) e.insert({u, v});
      break;
    case Topology::Kind::ErdosRenyi:
      require_probability(params.p, "edge probability");
      warn = params.p == 0 && n > 1;
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
          if (rng.bernoulli(params.p)) e.insert({u, v});
      break;
    case Topology::Kind::SmallWorld: {
      const std::size_t k = params.ring_degree;
      if (k % 2 != 0 || k >= n) throw ParameterError("small world: ring degree must be even and below n");
      require_probability(params.rewire, "rewiring probability");
      warn = k == 0 && n > 1;
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t s = 1; s <= k / 2; ++s) e.insert(detail::ordered(u, (u + s) % n));
      // rewire each lattice edge (u, u+s) with probability beta to a random free endpoint
      for (std::size_t s = 1; s <= k / 2; ++s)
        for (std::size_t u = 0; u < n; ++u) {
          if (!rng.bernoulli(params.rewire)) continue;
          const auto old = detail::ordered(u, (u + s) % n);
          if (!e.count(old)) continue;
          std::vector<std::size_t> free;
          for (std::size_t w = 0; w < n; ++w)
            if (w != u && !e.count(detail::ordered(u, w))) free.push_back(w);
          if (free.empty()) continue;
          e.erase(old);
          e.insert(detail::ordered(u, free[rng.below(free.size())]));
        }
      break;
    }
    case Topology::Kind::ScaleFree: {
      const std::size_t m0 = params.m_attach;
      if (m0 < 1 || m0 >= n) throw ParameterError("scale free: m_attach must lie in [1, n)");
      // seed clique on m0 nodes, then each newcomer links to m0 distinct nodes chosen by degree
      std::vector<std::size_t> ends;  // each node appears once per incident edge
      for (std::size_t u = 0; u < m0; ++u)
        for (std::size_t v = u + 1; v < m0; ++v) {
          e.insert({u, v});
          ends.push_back(u);
          ends.push_back(v);
        }
      for (std::size_t u = m0; u < n; ++u) {
        std::set<std::size_t> targets;
        while (targets.size() < m0)
          targets.insert(ends.empty() ? rng.below(u) : ends[rng.below(ends.size())]);
        for (auto v : targets) {
          e.insert(detail::ordered(u, v));
          ends.push_back(u);
          ends.push_back(v);
        }
      }
      break;
    }
    case Topology::Kind::Explicit:
      for (auto [u, v] : params.edges) {
        if (u >= n || v >= n) throw ParameterError("explicit topology: node index out of range");
        if (u == v) throw ParameterError("explicit topology: self-loop");
        e.insert(detail::ordered(u, v));
      }
      break;
  }
  auto t = detail::from_edge_set(kind, n, e);
  t.seed = seed;
  t.may_be_disconnected = warn;
  return t;
}

inline void write_edge_list(std::ostream &os, const Topology &t) {
  for (auto [u, v] : t.edges()) os << u << ' ' << v << '\n';
}

/// Reads "u v" lines. n = 0 infers the node count from the largest index.
inline Topology read_edge_list(std::istream &is, std::size_t n = 0) {
  TopologyParams p;
  std::string line;
  std::size_t top = 0, lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::size_t u, v;
    if (!(ss >> u >> v)) throw ParameterError("edge list: malformed line " + std::to_string(lineno));
    p.edges.emplace_back(u, v);
    top = std::max({top, u + 1, v + 1});
  }
  return generate_topology(Topology::Kind::Explicit, p, n ? n : top, 0);
}

/// Connected components of the subgraph induced by `active`; label -1 for inactive nodes.
inline std::vector<int> components(const Topology &t, const std::vector<bool> &active, int *count = nullptr) {
  std::vector<int> label(t.n, -1);
  int c = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < t.n; ++s) {
    if (!active[s] || label[s] >= 0) continue;
    label[s] = c;
    stack.assign(1, s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : t.adj[u])
        if (active[v] && label[v] < 0) {
          label[v] = c;
          stack.push_back(v);
        }
    }
    ++c;
  }
  if (count) *count = c;
  return label;
}

struct ConsensusRun {
  std::vector<std::vector<double>> trajectory;  // only filled on request
  std::vector<double> final_values;              // per node; NaN for inactive nodes
  double consensus_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> component_values;
  std::vector<int> component_of;
  std::size_t iterations_used = 0;
  std::vector<std::size_t> survivor_set;
  bool disconnected = false;
  bool converged = false;
};

inline constexpr double kConsensusTol = 1e-10;
inline constexpr std::size_t kConsensusMaxIter = 100000;

inline ConsensusRun run_consensus(const Topology &t, const std::vector<double> &initial,
                                  const std::vector<std::size_t> &active, double step,
                                  std::vector<double> weights = {}, std::size_t max_iter = kConsensusMaxIter,
                                  double tol = kConsensusTol, bool record = false) {
  if (initial.size() != t.n) throw ParameterError("consensus: initial values do not match n");
  if (weights.empty()) weights.assign(t.n, 1.0);
  for (double w : weights)
    if (!(w > 0)) throw ParameterError("consensus: weights must be positive");
  std::vector<bool> on(t.n, false);
  for (auto i : active) {
    if (i >= t.n) throw ParameterError("consensus: active index out of range");
    on[i] = true;
  }
  std::size_t maxdeg = 0;
  for (std::size_t i = 0; i < t.n; ++i) {
    if (!on[i]) continue;
    std::size_t d = 0;
    for (auto j : t.adj[i]) d += on[j];
    maxdeg = std::max(maxdeg, d);
  }
  if (!(step > 0) || (maxdeg > 0 && !(step < 1.0 / double(maxdeg))))
    throw ParameterError("consensus: step must lie in (0, 1/max_degree)");

  ConsensusRun run;
  for (std::size_t i = 0; i < t.n; ++i)
    if (on[i]) run.survivor_set.push_back(i);
  std::vector<double> x(t.n, std::numeric_limits<double>::quiet_NaN()), nx;
  for (auto i : run.survivor_set) x[i] = initial[i];
  if (record) run.trajectory.push_back(x);
  for (std::size_t k = 0; k < max_iter; ++k) {
    nx = x;
    double change = 0;
    for (auto i : run.survivor_set) {
      double s = 0;
      for (auto j : t.adj[i])
        if (on[j]) s += x[j] - x[i];
      nx[i] = x[i] + step / weights[i] * s;
      change = std::max(change, std::abs(nx[i] - x[i]));
    }
    x.swap(nx);
    run.iterations_used = k + 1;
    if (record) run.trajectory.push_back(x);
    if (change < tol) {
      run.converged = true;
      break;
    }
  }
  if (run.survivor_set.empty()) run.converged = true;
  int count = 0;
  run.component_of = components(t, on, &count);
  run.disconnected = count > 1;
  run.component_values.assign(count, 0.0);
  std::vector<std::size_t> size(count, 0);
  for (auto i : run.survivor_set) {
    run.component_values[run.component_of[i]] += x[i];
    ++size[run.component_of[i]];
  }
  for (int c = 0; c < count; ++c) run.component_values[c] /= double(size[c]);
  if (count == 1) run.consensus_value = run.component_values[0];
  run.final_values = x;
  return run;
}

struct MeasurementModel {
  double mu = 1.0, sigma = 1.0;
  std::size_t n = 20;
};

struct AttackSpec {
  enum class Selection { FixedCount, Bernoulli };
  Selection selection = Selection::Bernoulli;
  std::size_t n_a = 0;
  double alpha = 0.0;
  double delta = 0.0;
};

/// Measurements x_i ~ N(-mu, sigma) under H0 and N(+mu, sigma) under H1.
inline std::vector<double> draw_measurements(const MeasurementModel &model, int hypothesis, CounterRng &rng) {
  if (!(model.sigma > 0)) throw ParameterError("sigma must be positive");
  std::normal_distribution<double> g(hypothesis ? model.mu : -model.mu, model.sigma);
  std::vector<double> x(model.n);
  for (auto &v : x) v = g(rng);
  return x;
}

inline std::vector<bool> attacked_nodes(const AttackSpec &spec, std::size_t n, CounterRng &rng) {
  std::vector<bool> hit(n, false);
  if (spec.selection == AttackSpec::Selection::Bernoulli) {
    require_probability(spec.alpha, "alpha");
    for (std::size_t i = 0; i < n; ++i) hit[i] = rng.bernoulli(spec.alpha);
    return hit;
  }
  if (spec.n_a > n) throw ParameterError("attack: n_a exceeds n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < spec.n_a; ++k) {
    std::swap(idx[k], idx[k + rng.below(n - k)]);
    hit[idx[k]] = true;
  }
  return hit;
}

/// Corrupted nodes report +delta under H0 and -delta under H1.
inline std::vector<double> apply_attack(std::vector<double> x, const AttackSpec &spec, int hypothesis, CounterRng &rng) {
  if (!(spec.delta >= 0)) throw ParameterError("attack: delta must be nonnegative");
  const auto hit = attacked_nodes(spec, x.size(), rng);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (hit[i]) x[i] = hypothesis ? -spec.delta : spec.delta;
  return x;
}

inline std::vector<double> apply_attack(std::vector<double> x, const AttackSpec &spec, int hypothesis, std::uint64_t seed) {
  CounterRng rng(seed);
  return apply_attack(std::move(x), spec, hypothesis, rng);
}

/// Nodes that keep their measurement: |x| < eta.
inline std::vector<std::size_t> censor(const std::vector<double> &x, double eta) {
  if (!(eta >= 0)) throw ParameterError("censor: eta must be nonnegative");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) < eta) keep.push_back(i);
  return keep;
}

inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Probability that the uncensored consensus average crosses zero under H0.
inline double analytic_attack_success(const AttackSpec &spec, const MeasurementModel &model) {
  const std::size_t n = model.n, na = spec.n_a;
  if (na > n) throw ParameterError("attack: n_a exceeds n");
  if (na == n) return spec.delta > 0 ? 1.0 : 0.5;
  const double nh = double(n - na);
  return gaussian_q((model.mu - double(na) * spec.delta / nh) * std::sqrt(nh) / model.sigma);
}

struct CddOutcome {
  int decision = 0;
  bool disconnected = false;
  bool empty = false;
};

/// Decision from censored measurements, using the consensus limit of each
/// connected component of the survivor subgraph (the component mean). With
/// iterate = true the consensus protocol is actually run instead.
inline CddOutcome decide_censored(const Topology &t, const std::vector<double> &x, double eta, CounterRng &rng,
                                  bool iterate = false) {
  const auto keep = censor(x, eta);
  CddOutcome out;
  if (keep.empty()) {
    out.empty = true;
    out.decision = rng.bernoulli(0.5);
    return out;
  }
  std::vector<double> values;  // per surviving node, its component's limit
  if (iterate) {
    std::size_t maxdeg = t.max_degree();
    auto run = run_consensus(t, x, keep, 1.0 / double(maxdeg + 1));
    out.disconnected = run.disconnected;
    for (auto i : keep) values.push_back(run.component_values[run.component_of[i]]);
  } else if (t.kind == Topology::Kind::FullyConnected) {
    double s = 0;
    for (auto i : keep) s += x[i];
    values.assign(1, s / double(keep.size()));
  } else {
    std::vector<bool> on(t.n, false);
    for (auto i : keep) on[i] = true;
    int count = 0;
    const auto label = components(t, on, &count);
    std::vector<double> sum(count, 0.0);
    std::vector<std::size_t> size(count, 0);
    for (auto i : keep) {
      sum[label[i]] += x[i];
      ++size[label[i]];
    }
    out.disconnected = count > 1;
    for (auto i : keep) values.push_back(sum[label[i]] / double(size[label[i]]));
  }
  std::size_t ones = 0;
  for (double v : values) ones += v > 0;
  out.decision = 2 * ones > values.size() ? 1 : 0;  // single component: plain sign test
  return out;
}

inline CddOutcome cdd_trial(const Topology &t, const MeasurementModel &model, const AttackSpec &spec, double eta,
                            int hypothesis, std::uint64_t seed, bool iterate = false) {
  if (t.n != model.n) throw ParameterError("cdd: topology and model disagree on n");
  CounterRng rng(seed);
  auto x = draw_measurements(model, hypothesis, rng);
  x = apply_attack(std::move(x), spec, hypothesis, rng);
  return decide_censored(t, x, eta, rng, iterate);
}

}  // namespace byzfuse
