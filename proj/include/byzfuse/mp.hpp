#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace byzfuse {

// Sum-product decoding on the factor graph linking epoch states s_j and node
// statuses a_i. Internally a node status follows the convention
// a = 0 Byzantine, a = 1 honest, so every message is stored as its mass on
// value 0. Placement flags (true = Byzantine) map to a = 0 only at the API.

struct MpConfig {
  std::size_t iterations = 5;
  StatePrior states = StatePrior::markov(0.5);
  double alpha = 0.1;
  double epsilon = 0.1;
  double p_mal_fc = 1.0;
  double convergence_tol = 1e-8;

  void validate() const {
    if (iterations < 1) throw ParameterError("mp: iterations must be >= 1");
    states.validate();
    require_probability(alpha, "alpha");
    require_probability(p_mal_fc, "p_mal_fc");
    if (!(epsilon >= 0 && epsilon < 1)) throw ParameterError("mp: epsilon must lie in [0,1)");
  }
};

inline constexpr double kMsgClamp = 1e-12;

inline double clamp_msg(double p) { return std::clamp(p, kMsgClamp, 1.0 - kMsgClamp); }

struct MessageState {
  std::size_t n = 0, m = 0;
  std::vector<double> tau_l, tau_r, phi_l, phi_r;  // per epoch
  std::vector<double> nu_u, nu_d;                  // n x m, index i*m + j
  std::vector<double> lambda_u, lambda_d;          // n x m, index i*m + j (edge between a_i and factor ij)
  std::vector<double> omega_u, omega_d;            // per node

  // per-family update counts since construction
  std::size_t updates_nu_u = 0, updates_chain = 0, updates_nu_d = 0, updates_lambda_d = 0, updates_lambda_u = 0,
              updates_omega_d = 0;

  std::size_t total_updates() const {
    return updates_nu_u + updates_chain + updates_nu_d + updates_lambda_d + updates_lambda_u + updates_omega_d;
  }
};

inline MessageState init_messages(std::size_t n, std::size_t m, const MpConfig &cfg) {
  MessageState st;
  st.n = n;
  st.m = m;
  st.tau_l.assign(m, 0.5);
  st.tau_r.assign(m, 0.5);
  st.phi_l.assign(m, 0.5);
  st.phi_r.assign(m, 0.5);
  st.phi_r[0] = clamp_msg(1 - cfg.states.p1);
  if (cfg.states.kind == StatePrior::Kind::IID)
    std::fill(st.phi_r.begin(), st.phi_r.end(), clamp_msg(1 - cfg.states.p1));
  st.nu_u.assign(n * m, 0.5);
  st.nu_d.assign(n * m, 0.5);
  st.omega_u.assign(n, clamp_msg(cfg.alpha));  // p(a = 0) = alpha
  st.omega_d.assign(n, 0.5);
  st.lambda_u.assign(n * m, clamp_msg(cfg.alpha));
  st.lambda_d.assign(n * m, 0.5);
  return st;
}

namespace detail {

inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// p(r | s, a) with a = 0 Byzantine
struct FactorTable {
  double v[2][2][2];  // [r][s][a]
  explicit FactorTable(const MpConfig &cfg) {
    const double eps = cfg.epsilon;
    const double del = LocalChannel{cfg.epsilon, cfg.p_mal_fc}.delta();
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s) {
        v[r][s][0] = r == s ? 1 - del : del;
        v[r][s][1] = r == s ? 1 - eps : eps;
      }
  }
  double operator()(int r, int s, int a) const { return v[r][s][a]; }
};

// new value, tracking the largest change
inline void assign(double &slot, double value, double &max_delta) {
  value = clamp_msg(value);
  max_delta = std::max(max_delta, std::abs(value - slot));
  slot = value;
}

inline double chain_pass(double tau, double rho) { return (1 - rho) * tau + rho * (1 - tau); }

}  // namespace detail

namespace detail {

inline void update_nu_u(MessageState &st, const ReportMatrix &r, const FactorTable &f, double &md) {
  for (std::size_t i = 0; i < st.n; ++i)
    for (std::size_t j = 0; j < st.m; ++j) {
      const int rv = r(i, j);
      const double lam = st.lambda_u[i * st.m + j];
      const double k1 = f(rv, 0, 0) * lam + f(rv, 0, 1) * (1 - lam);
      const double k2 = f(rv, 1, 0) * lam + f(rv, 1, 1) * (1 - lam);
      assign(st.nu_u[i * st.m + j], k1 / (k1 + k2), md);
      ++st.updates_nu_u;
    }
}

// sum over nodes of logit(nu_u) per epoch
inline std::vector<double> column_logits(const MessageState &st) {
  std::vector<double> L(st.m, 0.0);
  for (std::size_t i = 0; i < st.n; ++i)
    for (std::size_t j = 0; j < st.m; ++j) L[j] += logit(st.nu_u[i * st.m + j]);
  return L;
}

inline void update_chain(MessageState &st, const std::vector<double> &L, const MpConfig &cfg, double &md) {
  const std::size_t m = st.m;
  const bool markov = cfg.states.kind == StatePrior::Kind::Markov;
  const double rho = cfg.states.rho;
  for (std::size_t j = 0; j < m; ++j) {
    assign(st.tau_r[j], sigmoid(logit(st.phi_r[j]) + L[j]), md);
    if (markov && j + 1 < m) assign(st.phi_r[j + 1], chain_pass(st.tau_r[j], rho), md);
    ++st.updates_chain;
  }
  for (std::size_t j = m; j-- > 0;) {
    assign(st.tau_l[j], sigmoid(logit(st.phi_l[j]) + L[j]), md);
    if (markov && j > 0) assign(st.phi_l[j - 1], chain_pass(st.tau_l[j], rho), md);
    ++st.updates_chain;
  }
}

}  // namespace detail

/// One flooding sweep. Returns the largest absolute message change.
inline double update_messages_once(MessageState &st, const ReportMatrix &r, const MpConfig &cfg) {
  if (r.n != st.n || r.m != st.m) throw ParameterError("mp: state and reports differ in shape");
  const detail::FactorTable f(cfg);
  const std::size_t n = st.n, m = st.m;
  double md = 0;

  detail::update_nu_u(st, r, f, md);
  const auto L = detail::column_logits(st);
  detail::update_chain(st, L, cfg, md);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t e = i * m + j;
      const double x = detail::logit(st.phi_r[j]) + detail::logit(st.phi_l[j]) + L[j] - detail::logit(st.nu_u[e]);
      detail::assign(st.nu_d[e], detail::sigmoid(x), md);
      ++st.updates_nu_d;
    }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t e = i * m + j;
      const int rv = r(i, j);
      const double nu = st.nu_d[e];
      const double byz = f(rv, 0, 0) * nu + f(rv, 1, 0) * (1 - nu);
      const double hon = f(rv, 0, 1) * nu + f(rv, 1, 1) * (1 - nu);
      detail::assign(st.lambda_d[e], byz / (byz + hon), md);
      ++st.updates_lambda_d;
    }

  for (std::size_t i = 0; i < n; ++i) {
    double tot = 0;
    for (std::size_t j = 0; j < m; ++j) tot += detail::logit(st.lambda_d[i * m + j]);
    const double prior = detail::logit(st.omega_u[i]);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t e = i * m + j;
      detail::assign(st.lambda_u[e], detail::sigmoid(prior + tot - detail::logit(st.lambda_d[e])), md);
      ++st.updates_lambda_u;
    }
    detail::assign(st.omega_d[i], detail::sigmoid(tot), md);
    ++st.updates_omega_d;
  }
  return md;
}

struct MpResult {
  StateSequence decision;
  std::vector<double> marginals;       // P(s_j = 1)
  std::vector<double> byz_posteriors;  // P(node i Byzantine)
  bool converged = false;
  std::size_t iterations_used = 0;
  std::size_t message_updates = 0;
};

/// Final refresh of the upward and chain messages, then per-epoch marginals.
inline MpResult read_out(MessageState &st, const ReportMatrix &r, const MpConfig &cfg) {
  const detail::FactorTable f(cfg);
  double md = 0;
  detail::update_nu_u(st, r, f, md);
  const auto L = detail::column_logits(st);
  detail::update_chain(st, L, cfg, md);
  MpResult out;
  out.decision.assign(st.m, 0);
  out.marginals.resize(st.m);
  for (std::size_t j = 0; j < st.m; ++j) {
    // tau_r already holds phi_r * prod nu_u; add the left message
    const double x = detail::logit(st.tau_r[j]) + detail::logit(st.phi_l[j]);
    const double p1 = 1 - detail::sigmoid(x);
    out.marginals[j] = p1;
    out.decision[j] = p1 > 0.5 ? 1 : 0;
  }
  out.byz_posteriors.resize(st.n);
  for (std::size_t i = 0; i < st.n; ++i)
    out.byz_posteriors[i] = detail::sigmoid(detail::logit(st.omega_u[i]) + detail::logit(st.omega_d[i]));
  out.message_updates = st.total_updates();
  return out;
}

inline MpResult mp_decide(const ReportMatrix &r, const MpConfig &cfg) {
  cfg.validate();
  if (r.n < 1 || r.m < 1) throw ParameterError("mp: empty report matrix");
  auto st = init_messages(r.n, r.m, cfg);
  bool converged = false;
  std::size_t it = 0;
  while (it < cfg.iterations) {
    const double md = update_messages_once(st, r, cfg);
    ++it;
    if (md < cfg.convergence_tol) {
      converged = true;
      break;
    }
  }
  auto out = read_out(st, r, cfg);
  out.converged = converged;
  out.iterations_used = it;
  return out;
}

}  // namespace byzfuse
