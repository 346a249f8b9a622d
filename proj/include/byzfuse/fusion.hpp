#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace byzfuse {

struct VotingRule {
  enum class Kind { AND, OR, KOutOfN, Majority };
  Kind kind = Kind::Majority;
  std::size_t k = 1;

  static VotingRule majority() { return {Kind::Majority, 0}; }
  static VotingRule k_out_of_n(std::size_t k) { return {Kind::KOutOfN, k}; }
  static VotingRule all() { return {Kind::AND, 0}; }
  static VotingRule any() { return {Kind::OR, 0}; }

  // Smallest number of ones that yields a 1 decision. Even-n majority ties go to 0.
  std::size_t threshold(std::size_t n) const {
    switch (kind) {
      case Kind::AND: return n;
      case Kind::OR: return 1;
      case Kind::Majority: return n / 2 + 1;
      case Kind::KOutOfN:
        if (k < 1 || k > n) throw ParameterError("k out of range for k-out-of-n");
        return k;
    }
    return n;
  }
};

struct NodePerformance {
  std::vector<double> p_d, p_fa;

  static NodePerformance homogeneous(std::size_t n, double p_d, double p_fa) {
    return {std::vector<double>(n, p_d), std::vector<double>(n, p_fa)};
  }
  std::size_t size() const { return p_d.size(); }
};

inline int vote_count(const VotingRule &rule, std::size_t ones, std::size_t n) {
  if (n == 0) throw ParameterError("vote: empty column");
  return ones >= rule.threshold(n) ? 1 : 0;
}

template <class Column>
int vote(const VotingRule &rule, const Column &column) {
  std::size_t ones = 0;
  for (auto b : column) ones += b ? 1 : 0;
  return vote_count(rule, ones, column.size());
}

namespace detail {
inline bool all_equal(const std::vector<double> &v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

// P(at least k successes out of n), success probability p
inline double binomial_tail(std::size_t n, std::size_t k, double p) {
  double s = 0;
  for (std::size_t i = k; i <= n; ++i)
    s += binomial_coefficient(n, i) * std::pow(p, double(i)) * std::pow(1 - p, double(n - i));
  return s;
}
}  // namespace detail

/// Global (Q_D, Q_FA) of a voting rule.
inline std::pair<double, double> analytic_performance(const VotingRule &rule, const NodePerformance &perf) {
  const std::size_t n = perf.size();
  if (n == 0 || perf.p_fa.size() != n) throw ParameterError("analytic_performance: bad sizes");
  for (std::size_t i = 0; i < n; ++i) {
    require_probability(perf.p_d[i], "p_d");
    require_probability(perf.p_fa[i], "p_fa");
  }
  if (rule.kind == VotingRule::Kind::AND || rule.kind == VotingRule::Kind::OR) {
    const bool is_and = rule.kind == VotingRule::Kind::AND;
    double qd = 1, qfa = 1;
    for (std::size_t i = 0; i < n; ++i) {
      qd *= is_and ? perf.p_d[i] : 1 - perf.p_d[i];
      qfa *= is_and ? perf.p_fa[i] : 1 - perf.p_fa[i];
    }
    return is_and ? std::pair{qd, qfa} : std::pair{1 - qd, 1 - qfa};
  }
  if (!detail::all_equal(perf.p_d) || !detail::all_equal(perf.p_fa))
    throw UnsupportedInput("k-out-of-n closed form needs homogeneous nodes");
  const std::size_t k = rule.threshold(n);
  return {detail::binomial_tail(n, k, perf.p_d[0]), detail::binomial_tail(n, k, perf.p_fa[0])};
}

/// Log-likelihood-ratio weighted vote. Statistic equal to the threshold decides 1.
template <class Column>
int chair_varshney(const Column &column, const NodePerformance &perf, double prior_ratio_log) {
  if (column.size() != perf.size()) throw ParameterError("chair_varshney: size mismatch");
  double stat = 0;
  for (std::size_t i = 0; i < perf.size(); ++i) {
    const double pd = perf.p_d[i], pfa = perf.p_fa[i];
    if (!(pd > 0 && pd < 1 && pfa > 0 && pfa < 1))
      throw DomainError("chair_varshney: probabilities must be in (0,1)");
    const double pmd = 1 - pd;
    stat += column[i] ? std::log((1 - pmd) / pfa) : std::log(pmd / (1 - pfa));
  }
  return stat >= prior_ratio_log ? 1 : 0;
}

/// Optimal l for an l-out-of-n intermediate rule with per-node P(u=1|H0)=p10 and P(u=1|H1)=p11.
inline double optimal_intermediate_threshold(double p10, double p11, std::size_t n, double prior0) {
  if (!(p10 > 0 && p10 < 1 && p11 > 0 && p11 < 1) || p10 == p11)
    throw DomainError("optimal_intermediate_threshold: degenerate probabilities");
  if (!(prior0 > 0 && prior0 < 1)) throw DomainError("prior0 must be in (0,1)");
  const double num = std::log(prior0 / (1 - prior0)) + n * std::log((1 - p10) / (1 - p11));
  const double den = std::log(p11 * (1 - p10) / (p10 * (1 - p11)));
  return num / den;
}

}  // namespace byzfuse
