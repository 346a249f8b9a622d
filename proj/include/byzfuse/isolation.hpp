#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fusion.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace byzfuse {

struct ReputationScores {
  enum class Scheme { Hard, Soft };
  std::vector<double> scores;
  Scheme scheme = Scheme::Hard;
};

// Absolute: R_ij = |log P(u=0, r) / P(u=1, r)|.
// Oriented: R_ij = log P(u=r_ij, r) / P(u!=r_ij, r), signed by the node's own
// report, so a report contradicting a confident column counts against the node.
enum class SoftScoreForm { Absolute, Oriented };

struct IsolationPolicy {
  double eta = 0.0;
  std::size_t intermediate_l = 0;  // 0 means majority
};

inline constexpr double kLogClamp = 1e-12;

inline double clamp_prob(double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); }

inline StateSequence intermediate_decisions(const ReportMatrix &r, std::size_t l) {
  if (l < 1 || l > r.n) throw ParameterError("intermediate l out of range");
  const auto rule = VotingRule::k_out_of_n(l);
  StateSequence d(r.m);
  for (std::size_t j = 0; j < r.m; ++j) d[j] = vote_count(rule, r.column_sum(j), r.n);
  return d;
}

inline StateSequence majority_decisions(const ReportMatrix &r) {
  StateSequence d(r.m);
  for (std::size_t j = 0; j < r.m; ++j) d[j] = vote_count(VotingRule::majority(), r.column_sum(j), r.n);
  return d;
}

inline ReputationScores hard_scores(const ReportMatrix &r, const StateSequence &d_int) {
  if (d_int.size() != r.m) throw ParameterError("hard_scores: length mismatch");
  ReputationScores out{std::vector<double>(r.n, 0.0), ReputationScores::Scheme::Hard};
  for (std::size_t i = 0; i < r.n; ++i)
    for (std::size_t j = 0; j < r.m; ++j) out.scores[i] += (r(i, j) == d_int[j]);
  return out;
}

namespace detail {
inline double log_add(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}
}  // namespace detail

/// Soft reputation: score[i] = sum_j R_ij, where every node is assumed
/// Byzantine with probability alpha and flips with probability p_mal_guess.
inline ReputationScores soft_scores(const ReportMatrix &r, double alpha, double p_mal_guess,
                                    const NodePerformance &perf, double prior0,
                                    SoftScoreForm form = SoftScoreForm::Absolute) {
  require_probability(alpha, "alpha");
  require_probability(p_mal_guess, "p_mal_guess");
  if (perf.size() == 0) throw ParameterError("soft_scores: empty performance");
  const double pd = perf.p_d[0], pfa = perf.p_fa[0];
  if (!(pd > 0 && pd < 1 && pfa > 0 && pfa < 1 && prior0 > 0 && prior0 < 1))
    throw DomainError("soft_scores: probabilities must be in (0,1)");

  const double q = clamp_prob(alpha * p_mal_guess);
  // P(u = b | H): index [H][b]
  const double pu[2][2] = {{1 - pfa, pfa}, {1 - pd, pd}};
  const double log_prior[2] = {std::log(prior0), std::log(1 - prior0)};
  // log P(r | H): [H][r]
  double lr[2][2];
  for (int H = 0; H < 2; ++H)
    for (int rv = 0; rv < 2; ++rv)
      lr[H][rv] = std::log(clamp_prob((1 - q) * pu[H][rv] + q * pu[H][1 - rv]));
  // log P(r_i | u_i): [r == u]
  const double lr_given_u[2] = {std::log(q), std::log(1 - q)};

  ReputationScores out{std::vector<double>(r.n, 0.0), ReputationScores::Scheme::Soft};
  for (std::size_t j = 0; j < r.m; ++j) {
    const std::size_t ones = r.column_sum(j), zeros = r.n - ones;
    const double total[2] = {ones * lr[0][1] + zeros * lr[0][0], ones * lr[1][1] + zeros * lr[1][0]};
    // the ratio only depends on the node's own report
    double R[2];
    for (int rv = 0; rv < 2; ++rv) {
      double lj[2];
      for (int b = 0; b < 2; ++b) {
        const double h0 = std::log(clamp_prob(pu[0][b])) + log_prior[0] + total[0] - lr[0][rv];
        const double h1 = std::log(clamp_prob(pu[1][b])) + log_prior[1] + total[1] - lr[1][rv];
        lj[b] = lr_given_u[rv == b] + detail::log_add(h0, h1);
      }
      R[rv] = form == SoftScoreForm::Absolute ? std::abs(lj[0] - lj[1]) : lj[rv] - lj[1 - rv];
    }
    for (std::size_t i = 0; i < r.n; ++i) out.scores[i] += R[r(i, j)];
  }
  return out;
}

struct FusionOutcome {
  StateSequence decision;
  bool degenerate = false;  // no survivors, decision drawn at random
  std::size_t survivors = 0;
};

/// Majority over nodes with score >= eta. With no survivors each epoch is a fair coin from rng.
inline FusionOutcome isolate_and_fuse(const ReportMatrix &r, const ReputationScores &scores,
                                      const IsolationPolicy &policy, CounterRng &rng) {
  if (!std::isfinite(policy.eta)) throw ParameterError("eta must be finite");
  if (scores.scores.size() != r.n) throw ParameterError("isolate_and_fuse: size mismatch");
  FusionOutcome out{StateSequence(r.m, 0)};
  std::vector<std::size_t> ones(r.m, 0);
  for (std::size_t i = 0; i < r.n; ++i) {
    if (scores.scores[i] < policy.eta) continue;
    ++out.survivors;
    for (std::size_t j = 0; j < r.m; ++j) ones[j] += r(i, j);
  }
  if (out.survivors == 0) {
    out.degenerate = true;
    for (auto &b : out.decision) b = rng.bernoulli(0.5);
    return out;
  }
  for (std::size_t j = 0; j < r.m; ++j)
    out.decision[j] = vote_count(VotingRule::majority(), ones[j], out.survivors);
  return out;
}

/// Empirical isolation rates (Byzantine, honest). nullopt when the class is empty.
inline std::pair<std::optional<double>, std::optional<double>> isolation_rates(const ReputationScores &scores,
                                                                               const Placement &placement,
                                                                               double eta) {
  if (scores.scores.size() != placement.size()) throw ParameterError("isolation_rates: size mismatch");
  std::size_t nb = 0, nh = 0, ib = 0, ih = 0;
  for (std::size_t i = 0; i < placement.size(); ++i) {
    const bool iso = scores.scores[i] < eta;
    if (placement[i]) {
      ++nb;
      ib += iso;
    } else {
      ++nh;
      ih += iso;
    }
  }
  std::optional<double> b, h;
  if (nb) b = double(ib) / nb;
  if (nh) h = double(ih) / nh;
  return {b, h};
}

}  // namespace byzfuse
