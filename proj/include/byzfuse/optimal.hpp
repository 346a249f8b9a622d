#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "isolation.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace byzfuse {

inline constexpr std::size_t kMapMaxEpochs = 22;

struct MapConfig {
  ByzantinePrior prior;
  LocalChannel channel;  // p_mal here is the FC's guess
  StatePrior states = StatePrior::iid();
};

/// Triangular table of f_{r,k}: sum over k-subsets of the last r nodes.
/// cell(r, k) valid for 0 <= k <= r <= n.
class DpTable {
 public:
  DpTable(const std::vector<double> &b, const std::vector<double> &h, std::size_t kmax) : n_(b.size()), kmax_(kmax) {
    if (h.size() != n_) throw ParameterError("dp: b and h differ in length");
    if (kmax > n_) throw ParameterError("dp: k exceeds n");
    for (std::size_t i = 0; i < n_; ++i)
      if (!(b[i] >= 0 && h[i] >= 0)) throw ParameterError("dp: negative weight");
    vals_.assign((n_ + 1) * (kmax_ + 1), 0.0);
    at(0, 0) = 1.0;
    // node order: row r covers nodes n-r .. n-1, so f_{r,k} = b(n-r) f_{r-1,k-1} + h(n-r) f_{r-1,k}
    for (std::size_t r = 1; r <= n_; ++r) {
      const std::size_t node = n_ - r;
      for (std::size_t k = 0; k <= std::min(r, kmax_); ++k) {
        double v = 0;
        if (k <= r - 1) v += h[node] * at(r - 1, k);
        if (k >= 1) v += b[node] * at(r - 1, k - 1);
        at(r, k) = v;
      }
    }
  }

  double cell(std::size_t r, std::size_t k) const {
    if (r > n_ || k > std::min(r, kmax_)) throw ParameterError("dp: cell out of range");
    return vals_[r * (kmax_ + 1) + k];
  }
  std::size_t size() const { return n_; }

 private:
  double &at(std::size_t r, std::size_t k) { return vals_[r * (kmax_ + 1) + k]; }
  double at(std::size_t r, std::size_t k) const { return vals_[r * (kmax_ + 1) + k]; }
  std::size_t n_, kmax_;
  std::vector<double> vals_;
};

/// f_{n,k} = sum over k-subsets I of prod_{i in I} b(i) prod_{i not in I} h(i).
/// Only the band of cells that can still reach k is evaluated.
inline double dp_sum(const std::vector<double> &b, const std::vector<double> &h, std::size_t k) {
  const std::size_t n = b.size();
  if (h.size() != n) throw ParameterError("dp_sum: b and h differ in length");
  if (k > n) throw ParameterError("dp_sum: k exceeds n");
  // f[c] after processing r nodes, restricted to c in [k-(n-r), k]
  std::vector<double> f(k + 1, 0.0);
  f[0] = 1.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t hi = std::min(k, r + 1);
    const std::size_t lo = (k + r + 1 > n) ? k + r + 1 - n : 0;
    for (std::size_t c = hi + 1; c-- > lo;) {
      double v = (c <= r ? h[r] * f[c] : 0.0);
      if (c >= 1) v += b[r] * f[c - 1];
      f[c] = v;
    }
  }
  return f[k];
}

/// log of sum_{k in [k_lo, k_hi]} f_{n,k}, from log-weights. Each node's pair
/// is divided by its larger entry and every row is rescaled by its maximum.
class ScaledDp {
 public:
  double log_sum(const double *lb, const double *lh, std::size_t n, std::size_t k_lo, std::size_t k_hi) {
    if (k_hi > n) k_hi = n;
    if (k_lo > k_hi) return -std::numeric_limits<double>::infinity();
    f_.assign(k_hi + 1, 0.0);
    f_[0] = 1.0;
    double log_scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double top = std::max(lb[r], lh[r]);
      if (top == -std::numeric_limits<double>::infinity()) return top;
      const double b = std::exp(lb[r] - top), h = std::exp(lh[r] - top);
      log_scale += top;
      const std::size_t hi = std::min(k_hi, r + 1);
      const std::size_t lo = (k_lo + r + 1 > n) ? k_lo + r + 1 - n : 0;
      double mx = 0;
      for (std::size_t c = hi + 1; c-- > lo;) {
        double v = (c <= r ? h * f_[c] : 0.0);
        if (c >= 1) v += b * f_[c - 1];
        f_[c] = v;
        mx = std::max(mx, v);
      }
      if (lo > 0) f_[lo - 1] = 0.0;
      if (mx == 0) return -std::numeric_limits<double>::infinity();
      if (mx < 1e-150 || mx > 1e150) {
        for (std::size_t c = lo; c <= hi; ++c) f_[c] /= mx;
        log_scale += std::log(mx);
      }
    }
    double s = 0;
    for (std::size_t c = k_lo; c <= k_hi; ++c) s += f_[c];
    return std::log(s) + log_scale;
  }

 private:
  std::vector<double> f_;
};

/// Exact MAP decoder over the 2^m state sequences. Tables depending only on
/// m_eq are built once; decode() can be called repeatedly.
class MapDecoder {
 public:
  MapDecoder(std::size_t n, std::size_t m, const MapConfig &cfg) : n_(n), m_(m), cfg_(cfg) {
    if (m < 1) throw ParameterError("map: m must be >= 1");
    if (m > kMapMaxEpochs)
      throw CapacityError("map_decide: m = " + std::to_string(m) + " exceeds the enumeration guard of " +
                          std::to_string(kMapMaxEpochs) + " epochs; use mp_decide for long windows");
    cfg.prior.validate(n);
    cfg.channel.validate();
    cfg.states.validate();
    const double le = std::log(clamp_prob(cfg.channel.epsilon)), l1e = std::log(clamp_prob(1 - cfg.channel.epsilon));
    const double d = cfg.channel.delta();
    const double ld = std::log(clamp_prob(d)), l1d = std::log(clamp_prob(1 - d));
    lh_.resize(m + 1);
    lb_.resize(m + 1);
    indep_.resize(m + 1);
    const double a = cfg.prior.effective_alpha();
    for (std::size_t q = 0; q <= m; ++q) {
      lh_[q] = q * l1e + (m - q) * le;
      lb_[q] = q * l1d + (m - q) * ld;
      // log((1-a) e^lh + a e^lb)
      const double x = a < 1 ? std::log1p(-a) + lh_[q] : -INFINITY;
      const double y = a > 0 ? std::log(a) + lb_[q] : -INFINITY;
      indep_[q] = (x == -INFINITY && y == -INFINITY) ? -INFINITY : detail::log_add(x, y);
    }
    const auto &sp = cfg.states;
    lp1_ = std::log(clamp_prob(sp.p1));
    lp0_ = std::log(clamp_prob(1 - sp.p1));
    if (sp.kind == StatePrior::Kind::Markov) {
      lsw_ = std::log(clamp_prob(sp.rho));
      lst_ = std::log(clamp_prob(1 - sp.rho));
    }
    wb_.resize(n);
    wh_.resize(n);
    meq_.resize(n);
  }

  // log of the prior-specific objective plus log P(s)
  double score(const ReportMatrix &r, const StateSequence &cand) {
    check(r);
    if (cand.size() != m_) throw ParameterError("score_sequence: candidate length mismatch");
    pack(r);
    std::uint64_t c = 0;
    for (auto b : cand) c = (c << 1) | b;
    return score_packed(c);
  }

  StateSequence decode(const ReportMatrix &r) {
    check(r);
    pack(r);
    const std::uint64_t count = std::uint64_t{1} << m_;
    std::uint64_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::uint64_t c = 0; c < count; ++c) {
      const double s = score_packed(c);
      if (s > best_score) {  // strict: ties keep the lexicographically smaller candidate
        best_score = s;
        best = c;
      }
    }
    StateSequence out(m_);
    for (std::size_t j = 0; j < m_; ++j) out[j] = (best >> (m_ - 1 - j)) & 1;
    return out;
  }

 private:
  void check(const ReportMatrix &r) const {
    if (r.n != n_ || r.m != m_) throw ParameterError("map: report dimensions differ from decoder");
  }
  void pack(const ReportMatrix &r) {
    rows_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) rows_[i] = r.packed_row(i);
  }

  double state_log_prior(std::uint64_t c) const {
    const auto &sp = cfg_.states;
    if (sp.kind == StatePrior::Kind::IID) {
      const int ones = std::popcount(c);
      return ones * lp1_ + (int(m_) - ones) * lp0_;
    }
    const int first = (c >> (m_ - 1)) & 1;
    const std::uint64_t mask = (m_ == 64 ? ~0ULL : ((std::uint64_t{1} << m_) - 1)) >> 1;
    const int switches = std::popcount((c ^ (c >> 1)) & mask);
    return (first ? lp1_ : lp0_) + switches * lsw_ + (int(m_) - 1 - switches) * lst_;
  }

  double score_packed(std::uint64_t c) {
    for (std::size_t i = 0; i < n_; ++i) meq_[i] = m_ - std::popcount(rows_[i] ^ c);
    double s = state_log_prior(c);
    const auto kind = cfg_.prior.kind;
    if (kind == ByzantinePrior::Kind::IndependentAlpha || kind == ByzantinePrior::Kind::Unconstrained) {
      for (std::size_t i = 0; i < n_; ++i) s += indep_[meq_[i]];
      return s;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      wb_[i] = lb_[meq_[i]];
      wh_[i] = lh_[meq_[i]];
    }
    if (kind == ByzantinePrior::Kind::FixedCount)
      return s + dp_.log_sum(wb_.data(), wh_.data(), n_, cfg_.prior.n_b, cfg_.prior.n_b);
    return s + dp_.log_sum(wb_.data(), wh_.data(), n_, 0, cfg_.prior.h - 1);
  }

  std::size_t n_, m_;
  MapConfig cfg_;
  std::vector<double> lh_, lb_, indep_, wb_, wh_;
  std::vector<std::size_t> meq_;
  std::vector<std::uint64_t> rows_;
  double lp0_ = 0, lp1_ = 0, lsw_ = 0, lst_ = 0;
  ScaledDp dp_;
};

inline double score_sequence(const ReportMatrix &r, const StateSequence &cand, const MapConfig &cfg) {
  MapDecoder dec(r.n, r.m, cfg);
  return dec.score(r, cand);
}

inline StateSequence map_decide(const ReportMatrix &r, const MapConfig &cfg) {
  MapDecoder dec(r.n, r.m, cfg);
  return dec.decode(r);
}

enum class ErrorMetric { PerBit, PerSequence };

struct DetectionSetup {
  std::size_t n = 20, m = 4;
  double epsilon = 0.1;
  StatePrior states = StatePrior::iid();
  ByzantinePrior byz;
};

/// Draws one trial's ground truth. The report noise uses the same uniform
/// stream whatever p_mal is, which gives common random numbers across attacker rows.
inline ReportMatrix draw_trial(const DetectionSetup &setup, double p_mal_true, std::uint64_t trial_seed) {
  CounterRng rng(trial_seed);
  auto states = sample_states(setup.states, setup.m, rng);
  auto placement = sample_placement(setup.byz, setup.n, rng);
  return generate_reports(states, placement, LocalChannel{setup.epsilon, p_mal_true}, rng);
}

inline double error_units(ErrorMetric metric, std::size_t m) { return metric == ErrorMetric::PerBit ? double(m) : 1.0; }

inline std::size_t count_errors(ErrorMetric metric, const StateSequence &d, const StateSequence &truth) {
  const std::size_t e = bit_errors(d, truth);
  return metric == ErrorMetric::PerBit ? e : (e > 0);
}

/// Monte-Carlo error probability of MAP fusion.
inline double estimate_error_probability(const DetectionSetup &setup, double p_mal_true, double p_mal_fc,
                                         std::uint64_t trials, std::uint64_t seed,
                                         ErrorMetric metric = ErrorMetric::PerBit, unsigned threads = 0) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  const MapConfig cfg{setup.byz, LocalChannel{setup.epsilon, p_mal_fc}, setup.states};
  MapDecoder proto(setup.n, setup.m, cfg);  // validates before spawning workers
  auto total = run_trials<Tally<std::uint64_t>>(
      trials, threads, [] { return Tally<std::uint64_t>(1); }, [&] { return proto; },
      [&](std::uint64_t t, Tally<std::uint64_t> &acc, MapDecoder &dec) {
        const auto r = draw_trial(setup, p_mal_true, sub_seed(seed, t));
        acc[0] += count_errors(metric, dec.decode(r), r.truth);
      });
  return double(total[0]) / (double(trials) * error_units(metric, setup.m));
}

}  // namespace byzfuse
