#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace byzfuse {

using Bits = std::vector<std::uint8_t>;
using StateSequence = Bits;

struct StatePrior {
  enum class Kind { IID, Markov };
  Kind kind = Kind::IID;
  double rho = 0.5;  // P(s_j != s_{j-1}) for Markov
  double p1 = 0.5;   // P(s_1 = 1), or P(s = 1) for IID

  static StatePrior iid(double p1 = 0.5) { return {Kind::IID, 0.5, p1}; }
  static StatePrior markov(double rho, double p1 = 0.5) { return {Kind::Markov, rho, p1}; }

  void validate() const {
    require_probability(rho, "rho");
    require_probability(p1, "p1");
  }
};

// Local decision error and the Byzantine flip probability. delta is always
// derived, never stored.
struct LocalChannel {
  double epsilon = 0.1;
  double p_mal = 1.0;

  double delta() const { return epsilon * (1.0 - p_mal) + (1.0 - epsilon) * p_mal; }

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in [0,1)");
    require_probability(p_mal, "p_mal");
  }
};

struct ByzantinePrior {
  enum class Kind { IndependentAlpha, FixedCount, BoundedMaxEnt, Unconstrained };
  Kind kind = Kind::IndependentAlpha;
  double alpha = 0.0;
  std::size_t n_b = 0;
  std::size_t h = 1;  // BoundedMaxEnt: N_B < h

  static ByzantinePrior independent(double alpha) { return {Kind::IndependentAlpha, alpha, 0, 1}; }
  static ByzantinePrior fixed(std::size_t n_b) { return {Kind::FixedCount, 0.0, n_b, 1}; }
  static ByzantinePrior bounded(std::size_t h) { return {Kind::BoundedMaxEnt, 0.0, 0, h}; }
  static ByzantinePrior unconstrained() { return {Kind::Unconstrained, 0.5, 0, 1}; }

  // alpha actually used for independent-type priors
  double effective_alpha() const { return kind == Kind::Unconstrained ? 0.5 : alpha; }

  void validate(std::size_t n) const {
    switch (kind) {
      case Kind::IndependentAlpha: require_probability(alpha, "alpha"); break;
      case Kind::FixedCount:
        if (n_b > n) throw ParameterError("n_b exceeds n");
        break;
      case Kind::BoundedMaxEnt:
        if (h < 1 || h > n) throw ParameterError("h must lie in [1,n]");
        break;
      case Kind::Unconstrained: break;
    }
  }

  // Expected number of Byzantines under the prior.
  double expected_count(std::size_t n) const;
};

/// true = Byzantine, everywhere in the library.
using Placement = std::vector<bool>;

struct ReportMatrix {
  std::size_t n = 0, m = 0;
  Bits reports;  // row-major n x m
  StateSequence truth;
  Placement placement;

  ReportMatrix() = default;
  ReportMatrix(std::size_t n_, std::size_t m_) : n(n_), m(m_), reports(n_ * m_, 0) {}

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return reports[i * m + j]; }
  std::uint8_t &operator()(std::size_t i, std::size_t j) { return reports[i * m + j]; }

  // Row i packed into an integer, epoch 0 in the most significant position.
  std::uint64_t packed_row(std::size_t i) const {
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < m; ++j) v = (v << 1) | reports[i * m + j];
    return v;
  }

  std::size_t column_sum(std::size_t j) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += reports[i * m + j];
    return s;
  }
};

inline ReportMatrix from_rows(const std::vector<Bits> &rows) {
  ReportMatrix r(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < r.n; ++i) {
    if (rows[i].size() != r.m) throw ParameterError("ragged report rows");
    for (std::size_t j = 0; j < r.m; ++j) r(i, j) = rows[i][j];
  }
  return r;
}

inline StateSequence sample_states(const StatePrior &prior, std::size_t m, CounterRng &rng) {
  if (m < 1) throw ParameterError("m must be >= 1");
  prior.validate();
  StateSequence s(m);
  s[0] = rng.bernoulli(prior.p1);
  for (std::size_t j = 1; j < m; ++j) {
    if (prior.kind == StatePrior::Kind::IID)
      s[j] = rng.bernoulli(prior.p1);
    else
      s[j] = rng.bernoulli(prior.rho) ? 1 - s[j - 1] : s[j - 1];
  }
  return s;
}

inline StateSequence sample_states(const StatePrior &prior, std::size_t m, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_states(prior, m, rng);
}

inline double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

inline double ByzantinePrior::expected_count(std::size_t n) const {
  switch (kind) {
    case Kind::FixedCount: return static_cast<double>(n_b);
    case Kind::BoundedMaxEnt: {
      double num = 0, den = 0;
      for (std::size_t k = 0; k < h; ++k) {
        double c = binomial_coefficient(n, k);
        num += k * c;
        den += c;
      }
      return num / den;
    }
    default: return effective_alpha() * n;
  }
}

namespace detail {
// Marks a uniformly random k-subset of n (partial Fisher-Yates).
inline Placement random_subset(std::size_t n, std::size_t k, CounterRng &rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Placement out(n, false);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t pick = t + rng.below(n - t);
    std::swap(idx[t], idx[pick]);
    out[idx[t]] = true;
  }
  return out;
}
}  // namespace detail

inline Placement sample_placement(const ByzantinePrior &prior, std::size_t n, CounterRng &rng) {
  prior.validate(n);
  switch (prior.kind) {
    case ByzantinePrior::Kind::FixedCount: return detail::random_subset(n, prior.n_b, rng);
    case ByzantinePrior::Kind::BoundedMaxEnt: {
      // popcount k with probability C(n,k) / sum_{j<h} C(n,j), then a uniform k-subset
      std::vector<double> w(prior.h);
      double total = 0;
      for (std::size_t k = 0; k < prior.h; ++k) total += (w[k] = binomial_coefficient(n, k));
      double u = rng.uniform() * total;
      std::size_t k = 0;
      while (k + 1 < prior.h && u >= w[k]) u -= w[k++];
      return detail::random_subset(n, k, rng);
    }
    default: {
      const double a = prior.effective_alpha();
      Placement out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = rng.bernoulli(a);
      return out;
    }
  }
}

inline Placement sample_placement(const ByzantinePrior &prior, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_placement(prior, n, rng);
}

inline ReportMatrix generate_reports(const StateSequence &states, const Placement &placement,
                                     const LocalChannel &channel, CounterRng &rng) {
  channel.validate();
  const std::size_t n = placement.size(), m = states.size();
  ReportMatrix r(n, m);
  const double eps = channel.epsilon, del = channel.delta();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = placement[i] ? del : eps;
    for (std::size_t j = 0; j < m; ++j) r(i, j) = rng.bernoulli(e) ? 1 - states[j] : states[j];
  }
  r.truth = states;
  r.placement = placement;
  return r;
}

inline ReportMatrix generate_reports(const StateSequence &states, const Placement &placement,
                                     const LocalChannel &channel, std::uint64_t seed) {
  CounterRng rng(seed);
  return generate_reports(states, placement, channel, rng);
}

inline double report_likelihood(int r, int s, bool is_byz, const LocalChannel &channel) {
  const double e = is_byz ? channel.delta() : channel.epsilon;
  return r == s ? 1.0 - e : e;
}

template <class Row>
std::size_t match_count(const Row &row, const StateSequence &states) {
  if (row.size() != states.size()) throw ParameterError("match_count: length mismatch");
  std::size_t c = 0;
  for (std::size_t j = 0; j < states.size(); ++j) c += (row[j] == states[j]);
  return c;
}

inline Bits row_of(const ReportMatrix &r, std::size_t i) {
  return Bits(r.reports.begin() + i * r.m, r.reports.begin() + (i + 1) * r.m);
}

inline Bits complement(Bits b) {
  for (auto &x : b) x ^= 1;
  return b;
}

// Bit errors between a decision and the truth.
inline std::size_t bit_errors(const StateSequence &d, const StateSequence &truth) {
  std::size_t e = 0;
  for (std::size_t j = 0; j < d.size(); ++j) e += d[j] != truth[j];
  return e;
}

}  // namespace byzfuse
