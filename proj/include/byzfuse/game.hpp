#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "lp.hpp"

namespace byzfuse {

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) g.push_back(std::round((lo + k * step) * 1e10) / 1e10);
  return g;
}

inline std::vector<double> default_pmal_grid() { return {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}; }

struct StrategyGrid {
  std::vector<double> attacker, defender;

  void validate() const {
    for (const auto *g : {&attacker, &defender}) {
      if (g->empty()) throw ParameterError("strategy grid must be nonempty");
      for (std::size_t k = 1; k < g->size(); ++k)
        if (!((*g)[k] > (*g)[k - 1])) throw ParameterError("strategy grid must be strictly increasing");
    }
  }
};

/// Zero-sum payoff: the attacker (rows) maximizes, the defender (columns) minimizes.
struct PayoffMatrix {
  StrategyGrid grid;
  Matrix v;
  Matrix stderr_;  // optional per-cell standard error (empty for exact matrices)
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string scenario;

  std::size_t rows() const { return v.size(); }
  std::size_t cols() const { return v.empty() ? 0 : v[0].size(); }

  static PayoffMatrix exact(Matrix v) {
    PayoffMatrix p;
    p.v = std::move(v);
    for (std::size_t a = 0; a < p.rows(); ++a) p.grid.attacker.push_back(double(a));
    for (std::size_t d = 0; d < p.cols(); ++d) p.grid.defender.push_back(double(d));
    return p;
  }
  double sigma(std::size_t a, std::size_t d) const { return stderr_.empty() ? 0.0 : stderr_[a][d]; }
};

struct Equilibrium {
  enum class Kind { PureDominant, PureNash, Mixed };
  Kind kind = Kind::Mixed;
  std::vector<double> attacker, defender;
  double value = 0;
};

struct Elimination {
  std::vector<std::size_t> rows, cols;  // surviving indices into the original matrix
  PayoffMatrix reduced;
};

/// Iterated elimination of strictly dominated strategies in a two-player
/// game where both players maximize their own payoff (u1 rows, u2 columns).
/// A comparison only counts as strict when the gap exceeds tol(...)
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> eliminate_dominated_bimatrix(
    const Matrix &u1, const Matrix &u2, const Matrix &noise = {}) {
  const std::size_t R = u1.size(), C = R ? u1[0].size() : 0;
  auto sd = [&](std::size_t a, std::size_t d) { return noise.empty() ? 0.0 : noise[a][d]; };
  std::vector<std::size_t> rows(R), cols(C);
  for (std::size_t a = 0; a < R; ++a) rows[a] = a;
  for (std::size_t d = 0; d < C; ++d) cols[d] = d;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t x = 0; x < rows.size() && rows.size() > 1; ++x) {
      const std::size_t a = rows[x];
      const bool dominated = std::any_of(rows.begin(), rows.end(), [&](std::size_t b) {
        if (b == a) return false;
        return std::all_of(cols.begin(), cols.end(), [&](std::size_t d) {
          return u1[b][d] > u1[a][d] + 2.0 * std::hypot(sd(a, d), sd(b, d));
        });
      });
      if (dominated) {
        rows.erase(rows.begin() + x);
        changed = true;
        break;
      }
    }
    for (std::size_t y = 0; y < cols.size() && cols.size() > 1; ++y) {
      const std::size_t d = cols[y];
      const bool dominated = std::any_of(cols.begin(), cols.end(), [&](std::size_t e) {
        if (e == d) return false;
        return std::all_of(rows.begin(), rows.end(), [&](std::size_t a) {
          return u2[a][e] > u2[a][d] + 2.0 * std::hypot(sd(a, d), sd(a, e));
        });
      });
      if (dominated) {
        cols.erase(cols.begin() + y);
        changed = true;
        break;
      }
    }
  }
  return {rows, cols};
}

/// Zero-sum elimination; estimated matrices use a 2-sigma margin per comparison.
inline Elimination eliminate_dominated(const PayoffMatrix &p) {
  Matrix neg = p.v;
  for (auto &row : neg)
    for (auto &x : row) x = -x;
  auto [rows, cols] = eliminate_dominated_bimatrix(p.v, neg, p.stderr_);
  Elimination out{rows, cols, {}};
  out.reduced.trials = p.trials;
  out.reduced.seed = p.seed;
  out.reduced.scenario = p.scenario;
  for (auto a : rows) {
    out.reduced.grid.attacker.push_back(p.grid.attacker[a]);
    std::vector<double> row, err;
    for (auto d : cols) {
      row.push_back(p.v[a][d]);
      if (!p.stderr_.empty()) err.push_back(p.stderr_[a][d]);
    }
    out.reduced.v.push_back(row);
    if (!p.stderr_.empty()) out.reduced.stderr_.push_back(err);
  }
  for (auto d : cols) out.reduced.grid.defender.push_back(p.grid.defender[d]);
  return out;
}

/// Saddle points: the attacker cannot gain by switching row within the
/// column, the defender cannot gain by switching column within the row.
inline std::vector<std::pair<std::size_t, std::size_t>> find_pure_nash(const PayoffMatrix &p) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < p.rows(); ++a)
    for (std::size_t d = 0; d < p.cols(); ++d) {
      const double x = p.v[a][d];
      bool ok = true;
      for (std::size_t b = 0; b < p.rows() && ok; ++b) ok = p.v[b][d] <= x;
      for (std::size_t e = 0; e < p.cols() && ok; ++e) ok = p.v[a][e] >= x;
      if (ok) out.emplace_back(a, d);
    }
  return out;
}

namespace detail {
// Optimal strategy of the column player (minimizer) of M, and the game value.
inline std::pair<std::vector<double>, double> minimizer_strategy(const Matrix &M) {
  const std::size_t R = M.size(), C = M[0].size();
  double lo = M[0][0];
  for (const auto &row : M)
    for (double x : row) {
      if (!std::isfinite(x)) throw ParameterError("solve_zero_sum: non-finite payoff");
      lo = std::min(lo, x);
    }
  const double shift = 1.0 - lo;  // makes every entry >= 1
  lp::Matrix A(R, std::vector<double>(C));
  for (std::size_t a = 0; a < R; ++a)
    for (std::size_t d = 0; d < C; ++d) A[a][d] = M[a][d] + shift;
  // max sum x  s.t. A x <= 1: x = q / w with w the shifted game value
  const auto sol = lp::maximize(A, std::vector<double>(R, 1.0), std::vector<double>(C, 1.0));
  if (!(sol.objective > 0)) throw NumericError("solve_zero_sum: degenerate LP optimum");
  const double w = 1.0 / sol.objective;
  std::vector<double> q(C);
  for (std::size_t d = 0; d < C; ++d) q[d] = sol.x[d] * w;
  return {q, w - shift};
}
}  // namespace detail

inline constexpr double kMinimaxAgreement = 1e-7;
inline constexpr double kCertificateTol = 1e-6;

/// Mixed equilibrium of the zero-sum game from two independent LPs.
inline Equilibrium solve_zero_sum(const PayoffMatrix &p) {
  if (p.rows() == 0 || p.cols() == 0) throw ParameterError("solve_zero_sum: empty matrix");
  auto [q, v_def] = detail::minimizer_strategy(p.v);
  Matrix t(p.cols(), std::vector<double>(p.rows()));
  for (std::size_t a = 0; a < p.rows(); ++a)
    for (std::size_t d = 0; d < p.cols(); ++d) t[d][a] = -p.v[a][d];
  auto [pa, v_att_neg] = detail::minimizer_strategy(t);
  const double v_att = -v_att_neg;
  if (std::abs(v_att - v_def) > kMinimaxAgreement * std::max(1.0, std::abs(v_def)))
    throw NumericError("solve_zero_sum: max-min and min-max values disagree");

  Equilibrium eq;
  eq.attacker = pa;
  eq.defender = q;
  eq.value = 0.5 * (v_att + v_def);
  // certificate
  double worst_col = INFINITY, worst_row = -INFINITY;
  for (std::size_t d = 0; d < p.cols(); ++d) {
    double s = 0;
    for (std::size_t a = 0; a < p.rows(); ++a) s += pa[a] * p.v[a][d];
    worst_col = std::min(worst_col, s);
  }
  for (std::size_t a = 0; a < p.rows(); ++a) {
    double s = 0;
    for (std::size_t d = 0; d < p.cols(); ++d) s += p.v[a][d] * q[d];
    worst_row = std::max(worst_row, s);
  }
  if (worst_col < eq.value - kCertificateTol || worst_row > eq.value + kCertificateTol)
    throw NumericError("solve_zero_sum: optimality certificate failed");
  const auto is_pure = [](const std::vector<double> &x) {
    return std::any_of(x.begin(), x.end(), [](double w) { return w > 1 - 1e-9; });
  };
  eq.kind = is_pure(pa) && is_pure(q) ? Equilibrium::Kind::PureNash : Equilibrium::Kind::Mixed;
  return eq;
}

/// Support (indices with weight above tol) of a mixed strategy.
inline std::vector<std::size_t> support(const std::vector<double> &x, double tol = 1e-9) {
  std::vector<std::size_t> s;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] > tol) s.push_back(k);
  return s;
}

/// Equilibrium summary: unique survivor of elimination if any, otherwise the LP solution.
inline Equilibrium equilibrium_of(const PayoffMatrix &p) {
  const auto el = eliminate_dominated(p);
  if (el.rows.size() == 1 && el.cols.size() == 1) {
    Equilibrium eq;
    eq.kind = Equilibrium::Kind::PureDominant;
    eq.attacker.assign(p.rows(), 0.0);
    eq.defender.assign(p.cols(), 0.0);
    eq.attacker[el.rows[0]] = 1;
    eq.defender[el.cols[0]] = 1;
    eq.value = p.v[el.rows[0]][el.cols[0]];
    return eq;
  }
  return solve_zero_sum(p);
}

}  // namespace byzfuse
