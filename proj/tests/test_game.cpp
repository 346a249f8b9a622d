#include <gtest/gtest.h>

#include <numeric>

#include <byzfuse/game.hpp>
#include <byzfuse/rng.hpp>

using namespace byzfuse;

namespace {

PayoffMatrix scaled(Matrix v, double scale) {
  for (auto &row : v)
    for (auto &x : row) x *= scale;
  auto p = PayoffMatrix::exact(v);
  p.grid = {default_pmal_grid(), default_pmal_grid()};
  return p;
}

// Error-probability tables at m=4, n=20, eps=0.1 (rows attacker p_mal, columns FC guess).
PayoffMatrix independent03() {
  // three entries printed with a stray "e-3" suffix are read as the plain scaled values
  return scaled({{0.845, 0.965, 1.1, 1.3, 1.6, 2.1},
                 {1.2, 1.1, 1.2, 1.5, 1.8, 2.6},
                 {2.2, 2.0, 1.8, 1.8, 2.1, 3.7},
                 {5.4, 5.1, 5.0, 5.0, 5.1, 7.7},
                 {16.2, 16.1, 16.5, 16.4, 16.0, 19.1},
                 {43, 43.1, 46.9, 46.8, 41.6, 34.9}},
                1e-3);
}

PayoffMatrix fixed6() {
  return scaled({{3.80, 3.80, 4.60, 7.60, 12.0, 29.0},
                 {3.60, 3.45, 3.90, 5.20, 8.0, 17.0},
                 {3.45, 2.80, 2.80, 3.10, 4.40, 8.75},
                 {4.10, 2.85, 2.15, 2.05, 2.25, 3.25},
                 {3.55, 2.05, 1.40, 0.95, 0.70, 0.75},
                 {2.05, 0.90, 0.35, 0.15, 0.05, 0.05}},
                1e-4);
}

PayoffMatrix fixed8() {
  return scaled({{1.2, 1.4, 1.9, 3.1, 6.3, 18.9},
                 {1.5, 1.4, 1.4, 2.0, 3.7, 10.0},
                 {1.4, 1.1, 0.945, 1.1, 1.7, 4.0},
                 {1.4, 0.95, 0.715, 0.58, 0.675, 1.2},
                 {2.1, 1.4, 0.995, 0.745, 0.71, 0.78},
                 {7.3, 5.7, 5.3, 3.7, 3.0, 2.9}},
                1e-3);
}

PayoffMatrix random_matrix(CounterRng &rng, std::size_t r, std::size_t c) {
  Matrix v(r, std::vector<double>(c));
  for (auto &row : v)
    for (auto &x : row) x = rng.uniform() * 2 - 1;
  return PayoffMatrix::exact(v);
}

double maxmin(const PayoffMatrix &p) {
  double best = -INFINITY;
  for (const auto &row : p.v) best = std::max(best, *std::min_element(row.begin(), row.end()));
  return best;
}

double minmax(const PayoffMatrix &p) {
  double best = INFINITY;
  for (std::size_t d = 0; d < p.cols(); ++d) {
    double mx = -INFINITY;
    for (std::size_t a = 0; a < p.rows(); ++a) mx = std::max(mx, p.v[a][d]);
    best = std::min(best, mx);
  }
  return best;
}

}  // namespace

TEST(Grid, DefaultAndUniform) {
  EXPECT_EQ(default_pmal_grid(), (std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9, 1.0}));
  const auto g = uniform_grid(0, 8, 0.2);
  EXPECT_EQ(g.size(), 41u);
  EXPECT_DOUBLE_EQ(g.back(), 8.0);
  EXPECT_THROW((StrategyGrid{{0.5, 0.5}, {1}}.validate()), ParameterError);
  EXPECT_THROW((StrategyGrid{{}, {1}}.validate()), ParameterError);
}

TEST(Elimination, PrisonersDilemma) {
  // jail years, so utilities are their negatives; index 0 = Confess, 1 = Deny
  const Matrix years1{{1, 3}, {0, 2}}, years2{{1, 0}, {3, 2}};
  Matrix u1 = years1, u2 = years2;
  for (auto *m : {&u1, &u2})
    for (auto &row : *m)
      for (auto &x : row) x = -x;
  const auto [rows, cols] = eliminate_dominated_bimatrix(u1, u2);
  EXPECT_EQ(rows, (std::vector<std::size_t>{1}));
  EXPECT_EQ(cols, (std::vector<std::size_t>{1}));
}

TEST(Elimination, ConstantMatrixKeepsEverything) {
  const auto el = eliminate_dominated(PayoffMatrix::exact(Matrix(3, std::vector<double>(4, 0.2))));
  EXPECT_EQ(el.rows.size(), 3u);
  EXPECT_EQ(el.cols.size(), 4u);
}

TEST(Elimination, Fixed6PrintedTable) {
  // As printed, the 0.8 row beats 0.5 in the 0.5 column (4.10 > 3.80), so strict
  // elimination stops at rows {0.5, 0.8}. The attacker still plays 0.5 at the
  // equilibrium and the value is the (0.5, 0.5) cell.
  const auto p = fixed6();
  const auto el = eliminate_dominated(p);
  EXPECT_EQ(el.rows, (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(el.cols, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(find_pure_nash(p), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
  const auto eq = equilibrium_of(p);
  EXPECT_NEAR(eq.value, p.v[0][0], 1e-12);
  EXPECT_NEAR(eq.attacker[0], 1.0, 1e-9);
  EXPECT_EQ(support(eq.defender), (std::vector<std::size_t>{0, 1}));
}

TEST(Elimination, NoiseMarginBlocksSpuriousDominance) {
  auto p = PayoffMatrix::exact({{0.10, 0.20}, {0.11, 0.21}});
  EXPECT_EQ(eliminate_dominated(p).rows.size(), 1u);
  p.stderr_ = {{0.01, 0.01}, {0.01, 0.01}};
  EXPECT_EQ(eliminate_dominated(p).rows.size(), 2u);
}

TEST(PureNash, Trivial) {
  EXPECT_EQ(find_pure_nash(PayoffMatrix::exact({{0}})), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_TRUE(find_pure_nash(PayoffMatrix::exact({{1, -1}, {-1, 1}})).empty());
}

TEST(PureNash, Independent03HasUniqueSaddleAtOneOne) {
  const auto p = independent03();
  EXPECT_EQ(find_pure_nash(p), (std::vector<std::pair<std::size_t, std::size_t>>{{5, 5}}));
  const auto el = eliminate_dominated(p);
  EXPECT_EQ(el.rows, (std::vector<std::size_t>{5}));
  EXPECT_EQ(el.cols, (std::vector<std::size_t>{5}));
}

TEST(PureNash, Fixed8HasNone) { EXPECT_TRUE(find_pure_nash(fixed8()).empty()); }

TEST(SolveZeroSum, MatchingPennies) {
  const auto eq = solve_zero_sum(PayoffMatrix::exact({{1, -1}, {-1, 1}}));
  for (double w : eq.attacker) EXPECT_NEAR(w, 0.5, 1e-7);
  for (double w : eq.defender) EXPECT_NEAR(w, 0.5, 1e-7);
  EXPECT_LT(std::abs(eq.value), 1e-9);
  EXPECT_EQ(eq.kind, Equilibrium::Kind::Mixed);
}

TEST(SolveZeroSum, RockPaperScissors) {
  const auto eq = solve_zero_sum(PayoffMatrix::exact({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}}));
  for (double w : eq.attacker) EXPECT_NEAR(w, 1.0 / 3, 1e-7);
  for (double w : eq.defender) EXPECT_NEAR(w, 1.0 / 3, 1e-7);
  EXPECT_LT(std::abs(eq.value), 1e-9);
}

TEST(SolveZeroSum, Fixed8MixedEquilibrium) {
  const auto eq = solve_zero_sum(fixed8());
  EXPECT_EQ(support(eq.attacker), (std::vector<std::size_t>{0, 5}));
  EXPECT_EQ(support(eq.defender), (std::vector<std::size_t>{3, 4}));
  EXPECT_NEAR(eq.attacker[0], 0.179, 0.002);
  EXPECT_NEAR(eq.attacker[5], 0.821, 0.002);
  EXPECT_NEAR(eq.defender[3], 0.846, 0.002);
  EXPECT_NEAR(eq.defender[4], 0.154, 0.002);
  EXPECT_NEAR(eq.value, 3.6e-3, 0.05e-3);
}

TEST(SolveZeroSum, PropertiesOnRandomMatrices) {
  CounterRng rng(6);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_matrix(rng, 6, 6);
    const auto eq = solve_zero_sum(p);
    EXPECT_NEAR(std::accumulate(eq.attacker.begin(), eq.attacker.end(), 0.0), 1.0, 1e-9);
    EXPECT_NEAR(std::accumulate(eq.defender.begin(), eq.defender.end(), 0.0), 1.0, 1e-9);
    EXPECT_GE(eq.value, maxmin(p) - 1e-12);
    EXPECT_LE(eq.value, minmax(p) + 1e-12);
    // certificate
    for (std::size_t d = 0; d < 6; ++d) {
      double s = 0;
      for (std::size_t a = 0; a < 6; ++a) s += eq.attacker[a] * p.v[a][d];
      EXPECT_GE(s, eq.value - 1e-6);
    }
    for (std::size_t a = 0; a < 6; ++a) {
      double s = 0;
      for (std::size_t d = 0; d < 6; ++d) s += p.v[a][d] * eq.defender[d];
      EXPECT_LE(s, eq.value + 1e-6);
    }
    // elimination keeps the support
    const auto el = eliminate_dominated(p);
    for (auto a : support(eq.attacker)) EXPECT_NE(std::find(el.rows.begin(), el.rows.end(), a), el.rows.end());
    for (auto d : support(eq.defender)) EXPECT_NE(std::find(el.cols.begin(), el.cols.end(), d), el.cols.end());
    // shifting the payoff shifts the value only
    auto q = p;
    for (auto &row : q.v)
      for (auto &x : row) x += 3.5;
    const auto eq2 = solve_zero_sum(q);
    EXPECT_NEAR(eq2.value, eq.value + 3.5, 1e-9);
    for (std::size_t a = 0; a < 6; ++a) EXPECT_NEAR(eq2.attacker[a], eq.attacker[a], 1e-7);
    for (std::size_t d = 0; d < 6; ++d) EXPECT_NEAR(eq2.defender[d], eq.defender[d], 1e-7);
  }
}

TEST(SolveZeroSum, SaddlePointValue) {
  const auto p = independent03();
  const auto eq = solve_zero_sum(p);
  EXPECT_NEAR(eq.value, maxmin(p), 1e-12);
  EXPECT_NEAR(eq.value, minmax(p), 1e-12);
  EXPECT_NEAR(eq.value, 0.0349, 1e-12);
  EXPECT_EQ(eq.kind, Equilibrium::Kind::PureNash);
}

TEST(SolveZeroSum, RectangularAndNonFinite) {
  const auto eq = solve_zero_sum(PayoffMatrix::exact({{3, 1, 4}, {1, 5, 9}}));
  EXPECT_GE(eq.value, maxmin(PayoffMatrix::exact({{3, 1, 4}, {1, 5, 9}})));
  EXPECT_THROW(solve_zero_sum(PayoffMatrix::exact({{NAN, 1}, {0, 1}})), ParameterError);
  EXPECT_THROW(solve_zero_sum(PayoffMatrix::exact({})), ParameterError);
}

TEST(Lp, SmallProgram) {
  // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
  const auto s = lp::maximize({{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3}, {3, 2});
  EXPECT_NEAR(s.objective, 11.0, 1e-12);
  EXPECT_NEAR(s.x[0], 3.0, 1e-12);
  EXPECT_NEAR(s.x[1], 1.0, 1e-12);
  // strong duality
  EXPECT_NEAR(4 * s.dual[0] + 6 * s.dual[1] + 3 * s.dual[2], 11.0, 1e-12);
}
