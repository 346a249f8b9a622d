#include <gtest/gtest.h>

#include <byzfuse/fusion.hpp>
#include <byzfuse/rng.hpp>

using namespace byzfuse;

TEST(Vote, Examples) {
  EXPECT_EQ(vote(VotingRule::any(), std::vector<int>{0, 0, 0, 1}), 1);
  EXPECT_EQ(vote(VotingRule::all(), std::vector<int>{1, 1, 0}), 0);
  std::vector<int> col(20, 0);
  std::fill(col.begin(), col.begin() + 10, 1);
  EXPECT_EQ(vote(VotingRule::k_out_of_n(10), col), 1);
}

TEST(Vote, MajorityTieDecidesZero) {
  EXPECT_EQ(vote(VotingRule::majority(), std::vector<int>{1, 1, 0, 0}), 0);
  EXPECT_EQ(vote(VotingRule::majority(), std::vector<int>{1, 1, 1, 0}), 1);
}

TEST(Vote, MajorityFlipsUnderComplementOddN) {
  CounterRng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> c(7), nc(7);
    for (std::size_t i = 0; i < 7; ++i) nc[i] = 1 - (c[i] = rng.bernoulli(0.5));
    EXPECT_NE(vote(VotingRule::majority(), c), vote(VotingRule::majority(), nc));
  }
}

TEST(AnalyticPerformance, Examples) {
  EXPECT_NEAR(analytic_performance(VotingRule::all(), NodePerformance::homogeneous(2, 0.8, 0.1)).first, 0.64, 1e-15);
  EXPECT_NEAR(analytic_performance(VotingRule::any(), NodePerformance::homogeneous(1, 0.8, 0.2)).second, 0.2, 1e-15);
  EXPECT_NEAR(analytic_performance(VotingRule::k_out_of_n(2), NodePerformance::homogeneous(3, 0.9, 0.1)).first,
              3 * 0.81 * 0.1 + 0.729, 1e-12);
}

TEST(AnalyticPerformance, HeterogeneousKOutOfNUnsupported) {
  NodePerformance p{{0.8, 0.9, 0.7}, {0.1, 0.1, 0.1}};
  EXPECT_THROW(analytic_performance(VotingRule::k_out_of_n(2), p), UnsupportedInput);
  EXPECT_NO_THROW(analytic_performance(VotingRule::all(), p));
}

TEST(AnalyticPerformance, OrDetectsAtLeastAsOftenAsAnd) {
  for (std::size_t n = 2; n < 8; ++n)
    for (double pd : {0.1, 0.5, 0.9}) {
      const auto perf = NodePerformance::homogeneous(n, pd, 0.2);
      EXPECT_GE(analytic_performance(VotingRule::any(), perf).first, analytic_performance(VotingRule::all(), perf).first);
    }
}

TEST(AnalyticPerformance, MatchesMonteCarlo) {
  const std::size_t n = 9, T = 100000;
  const double pd = 0.7;
  for (const auto &rule : {VotingRule::all(), VotingRule::any(), VotingRule::majority(), VotingRule::k_out_of_n(3)}) {
    const double qd = analytic_performance(rule, NodePerformance::homogeneous(n, pd, 0.1)).first;
    CounterRng rng(17);
    std::size_t hits = 0;
    std::vector<int> col(n);
    for (std::size_t t = 0; t < T; ++t) {
      for (auto &b : col) b = rng.bernoulli(pd);
      hits += vote(rule, col);
    }
    const double sigma = std::sqrt(qd * (1 - qd) / T);
    EXPECT_NEAR(double(hits) / T, qd, 3 * sigma + 1e-12);
  }
}

TEST(ChairVarshney, Examples) {
  EXPECT_EQ(chair_varshney(std::vector<int>{1, 1, 0}, NodePerformance::homogeneous(3, 0.8, 0.2), 0.0), 1);
  EXPECT_EQ(chair_varshney(std::vector<int>{1}, NodePerformance::homogeneous(1, 0.9, 0.1), 0.0), 1);
  // single symmetric node with u=0 against threshold log(1/9): statistic equals it exactly
  EXPECT_EQ(chair_varshney(std::vector<int>{0}, NodePerformance::homogeneous(1, 0.9, 0.1), std::log((1 - 0.9) / (1 - 0.1))), 1);
}

TEST(ChairVarshney, MatchesBruteForcePosterior) {
  CounterRng rng(99);
  NodePerformance perf;
  for (int i = 0; i < 5; ++i) {
    perf.p_d.push_back(0.55 + 0.4 * rng.uniform());
    perf.p_fa.push_back(0.05 + 0.4 * rng.uniform());
  }
  const double prior0 = 0.4;
  for (int c = 0; c < 32; ++c) {
    std::vector<int> col(5);
    double l1 = 1 - prior0, l0 = prior0;
    for (int i = 0; i < 5; ++i) {
      col[i] = (c >> i) & 1;
      l1 *= col[i] ? perf.p_d[i] : 1 - perf.p_d[i];
      l0 *= col[i] ? perf.p_fa[i] : 1 - perf.p_fa[i];
    }
    EXPECT_EQ(chair_varshney(col, perf, std::log(prior0 / (1 - prior0))), l1 >= l0 ? 1 : 0) << c;
  }
}

TEST(ChairVarshney, SymmetricReducesToMajority) {
  const auto perf = NodePerformance::homogeneous(6, 0.8, 0.2);
  for (int c = 0; c < 64; ++c) {
    std::vector<int> col(6);
    int ones = 0;
    for (int i = 0; i < 6; ++i) ones += col[i] = (c >> i) & 1;
    if (2 * ones == 6) continue;
    EXPECT_EQ(chair_varshney(col, perf, 0.0), vote(VotingRule::majority(), col));
  }
}

TEST(OptimalIntermediateThreshold, Examples) {
  EXPECT_NEAR(optimal_intermediate_threshold(0.2, 0.8, 100, 0.5), 50.0, 1e-9);
  EXPECT_NEAR(optimal_intermediate_threshold(0.2, 0.8, 20, 0.5), 10.0, 1e-9);
  // ln(0.9/0.3)^10 / ln(0.7*0.9/(0.1*0.3)) evaluated by hand
  const double expect = 10 * std::log(3.0) / std::log(21.0);
  EXPECT_NEAR(optimal_intermediate_threshold(0.1, 0.7, 10, 0.5), expect, 1e-12);
  EXPECT_THROW(optimal_intermediate_threshold(0.3, 0.3, 10, 0.5), DomainError);
}
