#include <gtest/gtest.h>

#include <byzfuse/model.hpp>

using namespace byzfuse;

TEST(SampleStates, ZeroTransitionRepeatsFirstState) {
  EXPECT_EQ(sample_states(StatePrior::markov(0.0, 1.0), 5, 7), (StateSequence{1, 1, 1, 1, 1}));
}

TEST(SampleStates, ForcedAlternation) {
  EXPECT_EQ(sample_states(StatePrior::markov(1.0, 1.0), 4, 7), (StateSequence{1, 0, 1, 0}));
}

TEST(SampleStates, MarkovTransitionFrequency) {
  const auto s = sample_states(StatePrior::markov(0.95), 100000, 11);
  std::size_t switches = 0;
  for (std::size_t j = 1; j < s.size(); ++j) switches += s[j] != s[j - 1];
  EXPECT_NEAR(double(switches) / double(s.size() - 1), 0.95, 0.01);
}

TEST(SampleStates, IidMarginal) {
  const auto s = sample_states(StatePrior::iid(0.3), 100000, 5);
  std::size_t ones = 0;
  for (auto b : s) ones += b;
  EXPECT_NEAR(double(ones) / double(s.size()), 0.3, 0.01);
}

TEST(SampleStates, RejectsBadInput) {
  EXPECT_THROW(sample_states(StatePrior::markov(1.5), 4, 1), ParameterError);
  EXPECT_THROW(sample_states(StatePrior::iid(), 0, 1), ParameterError);
}

TEST(SamplePlacement, Trivial) {
  EXPECT_EQ(sample_placement(ByzantinePrior::fixed(0), 5, 3), Placement(5, false));
  EXPECT_EQ(sample_placement(ByzantinePrior::independent(1.0), 4, 3), Placement(4, true));
}

TEST(SamplePlacement, FixedCountHasExactSize) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto p = sample_placement(ByzantinePrior::fixed(6), 20, s);
    EXPECT_EQ(std::count(p.begin(), p.end(), true), 6);
  }
}

TEST(SamplePlacement, BoundedMaxEntIsUniformOverAdmissible) {
  std::size_t zero = 0, one = 0;
  const std::size_t N = 100000;
  for (std::size_t s = 0; s < N; ++s) {
    const auto p = sample_placement(ByzantinePrior::bounded(2), 3, s);
    const auto k = std::count(p.begin(), p.end(), true);
    ASSERT_LT(k, 2);
    (k == 0 ? zero : one)++;
  }
  EXPECT_NEAR(double(zero) / N, 0.25, 0.01);
  EXPECT_NEAR(double(one) / N, 0.75, 0.01);
}

TEST(SamplePlacement, BoundedNeverReachesH) {
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t h = 1; h <= n; ++h)
      for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = sample_placement(ByzantinePrior::bounded(h), n, s * 131 + h);
        ASSERT_LT(std::size_t(std::count(p.begin(), p.end(), true)), h);
      }
}

TEST(SamplePlacement, RejectsInvalidPrior) {
  EXPECT_THROW(sample_placement(ByzantinePrior::fixed(6), 5, 1), ParameterError);
  EXPECT_THROW(sample_placement(ByzantinePrior::bounded(6), 5, 1), ParameterError);
  EXPECT_THROW(sample_placement(ByzantinePrior::independent(-0.1), 5, 1), ParameterError);
}

TEST(GenerateReports, NoiselessCopiesTruth) {
  const StateSequence s{1, 0, 0, 1, 1};
  Placement p{true, false, true};
  const auto r = generate_reports(s, p, LocalChannel{0.0, 0.0}, 9);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(row_of(r, i), s);
}

TEST(GenerateReports, FullFlipComplements) {
  const StateSequence s{1, 0, 0, 1};
  const auto r = generate_reports(s, Placement(4, true), LocalChannel{0.0, 1.0}, 9);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(row_of(r, i), complement(s));
}

TEST(GenerateReports, HonestMismatchRate) {
  const auto s = sample_states(StatePrior::iid(), 10000, 4);
  Placement p(20, false);
  p[3] = true;
  const auto r = generate_reports(s, p, LocalChannel{0.1, 1.0}, 8);
  const double honest = 1.0 - double(match_count(row_of(r, 0), s)) / 10000.0;
  const double byz = 1.0 - double(match_count(row_of(r, 3), s)) / 10000.0;
  EXPECT_NEAR(honest, 0.1, 0.01);
  EXPECT_NEAR(byz, 0.9, 0.01);
}

TEST(GenerateReports, SameSeedSameOutput) {
  const auto s = sample_states(StatePrior::markov(0.9), 30, 1);
  const auto p = sample_placement(ByzantinePrior::independent(0.3), 25, 2);
  EXPECT_EQ(generate_reports(s, p, LocalChannel{0.2, 0.7}, 3).reports,
            generate_reports(s, p, LocalChannel{0.2, 0.7}, 3).reports);
  EXPECT_EQ(sample_placement(ByzantinePrior::bounded(9), 25, 4), sample_placement(ByzantinePrior::bounded(9), 25, 4));
}

TEST(ReportLikelihood, Examples) {
  EXPECT_DOUBLE_EQ(report_likelihood(1, 1, false, {0.1, 1.0}), 0.9);
  EXPECT_NEAR(report_likelihood(0, 1, true, {0.1, 1.0}), 0.9, 1e-15);
  EXPECT_NEAR(report_likelihood(1, 1, true, {0.15, 0.5}), 0.5, 1e-15);
}

TEST(ReportLikelihood, SumsToOne) {
  for (double eps : {0.0, 0.1, 0.37})
    for (double pm : {0.0, 0.5, 0.8, 1.0})
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
          for (bool b : {false, true})
            EXPECT_NEAR(report_likelihood(r, s, b, {eps, pm}) + report_likelihood(1 - r, s, b, {eps, pm}), 1.0, 1e-15);
}

TEST(LocalChannel, DeltaIdentities) {
  for (double eps : {0.0, 0.1, 0.25, 0.49}) {
    EXPECT_NEAR((LocalChannel{eps, 0.5}.delta()), 0.5, 1e-15);
    EXPECT_NEAR((LocalChannel{eps, 1.0}.delta()), 1 - eps, 1e-15);
  }
}

TEST(MatchCount, Examples) {
  const StateSequence s{1, 1, 1, 0};
  EXPECT_EQ(match_count(s, s), 4u);
  EXPECT_EQ(match_count(complement(s), s), 0u);
  EXPECT_EQ(match_count(Bits{1, 0, 1, 1}, s), 2u);
  EXPECT_THROW(match_count(Bits{1, 0}, s), ParameterError);
}

TEST(ByzantinePrior, ExpectedCount) {
  EXPECT_DOUBLE_EQ(ByzantinePrior::independent(0.3).expected_count(20), 6.0);
  EXPECT_DOUBLE_EQ(ByzantinePrior::fixed(8).expected_count(20), 8.0);
  EXPECT_DOUBLE_EQ(ByzantinePrior::unconstrained().expected_count(20), 10.0);
  // h=2, n=3: popcount 0 w.p. 1/4, 1 w.p. 3/4
  EXPECT_NEAR(ByzantinePrior::bounded(2).expected_count(3), 0.75, 1e-12);
}
