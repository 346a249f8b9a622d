#include <gtest/gtest.h>

#include <byzfuse/harness/scenarios.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace byzfuse;
using namespace byzfuse::harness;

namespace {

const std::string kConfigDir = BYZFUSE_CONFIG_DIR;

ExperimentConfig bundled(const std::string &name) { return load_config(kConfigDir + "/" + name + ".json"); }

std::string parse_error(const std::string &text) {
  try {
    from_json(Json::parse(text));
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("byzfuse_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig small_optimal() {
  ExperimentConfig c;
  c.name = "small_optimal";
  c.scenario = "optimal_game";
  c.n = 8;
  c.m = 3;
  c.byz = ByzantinePrior::independent(0.3);
  c.attacker_grid = {0.5, 1.0};
  c.defender_grid = {0.5, 1.0};
  c.trials = 3000;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(Config, ErrorsCarryFieldPath) {
  EXPECT_NE(parse_error(R"({"scenario": "bogus"})").find("config.scenario"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n": "twenty"})").find("config.n"), std::string::npos);
  EXPECT_NE(parse_error(R"({"isolation": {"levels": -3}})").find("config.isolation.levels"), std::string::npos);
  EXPECT_NE(parse_error(R"({"consensus": {"delta": {"step": "x"}}})").find("config.consensus.delta"), std::string::npos);
  EXPECT_NE(parse_error("[1, 2]").find("config"), std::string::npos);
}

TEST(Config, DefaultsAreMaterialized) {
  const auto c = from_json(Json::parse(R"({"name": "bare", "scenario": "optimal_game"})"));
  const auto j = to_json(c);
  for (const char *key : {"n", "m", "epsilon", "state_prior", "byzantine_prior", "attacker_grid", "trials", "seed",
                          "error_metric", "isolation", "mp", "consensus"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["error_metric"], "per_bit");
  // round trip is a fixed point
  EXPECT_EQ(to_json(from_json(j)), j);
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  auto c = small_optimal();
  const auto h = config_hash(c);
  EXPECT_EQ(config_hash(c), h);
  c.threads = 7;
  c.output = "elsewhere";
  EXPECT_EQ(config_hash(c), h);
  c.seed = 18;
  EXPECT_NE(config_hash(c), h);
}

TEST(Config, BundledConfigsLoad) {
  std::size_t count = 0;
  for (const auto &e : std::filesystem::directory_iterator(kConfigDir)) {
    if (e.path().extension() != ".json") continue;
    ++count;
    ExperimentConfig c;
    ASSERT_NO_THROW(c = load_config(e.path().string())) << e.path();
    EXPECT_EQ(c.name, e.path().stem().string());
    EXPECT_FALSE(c.description.empty()) << e.path();
  }
  EXPECT_GE(count, 10u);
  EXPECT_THROW(load_config(kConfigDir + "/does_not_exist.json"), ConfigError);
}

TEST(Record, TableCsvRoundTrip) {
  ResultTable t;
  t.row_names = {"0.5", "1"};
  t.col_names = {"0.5", "0.6", "1"};
  t.resize(2, 3);
  t.values = {{0.1, 1.0 / 3, 2e-17}, {0.25, 0.5, 0.75}};
  t.stderr_ = {{1e-3, 2e-3, 3e-3}, {4e-3, 5e-3, 6e-3}};
  t.trials = {{10, 20, 30}, {40, 50, 60}};
  std::istringstream is(table_csv(t));
  EXPECT_EQ(parse_table_csv(is), t);
  const auto p = to_payoff(t);
  EXPECT_EQ(p.grid.defender, (std::vector<double>{0.5, 0.6, 1.0}));
  EXPECT_EQ(p.v, t.values);
}

TEST(Record, SeriesCsvRoundTrip) {
  Series s;
  s.x_label = "delta";
  s.x = {0, 2, 4};
  s.add_column("a");
  s.add_column("b");
  s.y = {{0.1, 0.2, 0.3}, {1.0 / 7, 0, 1}};
  std::stringstream ss;
  write_series_csv(ss, s);
  const auto back = parse_series_csv(ss);
  EXPECT_EQ(back.x_label, s.x_label);
  EXPECT_EQ(back.y_labels, s.y_labels);
  EXPECT_EQ(back.x, s.x);
  EXPECT_EQ(back.y, s.y);
}

TEST(Record, MalformedCsvRejected) {
  std::istringstream bad("section,attacker\\defender,0.5\nvalue,0.5,abc\n");
  EXPECT_ANY_THROW(parse_table_csv(bad));
}

TEST(Scenario, DegenerateOneByOne) {
  auto c = small_optimal();
  c.epsilon = 0;
  c.byz = ByzantinePrior::independent(0);
  c.attacker_grid = {1.0};
  c.defender_grid = {1.0};
  c.trials = 200;
  const auto rec = run_experiment(c);
  ASSERT_EQ(rec.table.rows(), 1u);
  ASSERT_EQ(rec.table.cols(), 1u);
  EXPECT_EQ(rec.table.values[0][0], 0.0);
  ASSERT_TRUE(rec.equilibrium);
  EXPECT_EQ(rec.equilibrium->value, 0.0);
}

TEST(Scenario, SingleTrialIsReproducible) {
  auto c = small_optimal();
  c.trials = 1;
  const auto a = scratch("single_a"), b = scratch("single_b");
  run_experiment(c, a.string());
  run_experiment(c, b.string());
  EXPECT_EQ(slurp(a / "small_optimal.csv"), slurp(b / "small_optimal.csv"));
  EXPECT_TRUE(std::filesystem::exists(a / "small_optimal.json"));
}

TEST(Scenario, ThreadCountDoesNotChangeResults) {
  auto c = small_optimal();
  c.trials = 2000;
  c.threads = 1;
  const auto one = table_csv(run_experiment(c).table);
  c.threads = 4;
  EXPECT_EQ(table_csv(run_experiment(c).table), one);
  c.seed = 18;
  EXPECT_NE(table_csv(run_experiment(c).table), one);
}

TEST(Scenario, SidecarMetadata) {
  const auto dir = scratch("sidecar");
  const auto c = small_optimal();
  run_experiment(c, dir.string());
  const auto j = Json::parse(slurp(dir / "small_optimal.json"));
  EXPECT_EQ(j["config_hash"], config_hash(c));
  EXPECT_EQ(j["seed"], 17);
  EXPECT_EQ(j["trials"], 3000);
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_TRUE(j.contains("equilibrium"));
  EXPECT_EQ(from_json(j["config"]).name, "small_optimal");
}

TEST(Scenario, MissingSeriesIsAnError) {
  const auto rec = run_experiment(small_optimal());
  try {
    emit_plot_data(rec, "roc", scratch("missing"));
    FAIL() << "expected an error";
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("roc"), std::string::npos);
  }
}

TEST(Scenario, RocIsMonotone) {
  auto c = bundled("isolation_hard_m4");
  c.trials = 2000;
  c.attacker_grid = {1.0};
  const auto rec = run_experiment(c);
  const auto &roc = rec.series.at("roc");
  ASSERT_EQ(roc.y_labels, (std::vector<std::string>{"p_iso_honest", "p_iso_byzantine"}));
  for (std::size_t k = 1; k < roc.x.size(); ++k) {
    EXPECT_GE(roc.y[0][k], roc.y[0][k - 1]);
    EXPECT_GE(roc.y[1][k], roc.y[1][k - 1]);
  }
  const auto path = emit_plot_data(rec, "roc", scratch("roc"));
  std::ifstream is(path);
  EXPECT_EQ(parse_series_csv(is).x, roc.x);
}

TEST(Scenario, DeltaSweepMatchesAnalytic) {
  auto c = bundled("consensus_cdd");
  c.trials = 200;
  c.cons.delta = {0, 2, 1};
  c.cons.eta = {0, 2, 1};
  c.cons.sweep_trials = 20000;
  c.cons.mu = 2.5;
  const auto rec = run_experiment(c);
  const auto &s = rec.series.at("delta_sweep");
  for (std::size_t g = 0; g < s.x.size(); ++g) {
    const double p = s.y[2][g];
    const double tol = 4 * std::sqrt(std::max(p * (1 - p), 1e-6) / 20000.0) + 1e-4;
    EXPECT_NEAR(s.y[0][g], p, tol) << "delta " << s.x[g];
  }
  EXPECT_FALSE(rec.edge_list.empty());
}

TEST(Scenario, MessagePassingBeatsMajorityOnMarkovStates) {
  auto c = bundled("mp_markov_m30");
  c.trials = 400;
  c.mp.values = {0.2, 0.35};
  const auto rec = run_experiment(c);
  const auto &t = rec.table;
  ASSERT_EQ(t.col_names, (std::vector<std::string>{"mp@1", "majority@1"}));
  for (std::size_t a = 0; a < t.rows(); ++a) EXPECT_LT(t.values[a][0], t.values[a][1]) << t.row_names[a];
  EXPECT_TRUE(rec.series.count("alpha_sweep"));
}

TEST(Scenario, ConsensusPayoffIsStepwiseInEta) {
  // with Delta below the honest spread censoring never helps much; far above it, eta between them blocks it
  auto c = bundled("consensus_cdd");
  c.trials = 3000;
  c.cons.delta = {6, 6, 1};
  c.cons.eta = {0, 8, 0.5};
  c.cons.sweep_trials = 10;
  const auto rec = run_experiment(c);
  const auto &row = rec.table.values[0];
  EXPECT_NEAR(row.front(), 0.5, 0.05);        // everything censored
  EXPECT_LT(row[10], row.back());             // eta = 5 removes the attackers, eta = 8 keeps them
}
