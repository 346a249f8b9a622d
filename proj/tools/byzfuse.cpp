#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <byzfuse/harness/config.hpp>
#include <byzfuse/harness/record.hpp>
#include <byzfuse/harness/scenarios.hpp>

namespace fs = std::filesystem;
using namespace byzfuse;
using namespace byzfuse::harness;

#ifndef BYZFUSE_CONFIG_DIR
#define BYZFUSE_CONFIG_DIR "configs"
#endif

static fs::path config_dir() {
  if (const char *env = std::getenv("BYZFUSE_CONFIG_DIR")) return env;
  return BYZFUSE_CONFIG_DIR;
}

// A bare name resolves against the bundled config directory.
static fs::path resolve_config(const std::string &arg) {
  fs::path p(arg);
  if (fs::exists(p)) return p;
  auto bundled = config_dir() / p;
  if (!bundled.has_extension()) bundled += ".json";
  if (fs::exists(bundled)) return bundled;
  throw ConfigError("no config file '" + arg + "' (looked in " + config_dir().string() + ")");
}

static void print_equilibrium(const ResultTable &t, const Equilibrium &e) {
  std::cout << "equilibrium: " << kind_name(e.kind) << ", value " << format_double(e.value) << "\n  attacker:";
  for (std::size_t a = 0; a < e.attacker.size(); ++a)
    if (e.attacker[a] > 1e-9) std::cout << ' ' << t.row_names[a] << '=' << e.attacker[a];
  std::cout << "\n  defender:";
  for (std::size_t d = 0; d < e.defender.size(); ++d)
    if (e.defender[d] > 1e-9) std::cout << ' ' << t.col_names[d] << '=' << e.defender[d];
  std::cout << '\n';
}

int main(int argc, char **argv) {
  CLI::App app{"Byzantine-resilient distributed detection experiments"};
  app.require_subcommand(1);

  std::string config, out = "out", csv_path, kind, json_path;
  std::uint64_t seed = 0, trials = 0;
  unsigned threads = 0;
  std::vector<std::string> kinds;

  auto *run = app.add_subcommand("run", "run an experiment config, write CSV + JSON sidecar");
  run->add_option("--config,-c", config, "config file or bundled config name")->required();
  run->add_option("--seed", seed, "override master seed");
  run->add_option("--trials", trials, "override trial count");
  run->add_option("--threads", threads, "worker threads (default: $BYZFUSE_THREADS or all cores)");
  run->add_option("--out,-o", out, "output directory");
  run->add_option("--plot", kinds, "also emit these series (roc, delta_sweep, alpha_sweep, m_sweep)");

  auto *solve = app.add_subcommand("solve", "equilibrium of an existing payoff CSV");
  solve->add_option("csv", csv_path, "payoff CSV")->required()->check(CLI::ExistingFile);

  auto *plot = app.add_subcommand("plot-data", "run a config and write one x,y series as CSV");
  plot->add_option("--config,-c", config, "config file or bundled config name")->required();
  plot->add_option("--kind,-k", kind, "roc | delta_sweep | alpha_sweep | m_sweep")->required();
  plot->add_option("--seed", seed, "override master seed");
  plot->add_option("--trials", trials, "override trial count");
  plot->add_option("--threads", threads, "worker threads");
  plot->add_option("--out,-o", out, "output directory");

  auto *list = app.add_subcommand("list-configs", "list bundled configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::vector<fs::path> files;
      for (const auto &e : fs::directory_iterator(config_dir()))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto &f : files) {
        const auto c = load_config(f.string());
        std::cout << f.stem().string() << "  [" << c.scenario << "]  " << c.description << '\n';
      }
      return 0;
    }
    if (*solve) {
      std::ifstream in(csv_path);
      const auto table = parse_table_csv(in);
      const auto p = to_payoff(table);
      const auto el = eliminate_dominated(p);
      std::cout << "surviving rows:";
      for (auto a : el.rows) std::cout << ' ' << table.row_names[a];
      std::cout << "\nsurviving cols:";
      for (auto d : el.cols) std::cout << ' ' << table.col_names[d];
      std::cout << "\npure saddle points:";
      for (auto [a, d] : find_pure_nash(p)) std::cout << " (" << table.row_names[a] << ',' << table.col_names[d] << ')';
      std::cout << '\n';
      print_equilibrium(table, equilibrium_of(p));
      return 0;
    }
    auto cfg = load_config(resolve_config(config).string());
    if (seed) cfg.seed = seed;
    if (trials) cfg.trials = trials;
    if (threads) cfg.threads = threads;
    const auto rec = run_experiment(cfg, *run ? out : std::string{});
    if (*plot) {
      std::cout << emit_plot_data(rec, kind, out).string() << '\n';
      return 0;
    }
    for (const auto &k : kinds) std::cout << "wrote " << emit_plot_data(rec, k, out).string() << '\n';
    std::cout << cfg.name << " [" << cfg.scenario << "] hash " << rec.config_hash << ", " << cfg.trials
              << " trials, " << rec.wall_seconds << " s\n";
    write_table_csv(std::cout, rec.table);
    if (rec.equilibrium) print_equilibrium(rec.table, *rec.equilibrium);
    if (rec.degenerate) std::cout << "degenerate trials: " << rec.degenerate << '\n';
    if (rec.disconnected) std::cout << "disconnected trials: " << rec.disconnected << '\n';
    std::cout << "wrote " << (fs::path(out) / (cfg.name + ".csv")).string() << '\n';
  } catch (const CapacityError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
