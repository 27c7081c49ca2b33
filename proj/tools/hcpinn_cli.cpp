// hcpinn: train, compare and time PINN runs for 1D Neumann diffusion.
//
//   hcpinn run configs/desk/low_frequency_new_hc.ini --out results
//   hcpinn suite configs/desk --reference best_soft --out results
//   hcpinn probe configs/desk/low_frequency_soft.ini --warmup 5 --iters 20
//   hcpinn oracle --problem multiscale --out results

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hcpinn/alloc.hpp"
#include "hcpinn/checkpoint.hpp"
#include "hcpinn/harness.hpp"
#include "hcpinn/io.hpp"
#include "hcpinn/oracle.hpp"

namespace fs = std::filesystem;
using namespace hcpinn;

namespace {

struct Common {
  bool full_scale = false;
  std::string out = ".";
  std::vector<std::string> seed_overrides;
  bool quiet = false;
};

RunConfig prepare(const fs::path& path, const Common& common) {
  auto c = load_config(path);
  if (common.full_scale) apply_full_scale(c);
  for (const auto& kv : common.seed_overrides) apply_seed_override(c, kv);
  c.validate();
  return c;
}

RunOptions options_for(const Common& common, const std::string& label) {
  RunOptions o;
  if (!common.quiet) {
    o.progress = [label](std::size_t it, const LossBreakdown& l) {
      std::cerr << label << " iter " << it << " loss " << format_double(l.total) << " (pde "
                << format_double(l.pde) << ", ic " << format_double(l.ic) << ", bc " << format_double(l.bc)
                << ")\n";
    };
  }
  return o;
}

void write_run_outputs(const RunMetrics& m, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  write_text(dir / (stem + ".history.csv"), emit_history_csv(m.history));
  save_checkpoint(m.best_params, dir / (stem + ".ckpt"));
}

void report(const RunMetrics& m, const std::string& label) {
  std::cout << label << ": iters " << m.iterations << ", best loss " << format_double(m.best_loss) << " @ "
            << m.best_loss_iteration << ", rel L2 " << format_double(m.rel_l2) << ", " << format_double(m.ms_per_iter)
            << " ms/iter";
  if (m.diverged) std::cout << ", DIVERGED: " << m.divergence;
  std::cout << '\n';
}

int cmd_run(const std::string& config_path, const Common& common) {
  const auto c = prepare(config_path, common);
  const std::string stem = fs::path(config_path).stem().string();
  const auto m = run(c, options_for(common, stem));
  write_run_outputs(m, common.out, stem);
  write_text(fs::path(common.out) / (stem + ".metrics.csv"), emit_metrics_csv({metrics_row(m)}));
  report(m, stem);
  return m.diverged ? 2 : 0;
}

int cmd_suite(const std::string& dir, const std::string& rule_name, bool fixed_time, const Common& common) {
  const auto rule = reference_rule_from_string(rule_name);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ini") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw ConfigError("no .ini configs in " + dir);

  std::vector<RunConfig> configs;
  for (const auto& p : paths) configs.push_back(prepare(p, common));

  if (fixed_time) {
    // Every run gets the wall-clock time of the first soft, embedding-free run.
    auto ref = std::find_if(configs.begin(), configs.end(), [](const RunConfig& c) {
      return c.strategy == Strategy::soft && c.embedding == EmbeddingKind::identity;
    });
    if (ref == configs.end()) throw ConfigError("fixed-time mode needs a soft run without embedding");
    const double budget = fixed_time_budget(*ref);
    std::cout << "fixed wall-clock budget: " << format_double(budget) << " s\n";
    for (auto& c : configs) {
      c.iterations.reset();
      c.wall_clock_seconds = budget;
    }
  }

  std::vector<RunMetrics> runs;
  bool any_diverged = false;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string stem = paths[i].stem().string();
    auto m = run(configs[i], options_for(common, stem));
    write_run_outputs(m, common.out, stem);
    report(m, stem);
    any_diverged = any_diverged || m.diverged;
    runs.push_back(std::move(m));
  }
  runs = compare_suite(std::move(runs), rule);
  std::vector<MetricsRow> rows;
  for (const auto& m : runs) rows.push_back(metrics_row(m));
  write_text(fs::path(common.out) / "metrics.csv", emit_metrics_csv(rows));
  std::cout << emit_metrics_csv(rows);
  return any_diverged ? 2 : 0;
}

int cmd_probe(const std::string& config_path, std::size_t warmup, std::size_t iters, const Common& common) {
  const auto c = prepare(config_path, common);
  const double ms = timing_probe(c, warmup, iters);
  std::cout << fs::path(config_path).stem().string() << ": " << format_double(ms) << " ms/iter\n";
  return 0;
}

int cmd_oracle(const std::string& problem, std::size_t nx, std::size_t nt, std::size_t terms, const Common& common) {
  const auto sol = series_solution(builtin_problem(problem), terms);
  fs::create_directories(common.out);
  const auto path = fs::path(common.out) / (problem + ".oracle.csv");
  write_oracle_csv(sol, EvalGrid(nx, nt), path);
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"PINN solver for 1D diffusion with Neumann boundary conditions"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_flag("--paper-scale", common.full_scale, "Use the 3x100 network, full collocation counts and 1e6 iterations");
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--seed-override", common.seed_overrides, "Override a seed: weights=K, collocation=K, frequencies=K");
  app.add_flag("-q,--quiet", common.quiet, "No progress output");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Train one configuration");
  run_cmd->add_option("config", config_path, "Config file (.ini)")->required()->check(CLI::ExistingFile);

  std::string suite_dir;
  std::string rule = "best_soft";
  bool fixed_time = false;
  auto* suite_cmd = app.add_subcommand("suite", "Train every config in a directory and compare");
  suite_cmd->add_option("dir", suite_dir, "Directory of .ini configs")->required()->check(CLI::ExistingDirectory);
  suite_cmd->add_option("--reference", rule, "Reference rule: best_soft or soft_identity")->capture_default_str();
  suite_cmd->add_flag("--fixed-time", fixed_time, "Give every run the wall-clock time of the soft baseline");

  std::size_t warmup = 5;
  std::size_t iters = 20;
  auto* probe_cmd = app.add_subcommand("probe", "Measure ms per training iteration");
  probe_cmd->add_option("config", config_path, "Config file (.ini)")->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--warmup", warmup, "Untimed iterations")->capture_default_str();
  probe_cmd->add_option("--iters", iters, "Timed iterations (>= 10)")->capture_default_str();

  std::string problem = "low_frequency";
  std::size_t nx = 256;
  std::size_t nt = 101;
  std::size_t terms = 200;
  auto* oracle_cmd = app.add_subcommand("oracle", "Write the analytic solution on a grid as CSV");
  oracle_cmd->add_option("--problem", problem, "Built-in problem name")->capture_default_str();
  oracle_cmd->add_option("--nx", nx)->capture_default_str();
  oracle_cmd->add_option("--nt", nt)->capture_default_str();
  oracle_cmd->add_option("--terms", terms, "Series truncation")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(config_path, common);
    if (*suite_cmd) return cmd_suite(suite_dir, rule, fixed_time, common);
    if (*probe_cmd) return cmd_probe(config_path, warmup, iters, common);
    if (*oracle_cmd) return cmd_oracle(problem, nx, nt, terms, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
