// semrate: command-line front end for the semantic-rate simulator.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "semrate/semrate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool trace = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "Run configuration file (INI)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory (default: config `out`, else stdout)");
  cmd->add_option("--seed", f.seed, "Master seed, overrides the config file");
  cmd->add_option("--jobs", f.jobs, "Parallel simulations")->check(CLI::Range(1u, 1024u));
}

// Writes to <dir>/<name> when an output directory is set, else to stdout.
class Sink {
 public:
  Sink(const std::string& dir, const std::string& name) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    path_ = std::filesystem::path(dir) / name;
  }

  std::ostream& stream() { return path_ ? buffer_ : std::cout; }

  void commit() {
    if (!path_) return;
    std::ofstream f(*path_, std::ios::binary | std::ios::trunc);
    f << buffer_.str();
    if (!f) throw std::runtime_error("cannot write " + path_->string());
  }

 private:
  std::optional<std::filesystem::path> path_;
  std::ostringstream buffer_;
};

semrate::RunConfig load(const CommonFlags& f) {
  auto cfg = semrate::load_run_config(f.config);
  if (f.seed) cfg.sim.seed = *f.seed;
  return cfg;
}

std::string out_dir(const CommonFlags& f, const semrate::RunConfig& cfg) {
  return f.out.empty() ? cfg.out_dir : f.out;
}

int cmd_simulate(const CommonFlags& f) {
  const auto cfg = load(f);
  if (!cfg.simulate) throw semrate::ConfigError("simulate", "section is required for `simulate`");
  const auto& s = *cfg.simulate;
  semrate::SimConfig sim = cfg.sim;
  sim.lambda = s.lambda;
  semrate::RunOptions opts;
  opts.record_trace = f.trace;
  opts.record_updates = f.trace;
  const auto res = semrate::run(sim, s.policy, cfg.curve, s.epsilon, opts);

  const auto dir = out_dir(f, cfg);
  Sink metrics(dir, "metrics.csv");
  metrics.stream() << semrate::csv::kMetricsHeader << '\n';
  semrate::csv::write_metrics_row(metrics.stream(), s.lambda, s.epsilon, s.policy, sim.seed, res.metrics);
  metrics.commit();
  if (f.trace) {
    const auto trace_dir = dir.empty() ? std::string(".") : dir;
    Sink trace(trace_dir, "trace.csv");
    semrate::csv::write_trace(trace.stream(), res.trace);
    trace.commit();
    Sink ledger(trace_dir, "ledger.csv");
    semrate::csv::write_ledger(ledger.stream(), res.updates);
    ledger.commit();
  }
  return kExitOk;
}

std::vector<semrate::LoadCurveCell> run_sweep(const CommonFlags& f, const semrate::RunConfig& cfg) {
  if (!cfg.sweep) throw semrate::ConfigError("sweep", "section is required");
  const auto& s = *cfg.sweep;
  semrate::LoadCurveSpec spec;
  spec.lambdas = s.lambdas;
  spec.epsilons = s.epsilons;
  spec.policies = s.policies;
  spec.v_grid = s.v_grid;
  spec.base = cfg.sim;
  spec.plan = {cfg.sim.seed, s.seeds};
  spec.objective = s.objective;
  return semrate::trace_load_curve(spec, cfg.curve, f.jobs);
}

int cmd_sweep(const CommonFlags& f) {
  const auto cfg = load(f);
  const auto cells = run_sweep(f, cfg);
  Sink out(out_dir(f, cfg), "sweep.csv");
  semrate::csv::write_load_curve(out.stream(), cells, cfg.sweep->objective);
  out.commit();
  return kExitOk;
}

int cmd_frontier(const CommonFlags& f) {
  const auto cfg = load(f);
  const auto cells = run_sweep(f, cfg);
  Sink out(out_dir(f, cfg), "frontier.csv");
  semrate::csv::write_frontier(out.stream(), cells);
  out.commit();
  return kExitOk;
}

int cmd_validate(const CommonFlags& f) {
  semrate::ValidationOptions opt;
  opt.jobs = f.jobs;
  if (f.seed) opt.seed = *f.seed;
  const auto report = semrate::run_validation(opt);
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  return report.all_passed() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-rate control simulator: drift-plus-penalty latent-dimension selection "
               "under a long-term semantic error cap"};
  app.require_subcommand(0, 1);
  bool print_example = false;
  app.add_flag("--print-example-config", print_example, "Print a documented example configuration and exit");

  CommonFlags sim_flags, sweep_flags, frontier_flags, validate_flags;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation and emit a metrics row");
  add_common(simulate, sim_flags, true);
  simulate->add_flag("--trace", sim_flags.trace, "Also dump trace.csv and ledger.csv");
  auto* sweep = app.add_subcommand("sweep", "Load curves: best feasible objective per (epsilon, policy, lambda)");
  add_common(sweep, sweep_flags, true);
  auto* frontier = app.add_subcommand("frontier", "Full V frontier per (epsilon, policy, lambda)");
  add_common(frontier, frontier_flags, true);
  auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");
  add_common(validate, validate_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (print_example) {
      std::cout << semrate::kExampleConfig;
      return kExitOk;
    }
    if (*simulate) return cmd_simulate(sim_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*frontier) return cmd_frontier(frontier_flags);
    if (*validate) return cmd_validate(validate_flags);
    std::cout << app.help();
    return kExitConfig;
  } catch (const semrate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
