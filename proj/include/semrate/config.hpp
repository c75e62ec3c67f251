#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semrate/controllers.hpp"
#include "semrate/error_model.hpp"
#include "semrate/errors.hpp"
#include "semrate/frontier.hpp"
#include "semrate/sim_engine.hpp"

namespace semrate {

struct SimulateSection {
  double lambda = 0.0;
  double epsilon = 0.0;
  Policy policy;
};

struct SweepSection {
  std::vector<double> lambdas;
  std::vector<double> epsilons;
  std::vector<Policy> policies;
  std::vector<double> v_grid;
  int seeds = 5;
  Objective objective = Objective::Delay;
};

/// Parsed and cross-validated run configuration.
struct RunConfig {
  ErrorCurve curve;
  SimConfig sim;  // lambda is filled per run
  std::optional<SimulateSection> simulate;
  std::optional<SweepSection> sweep;
  std::string out_dir;

  const ActionSet& actions() const { return curve.actions(); }
};

// Shipped as `config.example` and printed by `semrate --print-example-config`.
inline constexpr std::string_view kExampleConfig = R"(; semrate run configuration (INI). Lines starting with ';' or '#' are comments.
; Top-level keys, with defaults:
;   actions      latent dimensions N_1 < ... < N_M (required)
;   horizon      simulated time per run                       [1000000]
;   warmup       time excluded from averages                  [10% of horizon]
;   backlog_cap  halt and mark unstable when Q_sys exceeds it [1000000]
;   seed         master seed (overridden by --seed)           [1]
;   drain        serve remaining updates after the horizon    [false]
;   out          output directory (overridden by --out)       [stdout]
actions = 10,15,20
horizon = 1000000
warmup = 100000
backlog_cap = 1000000
seed = 1

[error_model]
; Either a CSV table with header `n,p_e` (path relative to this file) ...
; table = curve.csv
; ... or the synthetic curve p_e(N) = floor + (ceil - floor) * exp(-N / scale).
floor = 0.05
ceil = 0.8
scale = 6
; snr is a label only.
snr = 10dB

[simulate]
; One run: `semrate simulate`.
lambda = 0.04
epsilon = 0.2
; policy = fixed:<n> | dpp-queue | dpp-aoi
policy = dpp-queue
v = 10
; estimator = oracle | empirical
estimator = oracle

[sweep]
; Load curves and V frontiers: `semrate sweep`, `semrate frontier`.
lambdas = 0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08
epsilons = 0.2,0.25,0.3
policies = fixed:10,fixed:15,fixed:20,dpp-queue
; v_grid = default (0 plus 17 log-spaced points over [1e-2, 1e6]) or a list
v_grid = default
; number of independent replications per cell
seeds = 5
; objective = delay | aoi
objective = delay
estimator = oracle
)";

namespace detail {

using boost::property_tree::ptree;

class Section {
 public:
  Section(const ptree* tree, std::string name, std::set<std::string> allowed)
      : tree_(tree), name_(std::move(name)) {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) continue;  // nested sections are handled by the caller
      if (!allowed.count(key)) throw ConfigError(qualify(key), "unknown key");
    }
  }

  std::string qualify(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return std::string(trim(*v));
  }

  std::string require_raw(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) throw ConfigError(qualify(key), "missing required value");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    auto v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(qualify(key), "missing required value");
    }
    auto x = parse_number<double>(*v);
    if (!x || !std::isfinite(*x)) throw ConfigError(qualify(key), "`" + *v + "` is not a finite number");
    return *x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (auto i = parse_number<std::int64_t>(*v)) return *i;
    auto x = parse_number<double>(*v);
    if (!x || std::floor(*x) != *x || std::abs(*x) > 9e18)
      throw ConfigError(qualify(key), "`" + *v + "` is not an integer");
    return static_cast<std::int64_t>(*x);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (auto& item : list(key)) {
      auto x = parse_number<double>(item);
      if (!x || !std::isfinite(*x)) throw ConfigError(qualify(key), "`" + item + "` is not a finite number");
      out.push_back(*x);
    }
    return out;
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    const std::string value = require_raw(key);
    std::string_view s = value;
    while (true) {
      auto comma = s.find(',');
      auto item = trim(s.substr(0, comma));
      if (item.empty()) throw ConfigError(qualify(key), "empty list item");
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(qualify(key), "expected true or false");
  }

 private:
  const ptree* tree_;
  std::string name_;
};

inline EstimatorMode parse_estimator(const Section& s) {
  auto v = s.raw("estimator").value_or("oracle");
  if (v == "oracle") return EstimatorMode::Oracle;
  if (v == "empirical") return EstimatorMode::Empirical;
  throw ConfigError(s.qualify("estimator"), "expected oracle or empirical");
}

inline void check_epsilon(double eps, const std::string& field) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(field, "error cap must lie in (0,1)");
}

inline const ptree* child(const ptree& root, const std::string& name) {
  auto c = root.get_child_optional(ptree::path_type(name, '\0'));
  return c ? &*c : nullptr;
}

}  // namespace detail

/// Parses configuration text. Relative table paths resolve against `base_dir`.
inline RunConfig parse_run_config(const std::string& text,
                                  const std::filesystem::path& base_dir = std::filesystem::current_path()) {
  using detail::Section;
  detail::ptree root;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [key, node] : root)
    if (!node.empty() && key != "error_model" && key != "simulate" && key != "sweep")
      throw ConfigError(key, "unknown section");

  const Section top(&root, "", {"actions", "horizon", "warmup", "backlog_cap", "seed", "drain", "out"});
  std::vector<int> dims;
  for (auto& item : top.list("actions")) {
    auto n = detail::parse_number<int>(item);
    if (!n) throw ConfigError("actions", "`" + item + "` is not an integer");
    dims.push_back(*n);
  }
  ActionSet actions(std::move(dims));

  SimConfig sim;
  sim.horizon = top.number("horizon", 1e6);
  if (!(sim.horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  sim.warmup = top.number("warmup", 0.1 * sim.horizon);
  sim.backlog_cap = top.integer("backlog_cap", 1'000'000);
  {
    auto raw = top.raw("seed");
    if (raw) {
      auto s = detail::parse_number<std::uint64_t>(*raw);
      if (!s) throw ConfigError("seed", "`" + *raw + "` is not an unsigned 64-bit integer");
      sim.seed = *s;
    }
  }
  sim.drain = top.flag("drain", false);
  sim.lambda = 1.0;  // placeholder so the shared fields validate here
  sim.validate();

  const auto* em_tree = detail::child(root, "error_model");
  if (!em_tree) throw ConfigError("error_model", "section is required");
  const Section em(em_tree, "error_model", {"table", "floor", "ceil", "scale", "snr"});
  const std::string snr = em.raw("snr").value_or("");
  std::optional<ErrorCurve> curve;
  if (auto table = em.raw("table")) {
    if (em.raw("floor") || em.raw("ceil") || em.raw("scale"))
      throw ConfigError("error_model", "give either `table` or the synthetic parameters, not both");
    std::filesystem::path p(*table);
    if (p.is_relative()) p = base_dir / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("error_model.table", "cannot read `" + p.string() + "`");
    std::stringstream buf;
    buf << in.rdbuf();
    curve.emplace(load_error_curve(buf.str(), actions, snr));
  } else {
    curve.emplace(synthetic_error_curve(actions, em.number("floor"), em.number("ceil"), em.number("scale"), snr));
  }

  RunConfig cfg{std::move(*curve), sim, std::nullopt, std::nullopt, top.raw("out").value_or("")};

  if (const auto* t = detail::child(root, "simulate")) {
    const Section s(t, "simulate", {"lambda", "epsilon", "policy", "v", "estimator"});
    SimulateSection sec;
    sec.lambda = s.number("lambda");
    if (!(sec.lambda > 0.0)) throw ConfigError("simulate.lambda", "must be > 0");
    sec.epsilon = s.number("epsilon");
    detail::check_epsilon(sec.epsilon, "simulate.epsilon");
    sec.policy = parse_policy(s.require_raw("policy"), s.number("v", 0.0), detail::parse_estimator(s));
    try {
      sec.policy.validate(cfg.actions());
    } catch (const ConfigError& e) {
      throw ConfigError("simulate." + e.field(), e.message());
    }
    cfg.simulate = sec;
  }

  if (const auto* t = detail::child(root, "sweep")) {
    const Section s(t, "sweep", {"lambdas", "epsilons", "policies", "v_grid", "seeds", "objective", "estimator"});
    SweepSection sec;
    sec.lambdas = s.numbers("lambdas");
    for (std::size_t i = 0; i < sec.lambdas.size(); ++i) {
      if (!(sec.lambdas[i] > 0.0)) throw ConfigError("sweep.lambdas", "rates must be > 0");
      if (i > 0 && sec.lambdas[i] < sec.lambdas[i - 1]) throw ConfigError("sweep.lambdas", "must be sorted ascending");
    }
    sec.epsilons = s.numbers("epsilons");
    for (double e : sec.epsilons) detail::check_epsilon(e, "sweep.epsilons");
    const auto mode = detail::parse_estimator(s);
    for (auto& item : s.list("policies")) {
      Policy p = parse_policy(item, 0.0, mode);
      try {
        p.validate(cfg.actions());
      } catch (const ConfigError& e) {
        throw ConfigError("sweep.policies", e.message());
      }
      sec.policies.push_back(p);
    }
    auto grid = s.raw("v_grid").value_or("default");
    sec.v_grid = grid == "default" ? default_v_grid() : s.numbers("v_grid");
    try {
      detail::check_v_grid(sec.v_grid);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep.v_grid", e.message());
    }
    auto seeds = s.integer("seeds", 5);
    if (seeds < 1 || seeds > 100000) throw ConfigError("sweep.seeds", "must be in [1, 100000]");
    sec.seeds = static_cast<int>(seeds);
    auto obj = s.raw("objective").value_or("delay");
    if (obj == "delay") sec.objective = Objective::Delay;
    else if (obj == "aoi") sec.objective = Objective::Aoi;
    else throw ConfigError("sweep.objective", "expected delay or aoi");
    cfg.sweep = sec;
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read `" + path.string() + "`");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace semrate
