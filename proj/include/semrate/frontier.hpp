#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semrate/controllers.hpp"
#include "semrate/error_model.hpp"
#include "semrate/errors.hpp"
#include "semrate/parallel.hpp"
#include "semrate/rng.hpp"
#include "semrate/sim_engine.hpp"

namespace semrate {

enum class Objective { Delay, Aoi };

inline const char* to_string(Objective o) { return o == Objective::Delay ? "delay" : "aoi"; }

// Delay is the Little's-law estimate; AoI the time-average age.
inline double objective_value(const RunMetrics& m, Objective o) {
  return o == Objective::Delay ? m.w_little : m.aoi_bar;
}

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n − 1)
  std::size_t count = 0;

  double se() const { return count > 0 ? std / std::sqrt(static_cast<double>(count)) : 0.0; }
};

inline SampleStats summarize(std::span<const double> xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

// Standard error of a difference between two independent seed means.
inline double pooled_se(double se_a, double se_b) { return std::sqrt(se_a * se_a + se_b * se_b); }

struct FrontierPoint {
  double v = 0.0;
  double objective = 0.0;
  double objective_std = 0.0;
  double err_rate = 0.0;
  double err_rate_std = 0.0;
  double mean_n = 0.0;
  int replications = 0;
  bool stable = true;
  bool feasible = false;

  double objective_se() const { return replications > 0 ? objective_std / std::sqrt(replications) : 0.0; }
  double err_rate_se() const { return replications > 0 ? err_rate_std / std::sqrt(replications) : 0.0; }
};

/// Feasible iff every replication stayed stable and the seed-mean error rate
/// plus one standard error is within the cap.
inline bool is_feasible(const SampleStats& err, bool stable, double epsilon) {
  return stable && err.mean + err.se() <= epsilon;
}

inline FrontierPoint aggregate_point(double v, std::span<const RunMetrics> runs, Objective objective,
                                     double epsilon) {
  std::vector<double> obj, err, mean_n;
  bool stable = true;
  for (const auto& m : runs) {
    obj.push_back(objective_value(m, objective));
    err.push_back(m.err_rate);
    mean_n.push_back(m.mean_n);
    stable = stable && m.stable;
  }
  const auto o = summarize(obj);
  const auto e = summarize(err);
  FrontierPoint p;
  p.v = v;
  p.objective = o.mean;
  p.objective_std = o.std;
  p.err_rate = e.mean;
  p.err_rate_std = e.std;
  p.mean_n = summarize(mean_n).mean;
  p.replications = static_cast<int>(runs.size());
  p.stable = stable;
  p.feasible = is_feasible(e, stable, epsilon);
  return p;
}

struct FrontierResult {
  std::vector<FrontierPoint> points;  // ordered by v
  std::optional<std::size_t> best;

  bool infeasible_all() const { return !best.has_value(); }
  const FrontierPoint* best_point() const { return best ? &points[*best] : nullptr; }

  // Row reported for this operating point: the selected V, or when nothing
  // is feasible the stable point with the lowest error rate.
  const FrontierPoint& reported() const {
    if (best) return points[*best];
    std::size_t pick = 0;
    bool have_stable = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].stable) continue;
      if (!have_stable || points[i].err_rate < points[pick].err_rate) pick = i;
      have_stable = true;
    }
    return points[pick];
  }
};

// Minimum objective over feasible points; the first (smallest V) wins ties.
inline std::optional<std::size_t> select_best(std::span<const FrontierPoint> points) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].feasible) continue;
    if (!best || points[i].objective < points[*best].objective) best = i;
  }
  return best;
}

// 17 log-spaced weights over [1e-2, 1e6] preceded by V = 0.
inline std::vector<double> default_v_grid() {
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 16; ++i) grid.push_back(std::pow(10.0, -2.0 + 0.5 * i));
  return grid;
}

struct ReplicationPlan {
  std::uint64_t master_seed = 1;
  int replications = 5;
};

inline std::uint64_t cell_seed(std::uint64_t master, std::size_t lambda_index, std::size_t v_index,
                               std::size_t replicate) {
  return derive_seed(master, {lambda_index, v_index, replicate});
}

namespace detail {

inline void check_v_grid(std::span<const double> v_grid) {
  if (v_grid.empty()) throw ConfigError("v_grid", "must not be empty");
  for (std::size_t i = 0; i < v_grid.size(); ++i) {
    if (!(v_grid[i] >= 0.0) || !std::isfinite(v_grid[i])) throw ConfigError("v_grid", "weights must be finite and >= 0");
    if (i > 0 && v_grid[i] < v_grid[i - 1]) throw ConfigError("v_grid", "must be sorted ascending");
  }
}

}  // namespace detail

/// Evaluates (objective, error rate) at every V of the grid for one (λ, ε)
/// and picks the best feasible V. `policy` supplies the kind and estimator
/// mode; its own `v` is ignored.
inline FrontierResult sweep_v(double lambda, double epsilon, const Policy& policy,
                              std::span<const double> v_grid, const SimConfig& base,
                              const ErrorCurve& curve, const ReplicationPlan& plan,
                              Objective objective, std::size_t lambda_index = 0, unsigned jobs = 1) {
  detail::check_v_grid(v_grid);
  if (plan.replications < 1) throw ConfigError("seeds", "need at least one replication");
  const auto reps = static_cast<std::size_t>(plan.replications);
  std::vector<RunMetrics> runs(v_grid.size() * reps);
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    const std::size_t vi = i / reps, r = i % reps;
    SimConfig cfg = base;
    cfg.lambda = lambda;
    cfg.seed = cell_seed(plan.master_seed, lambda_index, vi, r);
    Policy p = policy;
    p.v = v_grid[vi];
    runs[i] = run(cfg, p, curve, epsilon).metrics;
  });
  FrontierResult result;
  for (std::size_t vi = 0; vi < v_grid.size(); ++vi) {
    result.points.push_back(aggregate_point(
        v_grid[vi], std::span<const RunMetrics>(runs).subspan(vi * reps, reps), objective, epsilon));
  }
  result.best = select_best(result.points);
  return result;
}

struct LoadCurveSpec {
  std::vector<double> lambdas;
  std::vector<double> epsilons;
  std::vector<Policy> policies;
  std::vector<double> v_grid = default_v_grid();
  SimConfig base;
  ReplicationPlan plan;
  Objective objective = Objective::Delay;
};

struct LoadCurveCell {
  double lambda = 0.0;
  double epsilon = 0.0;
  Policy policy;
  FrontierResult frontier;
};

/// Runs every (ε, policy, λ, V, replicate) cell and reduces them to one
/// frontier per (ε, policy, λ). FixedN policies are a single-point frontier
/// at V = 0. Cells come back ordered by (ε, policy, λ) following the input
/// order of `epsilons` and `policies`.
inline std::vector<LoadCurveCell> trace_load_curve(const LoadCurveSpec& spec, const ErrorCurve& curve,
                                                   unsigned jobs = 1) {
  if (spec.lambdas.empty()) throw ConfigError("lambdas", "must not be empty");
  for (std::size_t i = 1; i < spec.lambdas.size(); ++i)
    if (spec.lambdas[i] < spec.lambdas[i - 1]) throw ConfigError("lambdas", "must be sorted ascending");
  if (spec.epsilons.empty()) throw ConfigError("epsilons", "must not be empty");
  if (spec.policies.empty()) throw ConfigError("policies", "must not be empty");
  if (spec.plan.replications < 1) throw ConfigError("seeds", "need at least one replication");
  detail::check_v_grid(spec.v_grid);
  for (const auto& p : spec.policies) p.validate(curve.actions());

  const auto reps = static_cast<std::size_t>(spec.plan.replications);
  const std::vector<double> fixed_grid{0.0};

  struct Job {
    std::size_t cell, vi, r;
  };
  std::vector<LoadCurveCell> cells;
  std::vector<std::size_t> lambda_idx;
  std::vector<Job> jobs_list;
  for (double eps : spec.epsilons) {
    for (const auto& pol : spec.policies) {
      const auto& grid = pol.is_dpp() ? spec.v_grid : fixed_grid;
      for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
        const std::size_t c = cells.size();
        cells.push_back({spec.lambdas[li], eps, pol, {}});
        lambda_idx.push_back(li);
        for (std::size_t vi = 0; vi < grid.size(); ++vi)
          for (std::size_t r = 0; r < reps; ++r) jobs_list.push_back({c, vi, r});
      }
    }
  }

  std::vector<RunMetrics> runs(jobs_list.size());
  parallel_for(jobs_list.size(), jobs, [&](std::size_t i) {
    const auto& job = jobs_list[i];
    const auto& cell = cells[job.cell];
    const auto& grid = cell.policy.is_dpp() ? spec.v_grid : fixed_grid;
    SimConfig cfg = spec.base;
    cfg.lambda = cell.lambda;
    cfg.seed = cell_seed(spec.plan.master_seed, lambda_idx[job.cell], job.vi, job.r);
    Policy p = cell.policy;
    p.v = grid[job.vi];
    runs[i] = run(cfg, p, curve, cell.epsilon).metrics;
  });

  std::size_t offset = 0;
  for (auto& cell : cells) {
    const auto& grid = cell.policy.is_dpp() ? spec.v_grid : fixed_grid;
    for (std::size_t vi = 0; vi < grid.size(); ++vi) {
      cell.frontier.points.push_back(aggregate_point(
          grid[vi], std::span<const RunMetrics>(runs).subspan(offset, reps), spec.objective, cell.epsilon));
      offset += reps;
    }
    cell.frontier.best = select_best(cell.frontier.points);
  }
  return cells;
}

}  // namespace semrate
