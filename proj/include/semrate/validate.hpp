#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "semrate/controllers.hpp"
#include "semrate/error_model.hpp"
#include "semrate/metrics.hpp"
#include "semrate/parallel.hpp"
#include "semrate/rng.hpp"
#include "semrate/sim_engine.hpp"

namespace semrate {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

/// Exact test of Σ E_k ≤ K ε + Z(K) on the fixed-point grid of the queue.
inline bool fidelity_bound_holds(std::int64_t departures, std::int64_t errors, const VirtualQueue& z) {
  using Raw = VirtualQueue::Raw;
  return Raw{errors} * VirtualQueue::kOne <= Raw{departures} * z.epsilon_raw() + z.raw();
}

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  int replications = 5;
  double md1_tolerance = 0.02;
  double little_tolerance = 1e-6;
  std::size_t argmin_contexts = 100000;
  unsigned jobs = 1;
};

namespace detail {

inline ErrorCurve validation_curve() {
  return ErrorCurve(ActionSet({10, 15, 20}), {0.30, 0.22, 0.18}, "validation");
}

// Fixed-N runs at ρ ∈ {0.3, 0.5, 0.7}, horizon 10^6·n, seed-averaged.
template <class ServiceModel>
std::vector<CheckResult> md1_checks(const ValidationOptions& opt, ServiceModel service) {
  const auto curve = validation_curve();
  const int n = 10;
  const double rhos[] = {0.3, 0.5, 0.7};
  std::vector<CheckResult> out;
  for (std::size_t ri = 0; ri < std::size(rhos); ++ri) {
    const double lambda = rhos[ri] / n;
    std::vector<double> sojourn(static_cast<std::size_t>(opt.replications));
    parallel_for(sojourn.size(), opt.jobs, [&](std::size_t r) {
      SimConfig cfg;
      cfg.lambda = lambda;
      cfg.horizon = 1e6 * n;
      cfg.warmup = 0.1 * cfg.horizon;
      cfg.seed = derive_seed(opt.seed, {1, ri, r});
      sojourn[r] = run(cfg, Policy::fixed(n), curve, 0.5, {}, service).metrics.w_direct;
    });
    double mean = 0.0;
    for (double s : sojourn) mean += s;
    mean /= static_cast<double>(sojourn.size());
    const double analytic = md1_fixed_delay(lambda, n);
    const double rel = std::abs(mean - analytic) / analytic;
    out.push_back({fmt::format("md1 agreement rho={} n={}", rhos[ri], n), rel <= opt.md1_tolerance,
                   fmt::format("simulated {:.4f} vs analytic {:.4f} (rel err {:.4f}, tol {})", mean, analytic,
                               rel, opt.md1_tolerance)});
  }
  return out;
}

}  // namespace detail

/// Built-in oracle suite: M/D/1 agreement, Little's-law identity,
/// fidelity-debt bound and brute-force argmin equivalence.
///
/// The service model is a template parameter so tests can inject a faulty
/// one and confirm the M/D/1 check catches it.
template <class ServiceModel = ExactService>
ValidationReport run_validation(const ValidationOptions& opt = {}, ServiceModel service = {}) {
  ValidationReport report;
  for (auto& c : detail::md1_checks(opt, service)) report.checks.push_back(std::move(c));

  const auto curve = detail::validation_curve();
  {
    SimConfig cfg;
    cfg.lambda = 0.06;
    cfg.horizon = 2e5;
    cfg.warmup = 0.0;
    cfg.drain = true;
    cfg.seed = derive_seed(opt.seed, {2});
    const auto res = run(cfg, Policy::queue_dpp(100.0), curve, 0.25, {}, service);
    const auto& m = res.metrics;
    const double rel = m.w_direct > 0 ? std::abs(m.w_little - m.w_direct) / m.w_direct : 1.0;
    report.checks.push_back({"little identity (drained trace, warmup 0)", res.ends_empty && rel <= opt.little_tolerance,
                             fmt::format("w_little {} vs w_direct {} (rel diff {:.3g})", m.w_little, m.w_direct, rel)});
  }
  {
    bool ok = true;
    std::string detail;
    const Policy policies[] = {Policy::queue_dpp(10.0), Policy::aoi_dpp(1000.0), Policy::fixed(10),
                               Policy::queue_dpp(50.0, EstimatorMode::Empirical)};
    const double caps[] = {0.2, 0.25, 0.3};
    std::size_t idx = 0;
    for (const auto& pol : policies) {
      for (double eps : caps) {
        SimConfig cfg;
        cfg.lambda = 0.04;
        cfg.horizon = 2e5;
        cfg.seed = derive_seed(opt.seed, {3, idx++});
        const auto res = run(cfg, pol, curve, eps, {}, service);
        if (!fidelity_bound_holds(res.departures, res.errors, res.z)) {
          ok = false;
          detail += fmt::format("violated for {} eps={}; ", pol.name(), eps);
        }
      }
    }
    if (ok) detail = fmt::format("{} runs, bound exact on the 2^-64 grid", idx);
    report.checks.push_back({"fidelity-debt bound", ok, detail});
  }
  {
    RandomStream rng(derive_seed(opt.seed, {4}));
    const ActionSet actions({4, 6, 9, 10, 15, 20, 32});
    std::vector<double> est(actions.size());
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < opt.argmin_contexts; ++i) {
      for (auto& p : est) p = rng.uniform();
      const DecisionContext ctx{1 + static_cast<std::int64_t>(rng.uniform() * 200), rng.uniform() * 50,
                                rng.uniform() * 500, est};
      const double v = rng.uniform() < 0.1 ? 0.0 : std::pow(10.0, -2.0 + 8.0 * rng.uniform());
      for (int kind = 0; kind < 2; ++kind) {
        int best_n = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < actions.size(); ++a) {
          const double nd = actions[a];
          const double c = kind == 0 ? static_cast<double>(ctx.q) * nd + v * ctx.z * est[a]
                                     : ctx.delta * nd + 0.5 * nd * nd + v * ctx.z * est[a];
          if (c < best) {
            best = c;
            best_n = actions[a];
          }
        }
        const Policy pol = kind == 0 ? Policy::queue_dpp(v) : Policy::aoi_dpp(v);
        if (select(pol, ctx, actions) != best_n) ++mismatches;
      }
    }
    report.checks.push_back({"argmin brute-force equivalence", mismatches == 0,
                             fmt::format("{} contexts x 2 rules, {} mismatches", opt.argmin_contexts, mismatches)});
  }
  return report;
}

}  // namespace semrate
