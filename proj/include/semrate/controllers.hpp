#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "semrate/error_model.hpp"
#include "semrate/errors.hpp"

namespace semrate {

enum class PolicyKind { FixedN, QueueAwareDpp, AoiAwareDpp };

/// Latent-dimension selection rule for one run. `v` is only read by the
/// drift-plus-penalty kinds; `fixed_n` only by FixedN.
struct Policy {
  PolicyKind kind = PolicyKind::FixedN;
  int fixed_n = 0;
  double v = 0.0;
  EstimatorMode estimator = EstimatorMode::Oracle;

  static Policy fixed(int n) { return {PolicyKind::FixedN, n, 0.0, EstimatorMode::Oracle}; }
  static Policy queue_dpp(double v, EstimatorMode mode = EstimatorMode::Oracle) {
    return {PolicyKind::QueueAwareDpp, 0, v, mode};
  }
  static Policy aoi_dpp(double v, EstimatorMode mode = EstimatorMode::Oracle) {
    return {PolicyKind::AoiAwareDpp, 0, v, mode};
  }

  bool is_dpp() const noexcept { return kind != PolicyKind::FixedN; }

  // Config spelling: fixed:<n> | dpp-queue | dpp-aoi
  std::string name() const {
    switch (kind) {
      case PolicyKind::FixedN: return "fixed:" + std::to_string(fixed_n);
      case PolicyKind::QueueAwareDpp: return "dpp-queue";
      case PolicyKind::AoiAwareDpp: return "dpp-aoi";
    }
    return {};
  }

  void validate(const ActionSet& actions) const {
    if (kind == PolicyKind::FixedN && !actions.contains(fixed_n))
      throw ConfigError("policy", "fixed N=" + std::to_string(fixed_n) + " is not in the action set");
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("v", "control weight must be finite and >= 0");
  }

  friend bool operator==(const Policy&, const Policy&) = default;
};

inline Policy parse_policy(std::string_view spec, double v = 0.0,
                           EstimatorMode mode = EstimatorMode::Oracle) {
  spec = detail::trim(spec);
  if (spec == "dpp-queue") return Policy::queue_dpp(v, mode);
  if (spec == "dpp-aoi") return Policy::aoi_dpp(v, mode);
  if (spec.starts_with("fixed:")) {
    auto n = detail::parse_number<int>(spec.substr(6));
    if (!n || *n < 1) throw ConfigError("policy", "bad fixed policy `" + std::string(spec) + "`");
    return Policy::fixed(*n);
  }
  throw ConfigError("policy", "unknown policy `" + std::string(spec) + "` (fixed:<n> | dpp-queue | dpp-aoi)");
}

/// State observed at a service-start epoch t_k.
///
/// `q` counts the update entering service, so q >= 1. `delta` is the age
/// just before t_k. `estimates` is aligned with the action set.
struct DecisionContext {
  std::int64_t q = 1;
  double z = 0.0;
  double delta = 0.0;
  std::span<const double> estimates;
};

// Q_k N + V Z_k p̂_e(N)
inline double queue_aware_cost(int n, double p_hat, const DecisionContext& ctx, double v) {
  return static_cast<double>(ctx.q) * n + v * ctx.z * p_hat;
}

// Δ_k N + N²/2 + V Z_k p̂_e(N); the first two terms are the age area
// swept while the update is in service.
inline double aoi_aware_cost(int n, double p_hat, const DecisionContext& ctx, double v) {
  const double nd = n;
  return ctx.delta * nd + 0.5 * nd * nd + v * ctx.z * p_hat;
}

inline double queue_aware_cost(const ActionSet& actions, int n, const DecisionContext& ctx, double v) {
  return queue_aware_cost(n, ctx.estimates[actions.require_index(n)], ctx, v);
}

inline double aoi_aware_cost(const ActionSet& actions, int n, const DecisionContext& ctx, double v) {
  return aoi_aware_cost(n, ctx.estimates[actions.require_index(n)], ctx, v);
}

namespace detail {

template <class Cost>
int argmin_action(const ActionSet& actions, const DecisionContext& ctx, Cost cost) {
  int best_n = actions[0];
  double best = cost(actions[0], ctx.estimates[0]);
  // Strict comparison keeps the smallest N on ties.
  for (std::size_t i = 1; i < actions.size(); ++i) {
    double c = cost(actions[i], ctx.estimates[i]);
    if (c < best) {
      best = c;
      best_n = actions[i];
    }
  }
  return best_n;
}

}  // namespace detail

/// Chooses N_k. Drift-plus-penalty kinds minimise their cost over the full
/// action set; ties go to the smallest N.
inline int select(const Policy& policy, const DecisionContext& ctx, const ActionSet& actions) {
  switch (policy.kind) {
    case PolicyKind::FixedN:
      return policy.fixed_n;
    case PolicyKind::QueueAwareDpp:
      return detail::argmin_action(actions, ctx, [&](int n, double p) {
        return queue_aware_cost(n, p, ctx, policy.v);
      });
    case PolicyKind::AoiAwareDpp:
      return detail::argmin_action(actions, ctx, [&](int n, double p) {
        return aoi_aware_cost(n, p, ctx, policy.v);
      });
  }
  return actions.smallest();
}

}  // namespace semrate
