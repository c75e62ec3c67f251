#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semrate/controllers.hpp"
#include "semrate/error_model.hpp"
#include "semrate/errors.hpp"
#include "semrate/metrics.hpp"
#include "semrate/rng.hpp"

namespace semrate {

struct SimConfig {
  double lambda = 0.1;
  double horizon = 1e6;
  double warmup = 0.0;
  std::uint64_t seed = 1;
  std::int64_t backlog_cap = 1'000'000;
  // Stop admitting arrivals at `horizon` but keep serving until the
  // system is empty. Used when a trace must end empty.
  bool drain = false;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon", "must be > 0");
    if (!(warmup >= 0.0 && warmup < horizon)) throw ConfigError("warmup", "must satisfy 0 <= warmup < horizon");
    if (backlog_cap < 1) throw ConfigError("backlog_cap", "must be >= 1");
  }
};

enum class EventKind { Arrival, ServiceStart, Departure };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Arrival: return "arrival";
    case EventKind::ServiceStart: return "service_start";
    case EventKind::Departure: return "departure";
  }
  return "?";
}

struct TraceEvent {
  double time;
  EventKind kind;
  std::int64_t q_sys;  // after the event
};

struct UpdateRecord {
  double g;        // generation (arrival) time
  double t_start;  // service start
  double d;        // departure
  int n;
  int e;

  double sojourn() const { return d - g; }
};

/// Deficit queue Z(k+1) = max{Z(k) + E_k − ε, 0}, kept in fixed point.
///
/// The level is an integer count of 2^-64 units, so repeated updates are
/// exact and the telescoped bound Σ E_k ≤ Kε + Z(K) holds without rounding
/// slack. ε is quantized to the same grid, which is a no-op for ε ≥ 2^-11.
class VirtualQueue {
 public:
  using Raw = __int128;
  static constexpr int kFractionBits = 64;

  explicit VirtualQueue(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in [0,1)");
    eps_raw_ = static_cast<Raw>(std::nearbyint(std::ldexp(epsilon, kFractionBits)));
  }

  void update(int e) {
    level_ += (e != 0 ? kOne : Raw{0}) - eps_raw_;
    if (level_ < 0) level_ = 0;
  }

  double level() const { return std::ldexp(static_cast<double>(level_), -kFractionBits); }
  Raw raw() const noexcept { return level_; }
  Raw epsilon_raw() const noexcept { return eps_raw_; }
  double epsilon() const { return std::ldexp(static_cast<double>(eps_raw_), -kFractionBits); }

  static constexpr Raw kOne = Raw{1} << kFractionBits;

 private:
  Raw eps_raw_ = 0;
  Raw level_ = 0;
};

// Plain floating-point form of the deficit-queue recursion.
inline double update_virtual_queue(double z, int e, double epsilon) {
  return std::max(z + static_cast<double>(e) - epsilon, 0.0);
}

inline double advance_age(double age, double dt) { return age + dt; }

// Δ(d_k^+): d_k − g_k on success, unchanged on a semantic error.
inline double reset_age_on_departure(double age_before, double g, double d, int e) {
  return e == 0 ? d - g : age_before;
}

/// Poisson arrival stream on [0, horizon], generated lazily.
class PoissonArrivals {
 public:
  PoissonArrivals(double lambda, double horizon, RandomStream rng)
      : lambda_(lambda), horizon_(horizon), rng_(std::move(rng)) {}

  explicit PoissonArrivals(const SimConfig& cfg)
      : PoissonArrivals(cfg.lambda, cfg.horizon, RandomStream(cfg.seed, StreamId::Arrivals)) {}

  std::optional<double> next() {
    if (done_) return std::nullopt;
    t_ += rng_.exponential(lambda_);
    if (t_ > horizon_) {
      done_ = true;
      return std::nullopt;
    }
    return t_;
  }

 private:
  double lambda_;
  double horizon_;
  RandomStream rng_;
  double t_ = 0.0;
  bool done_ = false;
};

/// Replays a fixed, non-decreasing list of arrival times.
class ListArrivals {
 public:
  explicit ListArrivals(std::span<const double> times) : times_(times) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!(times_[i] >= 0.0) || (i > 0 && times_[i] < times_[i - 1]))
        throw ConfigError("arrivals", "arrival times must be non-negative and non-decreasing");
    }
  }

  std::optional<double> next() {
    if (pos_ == times_.size()) return std::nullopt;
    return times_[pos_++];
  }

 private:
  std::span<const double> times_;
  std::size_t pos_ = 0;
};

inline std::vector<double> generate_arrivals(const SimConfig& cfg) {
  cfg.validate();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.lambda * cfg.horizon * 1.01) + 16);
  PoissonArrivals src(cfg);
  while (auto t = src.next()) out.push_back(*t);
  return out;
}

// Service time equals the latent dimension.
struct ExactService {
  double operator()(int n) const { return static_cast<double>(n); }
};

struct RunOptions {
  bool record_updates = false;
  bool record_trace = false;
};

struct RunResult {
  std::vector<UpdateRecord> updates;
  std::vector<TraceEvent> trace;
  RunMetrics metrics;
  VirtualQueue z{0.0};
  // Whole-run counters (not restricted to the measurement window).
  std::int64_t departures = 0;
  std::int64_t errors = 0;
  double end_time = 0.0;
  bool ends_empty = false;
};

/// Single-server FIFO simulation driven by an arbitrary arrival source.
///
/// Starts empty with Z = 0 and Δ = 0. The policy is consulted at every
/// service start; the departure samples E_k, updates Z, the estimator and
/// the age. A run halts (stable = false) as soon as Q_sys exceeds the cap.
/// On simultaneous events the departure is processed first.
template <class Arrivals, class ServiceModel = ExactService>
RunResult simulate(const SimConfig& cfg, Arrivals& arrivals, const Policy& policy,
                   const ErrorCurve& curve, double epsilon, const RunOptions& opts = {},
                   ServiceModel service = {}) {
  cfg.validate();
  const ActionSet& actions = curve.actions();
  policy.validate(actions);

  RandomStream error_rng(cfg.seed, StreamId::Errors);
  ErrorEstimator estimator(policy.estimator, actions);
  MetricsCollector metrics(cfg.warmup);
  RunResult out;
  out.z = VirtualQueue(epsilon);
  VirtualQueue& z = out.z;

  struct InService {
    double g = 0.0;
    double start = 0.0;
    double departure = 0.0;
    int n = 0;
    std::size_t idx = 0;
  } cur;

  std::deque<double> waiting;
  std::vector<double> estimates(actions.size());
  std::int64_t q = 0;
  double clock = 0.0;
  double age = 0.0;
  bool busy = false;
  bool stable = true;
  bool any_success = false;

  auto advance_to = [&](double t) {
    metrics.advance(clock, t, q, age);
    age = advance_age(age, t - clock);
    clock = t;
  };
  auto log_event = [&](EventKind kind) {
    if (opts.record_trace) out.trace.push_back({clock, kind, q});
  };
  auto start_service = [&] {
    const double g = waiting.front();
    waiting.pop_front();
    for (std::size_t i = 0; i < actions.size(); ++i) estimates[i] = estimator.estimate_at(curve, i);
    const DecisionContext ctx{q, z.level(), age, estimates};
    const int n = select(policy, ctx, actions);
    cur = {g, clock, clock + service(n), n, actions.require_index(n)};
    busy = true;
    log_event(EventKind::ServiceStart);
  };
  auto pull_arrival = [&]() -> std::optional<double> {
    auto a = arrivals.next();
    if (a && *a > cfg.horizon) return std::nullopt;
    return a;
  };

  auto next_arrival = pull_arrival();
  while (true) {
    const bool departure_next = busy && (!next_arrival || cur.departure <= *next_arrival);
    if (departure_next) {
      if (!cfg.drain && cur.departure > cfg.horizon) break;
      advance_to(cur.departure);
      const int e = error_rng.bernoulli(curve.at_index(cur.idx)) ? 1 : 0;
      busy = false;
      --q;
      z.update(e);
      estimator.record_at(cur.idx, e);
      age = reset_age_on_departure(age, cur.g, clock, e);
      any_success = any_success || e == 0;
      ++out.departures;
      out.errors += e;
      metrics.on_departure(clock, clock - cur.g, cur.n, e);
      if (opts.record_updates) out.updates.push_back({cur.g, cur.start, clock, cur.n, e});
      log_event(EventKind::Departure);
      if (!waiting.empty()) start_service();
    } else if (next_arrival) {
      advance_to(*next_arrival);
      ++q;
      waiting.push_back(clock);
      metrics.on_arrival(clock);
      log_event(EventKind::Arrival);
      next_arrival = pull_arrival();
      if (q > cfg.backlog_cap) {
        stable = false;
        break;
      }
      if (!busy) start_service();
    } else {
      break;
    }
  }

  double end = clock;
  if (stable) end = cfg.drain ? std::max(cfg.horizon, clock) : cfg.horizon;
  if (end > clock) advance_to(end);
  out.end_time = end;
  out.ends_empty = q == 0;
  out.metrics = metrics.finalize(end, z.level(), stable, any_success);
  return out;
}

/// Poisson-arrival run seeded from `cfg.seed`.
template <class ServiceModel = ExactService>
RunResult run(const SimConfig& cfg, const Policy& policy, const ErrorCurve& curve, double epsilon,
              const RunOptions& opts = {}, ServiceModel service = {}) {
  cfg.validate();
  PoissonArrivals arrivals(cfg);
  return simulate(cfg, arrivals, policy, curve, epsilon, opts, service);
}

}  // namespace semrate
