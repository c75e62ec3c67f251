#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace semrate {

/// Area under the piecewise-constant backlog Q_sys(t).
struct BacklogArea {
  double last_time = 0.0;
  std::int64_t level = 0;
  double area = 0.0;

  // Closes the rectangle [last_time, t_now] at the previous level, then
  // switches to q_now.
  void accumulate(double t_now, std::int64_t q_now) {
    if (t_now < last_time) throw std::logic_error("backlog accumulator: time went backwards");
    area += static_cast<double>(level) * (t_now - last_time);
    last_time = t_now;
    level = q_now;
  }
};

/// Area under the unit-slope age sawtooth Δ(t). Each piece is an exact
/// trapezoid because Δ grows linearly between events.
struct AgeArea {
  double area = 0.0;

  void accumulate(double delta_start, double dt) {
    if (dt < 0.0) throw std::logic_error("age accumulator: negative elapsed time");
    area += (delta_start + (delta_start + dt)) * dt * 0.5;
  }
};

inline double little_delay(double q_bar, double lambda_emp) {
  if (!(lambda_emp > 0.0)) throw std::domain_error("little_delay: arrival rate must be positive");
  return q_bar / lambda_emp;
}

/// Mean sojourn of an M/D/1 queue with service time n:
/// n + λn² / (2(1 − λn)).
inline double md1_fixed_delay(double lambda, double n) {
  const double rho = lambda * n;
  if (!(rho < 1.0)) throw std::domain_error("md1_fixed_delay: utilization must be < 1");
  return n + lambda * n * n / (2.0 * (1.0 - rho));
}

struct RunMetrics {
  double q_bar = 0.0;
  double w_little = 0.0;
  double w_direct = 0.0;
  double aoi_bar = 0.0;
  double err_rate = 0.0;
  double z_final = 0.0;
  std::int64_t k_served = 0;
  double lambda_emp = 0.0;
  double mean_n = 0.0;
  bool stable = true;
  // False when no update was ever decoded successfully; aoi_bar then only
  // reflects growth from Δ(0) = 0.
  bool any_success = false;
  double measured_time = 0.0;
  std::int64_t arrivals = 0;
};

/// Time and per-update accumulators restricted to the window [warmup, end].
///
/// State before warmup still evolves; only the integrals and counters skip
/// that prefix. An interval straddling warmup is clipped at warmup.
class MetricsCollector {
 public:
  explicit MetricsCollector(double warmup = 0.0) : warmup_(warmup) {}

  // Integrates Q_sys and Δ over [from, to] given their values at `from`.
  void advance(double from, double to, std::int64_t q_level, double age_at_from) {
    if (to <= warmup_) return;
    const double start = std::max(from, warmup_);
    backlog_.last_time = start;
    backlog_.level = q_level;
    backlog_.accumulate(to, q_level);
    age_.accumulate(age_at_from + (start - from), to - start);
  }

  void on_arrival(double t) {
    if (t >= warmup_) ++arrivals_;
  }

  void on_departure(double d, double sojourn, int n, int e) {
    if (d < warmup_) return;
    ++served_;
    sojourn_sum_ += sojourn;
    n_sum_ += n;
    errors_ += e;
  }

  double backlog_area() const noexcept { return backlog_.area; }
  double age_area() const noexcept { return age_.area; }

  RunMetrics finalize(double end_time, double z_final, bool stable, bool any_success) const {
    RunMetrics m;
    m.stable = stable;
    m.any_success = any_success;
    m.z_final = z_final;
    m.measured_time = std::max(0.0, end_time - warmup_);
    m.arrivals = arrivals_;
    m.k_served = served_;
    if (m.measured_time > 0.0) {
      m.q_bar = backlog_.area / m.measured_time;
      m.aoi_bar = age_.area / m.measured_time;
      m.lambda_emp = static_cast<double>(arrivals_) / m.measured_time;
      if (m.lambda_emp > 0.0) m.w_little = little_delay(m.q_bar, m.lambda_emp);
    }
    if (served_ > 0) {
      const auto k = static_cast<double>(served_);
      m.w_direct = sojourn_sum_ / k;
      m.err_rate = static_cast<double>(errors_) / k;
      m.mean_n = static_cast<double>(n_sum_) / k;
    }
    return m;
  }

 private:
  double warmup_;
  BacklogArea backlog_;
  AgeArea age_;
  std::int64_t arrivals_ = 0;
  std::int64_t served_ = 0;
  std::int64_t errors_ = 0;
  std::int64_t n_sum_ = 0;
  double sojourn_sum_ = 0.0;
};

}  // namespace semrate
