#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "semrate/sim_engine.hpp"
#include "semrate/validate.hpp"

namespace semrate {
namespace {

ErrorCurve feasibility_curve() { return ErrorCurve(ActionSet({10, 15, 20}), {0.30, 0.22, 0.18}); }

RunResult hand_trace(double warmup = 0.0) {
  const std::vector<double> arrivals{0.0, 2.0, 3.0};
  ListArrivals src(arrivals);
  SimConfig cfg;
  cfg.lambda = 0.2;
  cfg.horizon = 15.0;
  cfg.warmup = warmup;
  ErrorCurve clean(ActionSet({5}), {0.0});
  return simulate(cfg, src, Policy::fixed(5), clean, 0.2, {true, true});
}

TEST(VirtualQueueTest, UpdateExamples) {
  EXPECT_DOUBLE_EQ(update_virtual_queue(0.0, 1, 0.2), 0.8);
  EXPECT_EQ(update_virtual_queue(0.1, 0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(update_virtual_queue(2.0, 0, 0.25), 1.75);
}

TEST(VirtualQueueTest, FixedPointMatchesRecursion) {
  VirtualQueue z(0.25);
  z.update(1);
  EXPECT_EQ(z.level(), 0.75);
  z.update(0);
  z.update(0);
  EXPECT_EQ(z.level(), 0.25);
  z.update(0);
  z.update(0);
  EXPECT_EQ(z.level(), 0.0);
  EXPECT_EQ(z.raw(), 0);
  EXPECT_THROW(VirtualQueue(1.0), ConfigError);
  EXPECT_THROW(VirtualQueue(-0.1), ConfigError);
}

TEST(VirtualQueueTest, NeverNegativeAndTracksDoubleRecursion) {
  RandomStream rng(8);
  VirtualQueue z(0.2);
  double shadow = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const int e = rng.bernoulli(0.21) ? 1 : 0;
    z.update(e);
    shadow = update_virtual_queue(shadow, e, 0.2);
    ASSERT_GE(z.raw(), 0);
    ASSERT_NEAR(z.level(), shadow, 1e-11 * (1.0 + k));  // double recursion drifts by rounding
  }
}

TEST(AgeTest, AdvanceAndReset) {
  EXPECT_EQ(advance_age(0.0, 5.0), 5.0);
  EXPECT_EQ(advance_age(7.5, 0.0), 7.5);
  EXPECT_EQ(advance_age(3.0, 4.25), 7.25);
  EXPECT_EQ(reset_age_on_departure(20.0, 100.0, 112.0, 0), 12.0);
  EXPECT_EQ(reset_age_on_departure(20.0, 100.0, 112.0, 1), 20.0);
  EXPECT_EQ(reset_age_on_departure(12.0, 0.0, 12.0, 0), 12.0);
}

TEST(ArrivalsTest, PoissonCountConcentration) {
  SimConfig cfg;
  cfg.lambda = 0.1;
  cfg.horizon = 1e6;
  cfg.seed = 42;
  const auto a = generate_arrivals(cfg);
  EXPECT_NEAR(static_cast<double>(a.size()), 1e5, 4.0 * std::sqrt(1e5));
  EXPECT_EQ(a, generate_arrivals(cfg));
  for (std::size_t i = 1; i < a.size(); ++i) ASSERT_GT(a[i], a[i - 1]);
  EXPECT_LE(a.back(), cfg.horizon);
  cfg.seed = 43;
  EXPECT_NE(a, generate_arrivals(cfg));
}

TEST(ArrivalsTest, ExponentialGapMean) {
  SimConfig cfg;
  cfg.lambda = 2.0;
  cfg.horizon = 5.0e5;
  cfg.seed = 9;
  const auto a = generate_arrivals(cfg);
  ASSERT_GT(a.size(), 990000u);
  double prev = 0.0, sum = 0.0;
  for (double t : a) {
    sum += t - prev;
    prev = t;
  }
  EXPECT_NEAR(sum / static_cast<double>(a.size()), 0.5, 0.005);
}

TEST(ListArrivalsTest, RejectsUnsorted) {
  const std::vector<double> bad{1.0, 0.5};
  EXPECT_THROW(ListArrivals{bad}, ConfigError);
}

TEST(RunTest, HandTrace) {
  const auto res = hand_trace();
  ASSERT_EQ(res.updates.size(), 3u);
  const double d[] = {5.0, 10.0, 15.0};
  const double sojourn[] = {5.0, 8.0, 12.0};
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(res.updates[k].d, d[k]);
    EXPECT_EQ(res.updates[k].sojourn(), sojourn[k]);
    EXPECT_EQ(res.updates[k].n, 5);
    EXPECT_EQ(res.updates[k].e, 0);
  }
  const auto& m = res.metrics;
  EXPECT_DOUBLE_EQ(m.q_bar, 25.0 / 15.0);
  EXPECT_DOUBLE_EQ(m.lambda_emp, 3.0 / 15.0);
  EXPECT_DOUBLE_EQ(m.w_little, 25.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.w_direct, 25.0 / 3.0);
  EXPECT_EQ(m.err_rate, 0.0);
  EXPECT_EQ(m.z_final, 0.0);
  EXPECT_EQ(m.k_served, 3);
  EXPECT_TRUE(m.stable);
  EXPECT_TRUE(res.ends_empty);
}

TEST(RunTest, HandTraceEvents) {
  const auto res = hand_trace();
  using K = EventKind;
  const std::vector<std::tuple<double, K, std::int64_t>> expected{
      {0, K::Arrival, 1},  {0, K::ServiceStart, 1}, {2, K::Arrival, 2},        {3, K::Arrival, 3},
      {5, K::Departure, 2}, {5, K::ServiceStart, 2}, {10, K::Departure, 1},     {10, K::ServiceStart, 1},
      {15, K::Departure, 0}};
  ASSERT_EQ(res.trace.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(res.trace[i].time, std::get<0>(expected[i]));
    EXPECT_EQ(res.trace[i].kind, std::get<1>(expected[i]));
    EXPECT_EQ(res.trace[i].q_sys, std::get<2>(expected[i]));
  }
}

TEST(RunTest, WarmupClipsTimeAveragesOnly) {
  // Window [4, 15]: area 3·1 + 2·5 + 1·5 = 18; no arrivals inside it, but
  // all three departures count.
  const auto m = hand_trace(4.0).metrics;
  EXPECT_DOUBLE_EQ(m.q_bar, 18.0 / 11.0);
  EXPECT_EQ(m.arrivals, 0);
  EXPECT_EQ(m.w_little, 0.0);
  EXPECT_EQ(m.k_served, 3);
  EXPECT_DOUBLE_EQ(m.w_direct, 25.0 / 3.0);
}

TEST(RunTest, SawtoothAge) {
  const std::vector<double> arrivals{0.0, 2.0};
  ListArrivals src(arrivals);
  SimConfig cfg;
  cfg.lambda = 0.2;
  cfg.horizon = 10.0;
  ErrorCurve clean(ActionSet({5}), {0.0});
  const auto m = simulate(cfg, src, Policy::fixed(5), clean, 0.2).metrics;
  EXPECT_DOUBLE_EQ(m.aoi_bar, 5.0);
  EXPECT_TRUE(m.any_success);
}

TEST(RunTest, FailedUpdatesDoNotResetAge) {
  const std::vector<double> arrivals{0.0, 2.0};
  ListArrivals src(arrivals);
  SimConfig cfg;
  cfg.lambda = 0.2;
  cfg.horizon = 10.0;
  ErrorCurve lossy(ActionSet({5}), {1.0});
  const auto m = simulate(cfg, src, Policy::fixed(5), lossy, 0.2).metrics;
  EXPECT_DOUBLE_EQ(m.aoi_bar, 5.0);  // 0→10 triangle: 50 / 10
  EXPECT_FALSE(m.any_success);
  EXPECT_EQ(m.err_rate, 1.0);
}

TEST(RunTest, OverloadHalts) {
  SimConfig cfg;
  cfg.lambda = 0.5;
  cfg.horizon = 1e6;
  cfg.backlog_cap = 100;
  const auto res = run(cfg, Policy::fixed(10), feasibility_curve(), 0.3);
  EXPECT_FALSE(res.metrics.stable);
  EXPECT_LT(res.end_time, cfg.horizon);
}

TEST(RunTest, AlwaysFailingChannelNeverClips) {
  SimConfig cfg;
  cfg.lambda = 0.05;
  cfg.horizon = 2e4;
  ErrorCurve lossy(ActionSet({10, 15}), {1.0, 1.0});
  const auto res = run(cfg, Policy::queue_dpp(5.0), lossy, 0.2);
  const auto k = res.departures;
  ASSERT_GT(k, 0);
  EXPECT_EQ(res.errors, k);
  EXPECT_EQ(res.z.raw(), VirtualQueue::Raw{k} * (VirtualQueue::kOne - res.z.epsilon_raw()));
  EXPECT_GE(res.metrics.z_final, k * (1 - 0.2) - 1e-9 * k);
}

TEST(RunTest, ErrorFreeChannelKeepsZeroDebt) {
  SimConfig cfg;
  cfg.lambda = 0.06;
  cfg.horizon = 1e5;
  ErrorCurve clean(ActionSet({10, 15, 20}), {0.0, 0.0, 0.0});
  for (const auto& pol : {Policy::queue_dpp(1e3), Policy::aoi_dpp(1e3)}) {
    const auto res = run(cfg, pol, clean, 0.1);
    EXPECT_EQ(res.errors, 0);
    EXPECT_EQ(res.z.raw(), 0);
    EXPECT_EQ(res.metrics.err_rate, 0.0);
    EXPECT_EQ(res.metrics.mean_n, 10.0);
  }
}

TEST(RunTest, Deterministic) {
  SimConfig cfg;
  cfg.lambda = 0.05;
  cfg.horizon = 5e4;
  cfg.seed = 77;
  const auto curve = feasibility_curve();
  for (const auto& pol : {Policy::queue_dpp(30.0), Policy::aoi_dpp(300.0, EstimatorMode::Empirical)}) {
    const auto a = run(cfg, pol, curve, 0.2, {true, true});
    const auto b = run(cfg, pol, curve, 0.2, {true, true});
    ASSERT_EQ(a.updates.size(), b.updates.size());
    for (std::size_t i = 0; i < a.updates.size(); ++i) {
      ASSERT_EQ(a.updates[i].d, b.updates[i].d);
      ASSERT_EQ(a.updates[i].n, b.updates[i].n);
      ASSERT_EQ(a.updates[i].e, b.updates[i].e);
    }
    ASSERT_EQ(a.trace.size(), b.trace.size());
    EXPECT_EQ(a.metrics.aoi_bar, b.metrics.aoi_bar);
    EXPECT_EQ(a.metrics.q_bar, b.metrics.q_bar);
    EXPECT_EQ(a.z.raw(), b.z.raw());
  }
}

TEST(RunTest, InvalidInputs) {
  SimConfig cfg;
  cfg.lambda = 0.05;
  cfg.horizon = 100;
  EXPECT_THROW(run(cfg, Policy::fixed(12), feasibility_curve(), 0.2), ConfigError);
  cfg.warmup = 100;
  EXPECT_THROW(run(cfg, Policy::fixed(10), feasibility_curve(), 0.2), ConfigError);
  cfg.warmup = 0;
  cfg.lambda = 0;
  EXPECT_THROW(run(cfg, Policy::fixed(10), feasibility_curve(), 0.2), ConfigError);
}

// Sample-path invariants over a batch of random traces.
class TraceInvariants : public ::testing::TestWithParam<int> {};

TEST_P(TraceInvariants, Hold) {
  const int idx = GetParam();
  const Policy policies[] = {Policy::fixed(15), Policy::queue_dpp(20.0), Policy::aoi_dpp(500.0),
                             Policy::queue_dpp(1e4, EstimatorMode::Empirical)};
  const double lambdas[] = {0.02, 0.05, 0.08};
  SimConfig cfg;
  cfg.lambda = lambdas[idx % 3];
  cfg.horizon = 4e4;
  cfg.drain = true;
  cfg.seed = derive_seed(555, {static_cast<std::uint64_t>(idx)});
  const auto& pol = policies[idx % 4];
  const double eps = 0.2 + 0.05 * (idx % 3);
  const auto res = run(cfg, pol, feasibility_curve(), eps, {true, true});
  ASSERT_TRUE(res.metrics.stable);
  ASSERT_TRUE(res.ends_empty);

  double prev_g = -1.0;
  double prev_t = -1.0;
  for (const auto& u : res.updates) {
    ASSERT_LE(u.g, u.t_start);
    ASSERT_LT(u.t_start, u.d);
    // t + n is rounded once, so d − t matches n to within an ulp of d.
    const double ulp = std::nextafter(u.d, INFINITY) - u.d;
    ASSERT_NEAR(u.d - u.t_start, u.n, 2 * ulp);
    ASSERT_GE(u.g, prev_g);
    if (u.e == 0) ASSERT_GE(u.sojourn(), u.n - 1e-9);
    prev_g = u.g;
  }
  for (const auto& ev : res.trace) {
    ASSERT_GE(ev.time, prev_t);
    prev_t = ev.time;
  }
  std::int64_t q = 0;
  for (const auto& ev : res.trace) {
    const std::int64_t delta = ev.kind == EventKind::Arrival ? 1 : ev.kind == EventKind::Departure ? -1 : 0;
    ASSERT_EQ(ev.q_sys, q + delta);
    q = ev.q_sys;
  }

  EXPECT_TRUE(fidelity_bound_holds(res.departures, res.errors, res.z));
  const auto& m = res.metrics;
  EXPECT_NEAR(m.w_little, m.w_direct, 1e-9 * m.w_direct);
  EXPECT_LE(m.err_rate, eps + m.z_final / m.k_served + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(RandomTraces, TraceInvariants, ::testing::Range(0, 24));

}  // namespace
}  // namespace semrate
