#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "semrate/controllers.hpp"
#include "semrate/frontier.hpp"
#include "semrate/metrics.hpp"
#include "semrate/sim_engine.hpp"

// CSV emitters. Doubles use the shortest round-trip representation so the
// output is a deterministic function of the values.
namespace semrate::csv {

inline std::string_view flag(bool b) { return b ? "true" : "false"; }

inline constexpr std::string_view kMetricsHeader =
    "lambda,epsilon,policy,v,seed,q_bar,w_little,w_direct,aoi_bar,err_rate,z_final,k_served,mean_n,stable";

inline void write_metrics_row(std::ostream& os, double lambda, double epsilon, const Policy& policy,
                              std::uint64_t seed, const RunMetrics& m) {
  fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", lambda, epsilon, policy.name(), policy.v,
             seed, m.q_bar, m.w_little, m.w_direct, m.aoi_bar, m.err_rate, m.z_final, m.k_served,
             m.mean_n, flag(m.stable));
}

inline void write_trace(std::ostream& os, std::span<const TraceEvent> trace) {
  os << "time,kind,q_sys\n";
  for (const auto& ev : trace) fmt::print(os, "{},{},{}\n", ev.time, to_string(ev.kind), ev.q_sys);
}

inline void write_ledger(std::ostream& os, std::span<const UpdateRecord> updates) {
  os << "g,t_start,d,n,e,sojourn\n";
  for (const auto& u : updates)
    fmt::print(os, "{},{},{},{},{},{}\n", u.g, u.t_start, u.d, u.n, u.e, u.sojourn());
}

inline constexpr std::string_view kFrontierHeader =
    "lambda,epsilon,policy,v,objective,err_rate,err_rate_std,feasible,stable,selected";

inline void write_frontier(std::ostream& os, std::span<const LoadCurveCell> cells) {
  os << kFrontierHeader << '\n';
  for (const auto& cell : cells) {
    const auto& pts = cell.frontier.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      fmt::print(os, "{},{},{},{},{},{},{},{},{},{}\n", cell.lambda, cell.epsilon, cell.policy.name(), p.v,
                 p.objective, p.err_rate, p.err_rate_std, flag(p.feasible), flag(p.stable),
                 flag(cell.frontier.best == i));
    }
  }
}

inline constexpr std::string_view kLoadCurveHeader =
    "lambda,epsilon,policy,metric,v,objective,objective_std,err_rate,err_rate_std,mean_n,feasible,stable,"
    "replications";

inline void write_load_curve(std::ostream& os, std::span<const LoadCurveCell> cells, Objective objective) {
  os << kLoadCurveHeader << '\n';
  for (const auto& cell : cells) {
    const auto& p = cell.frontier.reported();
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", cell.lambda, cell.epsilon, cell.policy.name(),
               to_string(objective), p.v, p.objective, p.objective_std, p.err_rate, p.err_rate_std, p.mean_n,
               flag(p.feasible), flag(p.stable), p.replications);
  }
}

}  // namespace semrate::csv
