#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semrate/errors.hpp"
#include "semrate/rng.hpp"

namespace semrate {

inline constexpr std::size_t kMaxActions = 64;

/// The set of selectable latent dimensions, strictly increasing.
///
/// Each value is the number of channel uses an update consumes, which is
/// also its (deterministic) service time.
class ActionSet {
 public:
  explicit ActionSet(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("actions", "action set is empty");
    if (dims_.size() > kMaxActions)
      throw ConfigError("actions", "at most " + std::to_string(kMaxActions) + " actions supported");
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (dims_[i] < 1) throw ConfigError("actions", "latent dimensions must be >= 1");
      if (i > 0 && dims_[i] <= dims_[i - 1])
        throw ConfigError("actions", "latent dimensions must be strictly increasing");
    }
  }

  std::span<const int> dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_.size(); }
  int operator[](std::size_t i) const { return dims_[i]; }
  int smallest() const noexcept { return dims_.front(); }
  int largest() const noexcept { return dims_.back(); }

  std::optional<std::size_t> index_of(int n) const noexcept {
    auto it = std::lower_bound(dims_.begin(), dims_.end(), n);
    if (it == dims_.end() || *it != n) return std::nullopt;
    return static_cast<std::size_t>(it - dims_.begin());
  }

  std::size_t require_index(int n) const {
    if (auto i = index_of(n)) return *i;
    throw ConfigError("n", "latent dimension " + std::to_string(n) + " is not in the action set");
  }

  bool contains(int n) const noexcept { return index_of(n).has_value(); }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  std::vector<int> dims_;
};

/// Semantic error probability p_e(N) for every action, non-increasing in N.
class ErrorCurve {
 public:
  ErrorCurve(ActionSet actions, std::vector<double> probabilities, std::string snr_tag = {})
      : actions_(std::move(actions)), p_(std::move(probabilities)), snr_tag_(std::move(snr_tag)) {
    if (p_.size() != actions_.size())
      throw ConfigError("error_model", "one probability per action is required");
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!(p_[i] >= 0.0 && p_[i] <= 1.0))
        throw ConfigError("error_model", "p_e(" + std::to_string(actions_[i]) + ") outside [0,1]");
      if (i > 0 && p_[i] > p_[i - 1])
        throw ConfigError("error_model", "p_e must be non-increasing in N (violated at N=" +
                                             std::to_string(actions_[i]) + ")");
    }
  }

  const ActionSet& actions() const noexcept { return actions_; }
  std::span<const double> probabilities() const noexcept { return p_; }
  const std::string& snr_tag() const noexcept { return snr_tag_; }

  double at_index(std::size_t i) const { return p_[i]; }
  double operator()(int n) const { return p_[actions_.require_index(n)]; }

 private:
  ActionSet actions_;
  std::vector<double> p_;
  std::string snr_tag_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Parses a `n,p_e` CSV table into a curve over `actions`.
///
/// Every action needs exactly one row; rows for unknown N, duplicate rows,
/// probabilities outside [0,1] and increasing curves are rejected.
inline ErrorCurve load_error_curve(std::string_view text, const ActionSet& actions,
                                   std::string snr_tag = {}) {
  std::vector<std::optional<double>> rows(actions.size());
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto eol = text.find('\n');
    auto line = detail::trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
      auto comma = line.find(',');
      if (comma == std::string_view::npos || detail::trim(line.substr(0, comma)) != "n" ||
          detail::trim(line.substr(comma + 1)) != "p_e")
        throw ConfigError("error_model.table", where + ": expected header `n,p_e`");
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ConfigError("error_model.table", where + ": expected two columns");
    auto n = detail::parse_number<int>(line.substr(0, comma));
    auto p = detail::parse_number<double>(line.substr(comma + 1));
    if (!n) throw ConfigError("error_model.table", where + ": N is not an integer");
    if (!p) throw ConfigError("error_model.table", where + ": p_e is not a number");
    auto idx = actions.index_of(*n);
    if (!idx)
      throw ConfigError("error_model.table", where + ": N=" + std::to_string(*n) + " is not an action");
    if (rows[*idx]) throw ConfigError("error_model.table", where + ": duplicate N=" + std::to_string(*n));
    rows[*idx] = *p;
  }
  if (!header_seen) throw ConfigError("error_model.table", "empty table");
  std::vector<double> p;
  p.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) throw ConfigError("error_model.table", "missing row for N=" + std::to_string(actions[i]));
    p.push_back(*rows[i]);
  }
  return ErrorCurve(actions, std::move(p), std::move(snr_tag));
}

// Closed-form saturating curve: floor + (ceil - floor) * exp(-N / scale).
inline double synthetic_error_probability(double n, double floor, double ceil, double scale) {
  return floor + (ceil - floor) * std::exp(-n / scale);
}

inline ErrorCurve synthetic_error_curve(const ActionSet& actions, double floor, double ceil,
                                        double scale, std::string snr_tag = {}) {
  if (!(floor >= 0.0 && floor < ceil && ceil <= 1.0))
    throw ConfigError("error_model", "synthetic curve needs 0 <= floor < ceil <= 1");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ConfigError("error_model.scale", "must be a positive finite number");
  std::vector<double> p;
  p.reserve(actions.size());
  for (int n : actions.dims()) p.push_back(synthetic_error_probability(n, floor, ceil, scale));
  return ErrorCurve(actions, std::move(p), std::move(snr_tag));
}

// Bernoulli(p_e(n)) draw; returns 1 on semantic error.
inline int sample_error(const ErrorCurve& curve, int n, RandomStream& rng) {
  return rng.bernoulli(curve(n)) ? 1 : 0;
}

enum class EstimatorMode { Oracle, Empirical };

/// Supplies p̂_e(N) to the controllers.
///
/// Oracle mode passes the curve through. Empirical mode keeps per-action
/// counters and returns the add-one smoothed rate (errors+1)/(trials+2),
/// which is strictly inside (0,1).
class ErrorEstimator {
 public:
  ErrorEstimator(EstimatorMode mode, const ActionSet& actions)
      : mode_(mode), trials_(actions.size(), 0), errors_(actions.size(), 0) {}

  EstimatorMode mode() const noexcept { return mode_; }

  double estimate_at(const ErrorCurve& curve, std::size_t i) const {
    if (mode_ == EstimatorMode::Oracle) return curve.at_index(i);
    return (static_cast<double>(errors_[i]) + 1.0) / (static_cast<double>(trials_[i]) + 2.0);
  }

  double estimate(const ErrorCurve& curve, int n) const {
    return estimate_at(curve, curve.actions().require_index(n));
  }

  void record_at(std::size_t i, int e) {
    if (mode_ == EstimatorMode::Oracle) return;
    ++trials_[i];
    errors_[i] += static_cast<std::uint64_t>(e != 0);
  }

  void record_outcome(const ActionSet& actions, int n, int e) {
    if (e != 0 && e != 1) throw ConfigError("e", "error indicator must be 0 or 1");
    record_at(actions.require_index(n), e);
  }

  std::uint64_t trials(std::size_t i) const { return trials_[i]; }
  std::uint64_t errors(std::size_t i) const { return errors_[i]; }

 private:
  EstimatorMode mode_;
  std::vector<std::uint64_t> trials_;
  std::vector<std::uint64_t> errors_;
};

}  // namespace semrate
