#pragma once

// Betting e-process for paired binary outcomes.
//
// Each patient pair contributes D = x_treatment - x_control in {-1, 0, +1}.
// Under H0: p_T = p_C the increments have mean zero for every common response
// rate, so the wealth W_n = prod (1 + lambda_i D_i) is a nonnegative martingale
// with W_0 = 1 whenever every lambda_i in (0, 1) is fixed before D_i is seen.
// Ville's inequality then bounds P(sup_n W_n >= 1/alpha) by alpha.
//
// All wealth is kept in natural-log units.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anytime/error.hpp"

namespace anytime {

enum class Direction { treatment_higher, treatment_lower };

inline const char* to_string(Direction d) {
  return d == Direction::treatment_higher ? "treatment_higher" : "treatment_lower";
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "treatment_higher" || s == "higher") return Direction::treatment_higher;
  if (s == "treatment_lower" || s == "lower") return Direction::treatment_lower;
  throw ArgumentError("unknown direction '" + s + "'");
}

struct OutcomePair {
  std::uint8_t x_treatment = 0;
  std::uint8_t x_control = 0;

  /// Throws ArgumentError unless both outcomes are 0 or 1.
  static OutcomePair of(int x_treatment, int x_control) {
    if ((x_treatment != 0 && x_treatment != 1) || (x_control != 0 && x_control != 1)) {
      throw ArgumentError("binary outcomes must be 0 or 1");
    }
    return {static_cast<std::uint8_t>(x_treatment), static_cast<std::uint8_t>(x_control)};
  }

  /// D = x_T - x_C, sign-flipped when fewer treatment events are favorable.
  [[nodiscard]] int increment(Direction d = Direction::treatment_higher) const noexcept {
    const int raw = int{x_treatment} - int{x_control};
    return d == Direction::treatment_higher ? raw : -raw;
  }

  friend bool operator==(const OutcomePair&, const OutcomePair&) = default;
};

inline void check_alpha(double alpha, const char* what = "alpha") {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(std::string(what) + " must lie in (0, 1)");
  }
}

/// Wagering rule. A fixed fraction, or an adaptive rule that sees only the
/// outcomes strictly before the pair it bets on.
class BettingStrategy {
 public:
  using Rule = std::function<double(std::span<const OutcomePair> past)>;

  static BettingStrategy fixed(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
      throw ConfigError("betting fraction must lie in (0, 1)");
    }
    BettingStrategy s;
    s.lambda_ = lambda;
    s.id_ = "fixed";
    return s;
  }

  /// `rule_id` names the rule for reporting and serialization.
  static BettingStrategy adaptive(std::string rule_id, Rule rule, std::vector<double> params = {}) {
    if (!rule) throw ConfigError("adaptive strategy needs a rule");
    BettingStrategy s;
    s.id_ = std::move(rule_id);
    s.rule_ = std::make_shared<const Rule>(std::move(rule));
    s.params_ = std::move(params);
    return s;
  }

  [[nodiscard]] bool is_fixed() const noexcept { return rule_ == nullptr; }
  [[nodiscard]] double fixed_lambda() const noexcept { return lambda_; }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }

  /// Lambda for the next pair given everything observed so far.
  [[nodiscard]] double next_lambda(std::span<const OutcomePair> past) const {
    if (is_fixed()) return lambda_;
    const double l = (*rule_)(past);
    if (!(l > 0.0 && l < 1.0)) {
      throw ConfigError("adaptive rule '" + id_ + "' produced lambda outside (0, 1)");
    }
    return l;
  }

 private:
  BettingStrategy() = default;

  double lambda_ = 0.0;
  std::string id_;
  std::shared_ptr<const Rule> rule_;
  std::vector<double> params_;
};

/// Predictable plug-in GROW rule: lambda_i is the growth-optimal fraction for the
/// smoothed arm rates observed before pair i, clamped to [lo, hi].
inline BettingStrategy plugin_grow_strategy(double lo = 0.05, double hi = 0.8,
                                            Direction direction = Direction::treatment_higher) {
  if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw ConfigError("plugin_grow bounds must satisfy 0 < lo <= hi < 1");
  auto rule = [lo, hi, direction](std::span<const OutcomePair> past) {
    double st = 0.5, sc = 0.5;
    for (const auto& p : past) {
      st += p.x_treatment;
      sc += p.x_control;
    }
    const double n = static_cast<double>(past.size()) + 1.0;
    double pt = st / n, pc = sc / n;
    if (direction == Direction::treatment_lower) std::swap(pt, pc);
    const double a = pt * (1.0 - pc);
    const double b = (1.0 - pt) * pc;
    return std::clamp((a - b) / (a + b), lo, hi);
  };
  return BettingStrategy::adaptive("plugin_grow", rule, {lo, hi});
}

struct TrajectoryPoint {
  std::int64_t n;
  double log_wealth;
};

class BettingEProcess {
 public:
  BettingEProcess(BettingStrategy strategy, double alpha,
                  Direction direction = Direction::treatment_higher, bool keep_trajectory = false)
      : strategy_(std::move(strategy)), alpha_(alpha), direction_(direction),
        keep_trajectory_(keep_trajectory) {
    check_alpha(alpha_);
  }

  /// Consumes one pair. The fraction is fixed from the past before D is read.
  void update(OutcomePair pair) {
    const double lambda = strategy_.is_fixed() ? strategy_.fixed_lambda() : strategy_.next_lambda(history_);
    const int d = pair.increment(direction_);
    log_wealth_ += std::log1p(lambda * d);
    sup_log_wealth_ = std::max(sup_log_wealth_, log_wealth_);
    ++n_;
    if (!strategy_.is_fixed()) history_.push_back(pair);
    if (keep_trajectory_) trajectory_.push_back({n_, log_wealth_});
  }

  [[nodiscard]] BettingEProcess updated(OutcomePair pair) const {
    BettingEProcess next = *this;
    next.update(pair);
    return next;
  }

  /// True iff the current wealth is at least 1/alpha.
  [[nodiscard]] bool rejects() const noexcept { return log_wealth_ >= -std::log(alpha_); }

  /// True iff the wealth has ever reached 1/alpha.
  [[nodiscard]] bool ever_rejected() const noexcept { return sup_log_wealth_ >= -std::log(alpha_); }

  /// min(1, 1 / sup_{s<=n} W_s).
  [[nodiscard]] double av_pvalue() const noexcept { return std::min(1.0, std::exp(-sup_log_wealth_)); }

  [[nodiscard]] std::int64_t n() const noexcept { return n_; }
  [[nodiscard]] double log_wealth() const noexcept { return log_wealth_; }
  [[nodiscard]] double wealth() const noexcept { return std::exp(log_wealth_); }
  [[nodiscard]] double running_sup_log_wealth() const noexcept { return sup_log_wealth_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] Direction direction() const noexcept { return direction_; }
  [[nodiscard]] const BettingStrategy& strategy() const noexcept { return strategy_; }
  [[nodiscard]] const std::vector<TrajectoryPoint>& trajectory() const noexcept { return trajectory_; }

 private:
  BettingStrategy strategy_;
  double alpha_;
  Direction direction_;
  bool keep_trajectory_;
  std::int64_t n_ = 0;
  double log_wealth_ = 0.0;
  double sup_log_wealth_ = 0.0;
  std::vector<OutcomePair> history_;
  std::vector<TrajectoryPoint> trajectory_;
};

/// Nonnegative evidence against a null.
class EValue {
 public:
  EValue(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (!(v >= 0.0)) throw ArgumentError("e-values are nonnegative");
  }
  [[nodiscard]] double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_;
};

/// Product of e-values; valid when the components are independent or
/// sequentially conditionally valid. Empty product is 1.
inline EValue combine_product(std::span<const EValue> es) {
  double log_sum = 0.0;
  for (const auto& e : es) {
    if (e.value() == 0.0) return EValue(0.0);
    log_sum += std::log(e.value());
  }
  return EValue(std::exp(log_sum));
}

/// Arithmetic mean; valid under arbitrary dependence.
inline EValue combine_mean(std::span<const EValue> es) {
  if (es.empty()) throw ArgumentError("mean of an empty e-value list is undefined");
  double sum = 0.0;
  for (const auto& e : es) sum += e.value();
  return EValue(sum / static_cast<double>(es.size()));
}

/// Power calibrator kappa * p^(kappa - 1); integrates to exactly 1 on [0, 1].
inline EValue calibrate_p_to_e(double p, double kappa = 0.5) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ArgumentError("kappa must lie in (0, 1)");
  if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("p must lie in (0, 1]");
  return EValue(kappa * std::pow(p, kappa - 1.0));
}

}  // namespace anytime
