#pragma once

// Futility monitoring.
//
// Reciprocal route: under H0': delta >= delta_min the centered increment
// D' = delta_min - D has mean <= 0, so prod (1 + l' D') is a nonnegative
// supermartingale whenever 0 < l' <= 1/(1 - delta_min). Wealth reaching
// 1/alpha_f is evidence that the effect is smaller than clinically relevant.
//
// CS route: futility once the upper end of a confidence sequence drops
// below delta_min.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anytime/confseq.hpp"
#include "anytime/core.hpp"
#include "anytime/error.hpp"
#include "anytime/rng.hpp"

namespace anytime {

struct FutilityConfig {
  double delta_min = 0.1;
  double alpha_f = 0.1;
  double lambda_prime = 0.3;

  [[nodiscard]] double lambda_max() const { return 1.0 / (1.0 - delta_min); }

  /// min(0.3, 1/(1 - delta_min)).
  static double default_lambda(double delta_min) { return std::min(0.3, 1.0 / (1.0 - delta_min)); }

  static FutilityConfig with_defaults(double delta_min, double alpha_f = 0.1) {
    FutilityConfig c{delta_min, alpha_f, default_lambda(delta_min)};
    c.validate();
    return c;
  }

  void validate() const {
    if (!(delta_min > 0.0 && delta_min < 1.0)) throw ConfigError("delta_min must lie in (0, 1)");
    if (!(alpha_f > 0.0 && alpha_f < 1.0)) throw ConfigError("alpha_f must lie in (0, 1)");
    if (!(lambda_prime > 0.0 && lambda_prime <= lambda_max() * (1.0 + 1e-12))) {
      throw ConfigError("lambda_prime must lie in (0, 1/(1 - delta_min)]");
    }
  }

  /// Non-empty when lambda_prime sits on the admissible boundary, where a
  /// single favorable pair nearly zeroes the wealth.
  [[nodiscard]] std::optional<std::string> warning() const {
    if (lambda_prime >= lambda_max() * (1.0 - 1e-9)) {
      return "lambda_prime at the boundary 1/(1 - delta_min); one favorable pair nearly zeroes the futility wealth";
    }
    return std::nullopt;
  }
};

class ReciprocalEProcess {
 public:
  static constexpr double kFactorFloor = 1e-12;

  explicit ReciprocalEProcess(FutilityConfig cfg, Direction direction = Direction::treatment_higher)
      : cfg_(cfg), direction_(direction) {
    cfg_.validate();
  }

  /// Log-factor for increment d, floored at the boundary lambda'.
  [[nodiscard]] double log_factor(int d) const noexcept {
    return std::log(std::max(1.0 + cfg_.lambda_prime * (cfg_.delta_min - d), kFactorFloor));
  }

  void update(OutcomePair pair) {
    log_wealth_ += log_factor(pair.increment(direction_));
    sup_log_wealth_ = std::max(sup_log_wealth_, log_wealth_);
    ++n_;
  }

  [[nodiscard]] ReciprocalEProcess updated(OutcomePair pair) const {
    ReciprocalEProcess next = *this;
    next.update(pair);
    return next;
  }

  [[nodiscard]] bool signals() const noexcept { return log_wealth_ >= -std::log(cfg_.alpha_f); }
  [[nodiscard]] bool ever_signaled() const noexcept { return sup_log_wealth_ >= -std::log(cfg_.alpha_f); }

  [[nodiscard]] std::int64_t n() const noexcept { return n_; }
  [[nodiscard]] double log_wealth() const noexcept { return log_wealth_; }
  [[nodiscard]] double wealth() const noexcept { return std::exp(log_wealth_); }
  [[nodiscard]] double running_sup_log_wealth() const noexcept { return sup_log_wealth_; }
  [[nodiscard]] const FutilityConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] Direction direction() const noexcept { return direction_; }

 private:
  FutilityConfig cfg_;
  Direction direction_;
  std::int64_t n_ = 0;
  double log_wealth_ = 0.0;
  double sup_log_wealth_ = 0.0;
};

inline bool futility_cs_check(const Interval& iv, double delta_min) { return iv.hi < delta_min; }

inline bool futility_cs_check(const ConfidenceSequence& cs, double delta_min) {
  return futility_cs_check(cs.interval(), delta_min);
}

struct FutilitySimConfig {
  double p_treatment = 0.33;
  double p_control = 0.30;
  FutilityConfig futility = FutilityConfig::with_defaults(0.1, 0.1);
  ConfidenceSequenceConfig cs{0.05, 0.005, 0.2, CsMethod::plugin};
  std::int64_t n_max = 300;
  std::int64_t reps = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = rng::default_workers();
};

struct FutilitySimResult {
  double detect_rate_cs = 0.0;
  std::optional<double> median_n_cs;
  double detect_rate_recip = 0.0;
  std::optional<double> median_n_recip;
  double se_cs = 0.0;
  double se_recip = 0.0;
};

inline std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Both futility routes on the same simulated trials. Detection time is the
/// first pair at which a route signals; medians are over detecting trials.
inline FutilitySimResult futility_simulate(const FutilitySimConfig& cfg) {
  cfg.futility.validate();
  cfg.cs.validate();
  if (cfg.reps < 1 || cfg.n_max < 1) throw ArgumentError("reps and n_max must be positive");
  const auto reps = static_cast<std::size_t>(cfg.reps);
  std::vector<std::int32_t> t_cs(reps, 0), t_recip(reps, 0);
  const ConfidenceSequence cs_proto(cfg.cs);
  rng::parallel_for(reps, cfg.workers, [&](std::size_t begin, std::size_t end) {
    const rng::Bernoulli bt(cfg.p_treatment), bc(cfg.p_control);
    for (std::size_t r = begin; r < end; ++r) {
      rng::Xoshiro256pp gen(rng::stream_seed(cfg.seed, rng::tag("futility"), r));
      ConfidenceSequence cs = cs_proto;
      ReciprocalEProcess rec(cfg.futility, cfg.cs.direction);
      for (std::int64_t i = 1; i <= cfg.n_max && (t_cs[r] == 0 || t_recip[r] == 0); ++i) {
        const OutcomePair p{static_cast<std::uint8_t>(bt(gen)), static_cast<std::uint8_t>(bc(gen))};
        if (t_cs[r] == 0) {
          cs.update(p);
          if (futility_cs_check(cs, cfg.futility.delta_min)) t_cs[r] = static_cast<std::int32_t>(i);
        }
        if (t_recip[r] == 0) {
          rec.update(p);
          if (rec.signals()) t_recip[r] = static_cast<std::int32_t>(i);
        }
      }
    }
  });
  FutilitySimResult out;
  std::vector<double> n_cs, n_recip;
  for (std::size_t r = 0; r < reps; ++r) {
    if (t_cs[r] > 0) n_cs.push_back(t_cs[r]);
    if (t_recip[r] > 0) n_recip.push_back(t_recip[r]);
  }
  const double R = static_cast<double>(reps);
  out.detect_rate_cs = static_cast<double>(n_cs.size()) / R;
  out.detect_rate_recip = static_cast<double>(n_recip.size()) / R;
  out.se_cs = std::sqrt(out.detect_rate_cs * (1.0 - out.detect_rate_cs) / R);
  out.se_recip = std::sqrt(out.detect_rate_recip * (1.0 - out.detect_rate_recip) / R);
  out.median_n_cs = median_of(std::move(n_cs));
  out.median_n_recip = median_of(std::move(n_recip));
  return out;
}

}  // namespace anytime
