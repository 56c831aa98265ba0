#pragma once

// GROW design calculus for the paired binary betting e-process.
//
// Under (p_T, p_C) the increment D takes +1 with probability a = p_T(1-p_C)
// and -1 with probability b = (1-p_T)p_C, so the expected log-growth per pair
// is g(lambda) = a log(1+lambda) + b log(1-lambda), maximized at
// lambda* = (a-b)/(a+b). The design equation N ~ log(1/alpha)/g(lambda*)
// approximates the expected number of pairs to rejection.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anytime/core.hpp"
#include "anytime/error.hpp"
#include "anytime/rng.hpp"

namespace anytime {

struct DesignAlternative {
  double p_treatment = 0.0;
  double p_control = 0.0;
  Direction direction = Direction::treatment_higher;
  double alpha = 0.025;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p > 0.0 && p < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
    };
    prob(p_treatment, "p_treatment");
    prob(p_control, "p_control");
    check_alpha(alpha);
  }

  /// Probabilities of a favorable (+1) and unfavorable (-1) increment after
  /// direction normalization.
  [[nodiscard]] std::pair<double, double> discordance() const noexcept {
    double pt = p_treatment, pc = p_control;
    if (direction == Direction::treatment_lower) std::swap(pt, pc);
    return {pt * (1.0 - pc), (1.0 - pt) * pc};
  }

  /// Effect in the favorable direction.
  [[nodiscard]] double delta() const noexcept {
    return direction == Direction::treatment_higher ? p_treatment - p_control : p_control - p_treatment;
  }
};

inline double grow_lambda(const DesignAlternative& alt) {
  alt.validate();
  const auto [a, b] = alt.discordance();
  if (a < b) throw ArgumentError("alternative contradicts the stated direction");
  return (a - b) / (a + b);
}

inline double growth_rate(double lambda, const DesignAlternative& alt) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ArgumentError("lambda must lie in (0, 1)");
  alt.validate();
  const auto [a, b] = alt.discordance();
  return a * std::log1p(lambda) + b * std::log1p(-lambda);
}

/// log(1/alpha)/g, or nullopt when g <= 0 (the process does not grow).
inline std::optional<double> expected_stopping_pairs(double alpha, double g) {
  check_alpha(alpha);
  if (!(g > 0.0)) return std::nullopt;
  return -std::log(alpha) / g;
}

struct DesignGridRow {
  DesignAlternative alt;
  double lambda;
  double growth;
  std::optional<double> expected_pairs;
  bool is_optimal;
};

inline std::vector<DesignGridRow> design_grid(const std::vector<DesignAlternative>& alts,
                                              const std::vector<double>& lambdas) {
  if (alts.empty() || lambdas.empty()) throw ArgumentError("design grid needs alternatives and lambdas");
  std::vector<DesignGridRow> rows;
  rows.reserve(alts.size() * lambdas.size());
  for (const auto& alt : alts) {
    alt.validate();
    const auto [a, b] = alt.discordance();
    const double star = a >= b ? (a - b) / (a + b) : 0.0;
    for (double l : lambdas) {
      const double g = growth_rate(l, alt);
      rows.push_back({alt, l, g, expected_stopping_pairs(alt.alpha, g), std::abs(l - star) <= 1e-6});
    }
  }
  return rows;
}

/// Evenly spaced lambdas strictly inside (0, 1).
inline std::vector<double> lambda_grid(double step = 0.01) {
  if (!(step > 0.0 && step < 0.5)) throw ArgumentError("lambda grid step must lie in (0, 0.5)");
  std::vector<double> out;
  for (int i = 1;; ++i) {
    const double l = i * step;
    if (l >= 1.0 - 1e-12) break;
    out.push_back(l);
  }
  return out;
}

struct DesignReport {
  DesignAlternative alt;
  double lambda_star = 0.0;
  double growth_rate = 0.0;
  std::optional<double> expected_pairs;  // nullopt: does not terminate
  std::optional<std::int64_t> n_max_recommended;
  std::optional<double> power_at_nmax;
  std::optional<std::int64_t> power_n_max;
  std::optional<double> power_se;
  std::vector<std::string> warnings;
};

/// Fraction of `reps` simulated trials under `alt` whose fixed-lambda
/// e-process reaches 1/alpha within n_max pairs (checked after every pair).
inline double simulated_power(const DesignAlternative& alt, double lambda, std::int64_t n_max,
                              std::int64_t reps, std::uint64_t seed,
                              std::size_t workers = rng::default_workers()) {
  if (n_max < 1 || reps < 1) throw ArgumentError("n_max and reps must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ArgumentError("lambda must lie in (0, 1)");
  const double up = std::log1p(lambda), down = std::log1p(-lambda), thr = -std::log(alt.alpha);
  const int sign = alt.direction == Direction::treatment_higher ? 1 : -1;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(reps), 0);
  rng::parallel_for(hit.size(), workers, [&](std::size_t begin, std::size_t end) {
    const rng::Bernoulli bt(alt.p_treatment), bc(alt.p_control);
    for (std::size_t r = begin; r < end; ++r) {
      rng::Xoshiro256pp gen(rng::stream_seed(seed, rng::tag("design-power"), r));
      double lw = 0.0;
      for (std::int64_t i = 0; i < n_max; ++i) {
        const bool xt = bt(gen), xc = bc(gen);
        const int d = sign * (int{xt} - int{xc});
        lw += d > 0 ? up : (d < 0 ? down : 0.0);
        if (lw >= thr) {
          hit[r] = 1;
          break;
        }
      }
    }
  });
  std::int64_t k = 0;
  for (auto h : hit) k += h;
  return static_cast<double>(k) / static_cast<double>(reps);
}

struct PowerRequest {
  std::int64_t n_max;
  std::int64_t reps;
  std::uint64_t seed;
};

inline DesignReport design_report(const DesignAlternative& alt, std::optional<PowerRequest> power = {}) {
  DesignReport rep;
  rep.alt = alt;
  rep.lambda_star = grow_lambda(alt);
  if (rep.lambda_star <= 0.0) {
    rep.warnings.emplace_back("no power at null alternative");
    return rep;
  }
  rep.growth_rate = growth_rate(rep.lambda_star, alt);
  rep.expected_pairs = expected_stopping_pairs(alt.alpha, rep.growth_rate);
  if (rep.expected_pairs) rep.n_max_recommended = static_cast<std::int64_t>(std::ceil(*rep.expected_pairs));
  if (power) {
    const double pw = simulated_power(alt, rep.lambda_star, power->n_max, power->reps, power->seed);
    rep.power_at_nmax = pw;
    rep.power_n_max = power->n_max;
    rep.power_se = std::sqrt(pw * (1.0 - pw) / static_cast<double>(power->reps));
    if (pw < 0.8) rep.warnings.emplace_back("simulated power below 0.80 at n_max");
  }
  return rep;
}

}  // namespace anytime
