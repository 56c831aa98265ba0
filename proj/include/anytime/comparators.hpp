#pragma once

// The four conventional monitoring rules the e-process is compared against:
// naive repeated Wald test, O'Brien-Fleming-like boundary c/sqrt(t) calibrated
// by simulation, and naive/calibrated Bayesian posterior-probability rules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "anytime/core.hpp"
#include "anytime/error.hpp"
#include "anytime/rng.hpp"

namespace anytime {

struct TwoArmCounts {
  std::int64_t s_T = 0, n_T = 0, s_C = 0, n_C = 0;

  void validate() const {
    if (n_T < 0 || n_C < 0 || s_T < 0 || s_C < 0 || s_T > n_T || s_C > n_C) {
      throw ArgumentError("counts must satisfy 0 <= successes <= totals");
    }
  }
};

/// Wald statistics are only evaluated once each arm has this many outcomes;
/// a single pair gives a zero-variance estimate that carries no information.
inline constexpr std::int64_t kWaldMinPairs = 2;

/// Unpooled one-sided Wald z for p_T > p_C. Zero estimated variance maps to
/// 0 for equal proportions and to a signed infinity otherwise.
inline double wald_z(const TwoArmCounts& c) {
  c.validate();
  if (c.n_T < 1 || c.n_C < 1) throw ArgumentError("wald_z needs at least one outcome per arm");
  const double nt = static_cast<double>(c.n_T), nc = static_cast<double>(c.n_C);
  const double pt = static_cast<double>(c.s_T) / nt, pc = static_cast<double>(c.s_C) / nc;
  const double var = pt * (1.0 - pt) / nt + pc * (1.0 - pc) / nc;
  const double d = pt - pc;
  if (var <= 0.0) {
    if (d > 0.0) return std::numeric_limits<double>::infinity();
    if (d < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return d / std::sqrt(var);
}

inline double obf_boundary_at(double c, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("information fraction must lie in (0, 1]");
  return c / std::sqrt(t);
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// ---------------------------------------------------------------------------
// look schedules

class LookSchedule {
 public:
  enum class Kind { fixed, irregular, continuous };

  /// K equally spaced looks; the k-th at round(k n_max / K).
  static LookSchedule fixed(int looks, std::int64_t n_max) {
    check(looks, n_max);
    LookSchedule s(Kind::fixed, n_max);
    for (int k = 1; k <= looks; ++k) {
      s.looks_.push_back(static_cast<std::int64_t>(std::llround(static_cast<double>(k) * n_max / looks)));
    }
    s.count_ = looks;
    return s;
  }

  /// K-1 distinct look times drawn uniformly from {1, ..., n_max-1}, plus n_max.
  static LookSchedule irregular(int looks, std::int64_t n_max, std::uint64_t seed) {
    check(looks, n_max);
    LookSchedule s(Kind::irregular, n_max);
    s.seed_ = seed;
    s.count_ = looks;
    rng::Xoshiro256pp gen(rng::stream_seed(seed, rng::tag("irregular-schedule"), 0));
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n_max - 1));
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::int64_t>(i) + 1;
    // partial Fisher-Yates
    for (int k = 0; k < looks - 1; ++k) {
      const auto remaining = static_cast<std::uint64_t>(pool.size()) - k;
      const auto j = k + static_cast<std::size_t>(gen.uniform() * static_cast<double>(remaining));
      std::swap(pool[k], pool[j]);
    }
    s.looks_.assign(pool.begin(), pool.begin() + (looks - 1));
    std::sort(s.looks_.begin(), s.looks_.end());
    s.looks_.push_back(n_max);
    return s;
  }

  /// A look after every pair.
  static LookSchedule continuous(std::int64_t n_max) {
    if (n_max < 1) throw ConfigError("n_max must be positive");
    LookSchedule s(Kind::continuous, n_max);
    for (std::int64_t n = 1; n <= n_max; ++n) s.looks_.push_back(n);
    s.count_ = static_cast<int>(n_max);
    return s;
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::int64_t n_max() const noexcept { return n_max_; }
  [[nodiscard]] const std::vector<std::int64_t>& looks() const noexcept { return looks_; }
  [[nodiscard]] int count() const noexcept { return count_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Looks at which a Wald statistic is defined.
  [[nodiscard]] std::vector<std::int64_t> wald_looks() const {
    std::vector<std::int64_t> out;
    for (auto n : looks_) {
      if (n >= kWaldMinPairs) out.push_back(n);
    }
    return out;
  }

  [[nodiscard]] std::string describe() const {
    switch (kind_) {
      case Kind::fixed: return "fixed(" + std::to_string(count_) + ")";
      case Kind::irregular: return "irregular(" + std::to_string(count_) + ")";
      case Kind::continuous: return "continuous";
    }
    return "?";
  }

 private:
  LookSchedule(Kind k, std::int64_t n_max) : kind_(k), n_max_(n_max) {}

  static void check(int looks, std::int64_t n_max) {
    if (n_max < 1) throw ConfigError("n_max must be positive");
    if (looks < 1 || looks > n_max) throw ConfigError("look count must lie in [1, n_max]");
  }

  Kind kind_;
  std::int64_t n_max_;
  int count_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::int64_t> looks_;
};

inline const char* to_string(LookSchedule::Kind k) {
  switch (k) {
    case LookSchedule::Kind::fixed: return "fixed";
    case LookSchedule::Kind::irregular: return "irregular";
    case LookSchedule::Kind::continuous: return "continuous";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// posterior probability of superiority

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> x{}, w{};

  GaussLegendre() {
    const std::size_t m = (N + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 1; j <= N; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
        }
        pp = static_cast<double>(N) * (z * p1 - p2) / (z * z - 1.0);
        const double dz = p1 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[i] = -z;
      x[N - 1 - i] = z;
      w[i] = w[N - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
  }
};

inline const GaussLegendre<2048>& gl2048() {
  static const GaussLegendre<2048> rule;
  return rule;
}

}  // namespace detail

enum class PosteriorMethod { quadrature, normal_approx };

inline const char* to_string(PosteriorMethod m) {
  return m == PosteriorMethod::quadrature ? "quadrature" : "normal_approx";
}

/// Pr(P_T > P_C) for independent Beta(prior_a + s, prior_b + n - s) posteriors:
/// the integral of Pr(P_T > x) f_C(x) over [0, 1], taken in the angle
/// x = sin^2(theta) so that the x^(-1/2) endpoint behaviour of Jeffreys
/// posteriors becomes smooth, then a fixed 2048-node Gauss-Legendre rule.
inline double posterior_prob_superiority(const TwoArmCounts& c, double prior_a = 0.5, double prior_b = 0.5) {
  c.validate();
  if (!(prior_a > 0.0 && prior_b > 0.0)) throw ArgumentError("prior parameters must be positive");
  const double aT = prior_a + static_cast<double>(c.s_T), bT = prior_b + static_cast<double>(c.n_T - c.s_T);
  const double aC = prior_a + static_cast<double>(c.s_C), bC = prior_b + static_cast<double>(c.n_C - c.s_C);
  const double log_beta_c = std::lgamma(aC) + std::lgamma(bC) - std::lgamma(aC + bC);
  const auto& gl = detail::gl2048();
  const double half = std::numbers::pi / 4.0;  // theta in [0, pi/2]
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double theta = half * (gl.x[i] + 1.0);
    const double s = std::sin(theta), co = std::cos(theta);
    const double x = s * s;
    // f_C(x) dx/dtheta = 2 sin^(2aC-1) cos^(2bC-1) / B(aC, bC)
    const double log_density = (2.0 * aC - 1.0) * std::log(s) + (2.0 * bC - 1.0) * std::log(co) - log_beta_c;
    const double density = 2.0 * std::exp(log_density);
    if (density == 0.0) continue;
    sum += gl.w[i] * boost::math::ibetac(aT, bT, x) * density;
  }
  return std::clamp(sum * half, 0.0, 1.0);
}

/// Normal approximation to the two Beta posteriors (matched means and variances).
inline double posterior_prob_superiority_normal(const TwoArmCounts& c, double prior_a = 0.5, double prior_b = 0.5) {
  c.validate();
  auto moments = [](double a, double b) {
    const double s = a + b;
    return std::pair{a / s, a * b / (s * s * (s + 1.0))};
  };
  const auto [mt, vt] = moments(prior_a + static_cast<double>(c.s_T), prior_b + static_cast<double>(c.n_T - c.s_T));
  const auto [mc, vc] = moments(prior_a + static_cast<double>(c.s_C), prior_b + static_cast<double>(c.n_C - c.s_C));
  const double z = (mt - mc) / std::sqrt(vt + vc);
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

struct BayesRule {
  double prior_a = 0.5;
  double prior_b = 0.5;
  double threshold = 0.975;
  PosteriorMethod method = PosteriorMethod::normal_approx;

  [[nodiscard]] double posterior(const TwoArmCounts& c) const {
    return method == PosteriorMethod::quadrature ? posterior_prob_superiority(c, prior_a, prior_b)
                                                 : posterior_prob_superiority_normal(c, prior_a, prior_b);
  }
};

// ---------------------------------------------------------------------------
// simulation calibration

/// Order statistic at index ceil(q R) (1-based) of `sample`; reorders the input.
inline double upper_quantile(std::vector<double>& sample, double q) {
  if (sample.empty()) throw ArgumentError("quantile of an empty sample");
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sample.size()) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sample.size()) - 1;
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), sample.end());
  return sample[k];
}

/// Cumulative per-arm successes after each pair of one simulated trial.
struct CumulativePath {
  std::vector<std::uint16_t> s_T, s_C;
};

template <class Gen>
void draw_path(Gen& gen, const rng::Bernoulli& bt, const rng::Bernoulli& bc, std::int64_t n_max,
               std::vector<std::uint16_t>& s_T, std::vector<std::uint16_t>& s_C) {
  s_T.resize(static_cast<std::size_t>(n_max));
  s_C.resize(static_cast<std::size_t>(n_max));
  std::uint16_t st = 0, sc = 0;
  for (std::int64_t i = 0; i < n_max; ++i) {
    st = static_cast<std::uint16_t>(st + bt(gen));
    sc = static_cast<std::uint16_t>(sc + bc(gen));
    s_T[static_cast<std::size_t>(i)] = st;
    s_C[static_cast<std::size_t>(i)] = sc;
  }
}

/// max over Wald looks of z_k sqrt(t_k); -inf when the schedule has no Wald look.
inline double obf_max_statistic(const std::uint16_t* s_T, const std::uint16_t* s_C,
                                const std::vector<std::int64_t>& wald_looks, std::int64_t n_max) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto n : wald_looks) {
    const auto i = static_cast<std::size_t>(n - 1);
    const double z = wald_z({s_T[i], n, s_C[i], n});
    m = std::max(m, z * std::sqrt(static_cast<double>(n) / static_cast<double>(n_max)));
  }
  return m;
}

struct CalibrationSpec {
  double null_p = 0.3;
  double alpha = 0.025;
  std::int64_t reps = 50'000;
  std::uint64_t seed = 0;
  std::size_t workers = rng::default_workers();
};

/// c such that the OBF-like rule z_k >= c/sqrt(t_k) has simulated Type I error
/// alpha: the ceil((1-alpha) R)-th order statistic of the null max statistic.
/// Paths are drawn and discarded, so memory is one double per replication.
inline double calibrate_obf(const LookSchedule& schedule, const CalibrationSpec& spec) {
  check_alpha(spec.alpha);
  if (spec.reps < 1) throw ArgumentError("reps must be positive");
  const auto looks = schedule.wald_looks();
  const auto n_max = schedule.n_max();
  std::vector<double> stat(static_cast<std::size_t>(spec.reps));
  rng::parallel_for(stat.size(), spec.workers, [&](std::size_t begin, std::size_t end) {
    const rng::Bernoulli b(spec.null_p);
    std::vector<std::uint16_t> st, sc;
    for (std::size_t r = begin; r < end; ++r) {
      rng::Xoshiro256pp gen(rng::stream_seed(spec.seed, rng::tag("calibrate-obf"), r));
      draw_path(gen, b, b, n_max, st, sc);
      stat[r] = obf_max_statistic(st.data(), sc.data(), looks, n_max);
    }
  });
  return upper_quantile(stat, 1.0 - spec.alpha);
}

/// Rounds a calibrated posterior threshold up to the 0.001 reporting grid.
inline double round_threshold_up(double q) { return std::min(0.999999, std::ceil(q * 1000.0 - 1e-9) / 1000.0); }

struct BayesCalibration {
  double raw_quantile;
  double threshold;  // raw quantile rounded up to 0.001
};

/// Null distribution of the maximum posterior probability across looks.
inline BayesCalibration calibrate_bayes_threshold(const LookSchedule& schedule, const CalibrationSpec& spec,
                                                  BayesRule prior = {}) {
  check_alpha(spec.alpha);
  if (spec.reps < 1) throw ArgumentError("reps must be positive");
  const auto& looks = schedule.looks();
  const auto n_max = schedule.n_max();
  std::vector<double> stat(static_cast<std::size_t>(spec.reps));
  rng::parallel_for(stat.size(), spec.workers, [&](std::size_t begin, std::size_t end) {
    const rng::Bernoulli b(spec.null_p);
    std::vector<std::uint16_t> st, sc;
    for (std::size_t r = begin; r < end; ++r) {
      rng::Xoshiro256pp gen(rng::stream_seed(spec.seed, rng::tag("calibrate-bayes"), r));
      draw_path(gen, b, b, n_max, st, sc);
      double m = 0.0;
      for (auto n : looks) {
        const auto i = static_cast<std::size_t>(n - 1);
        m = std::max(m, prior.posterior({st[i], n, sc[i], n}));
      }
      stat[r] = m;
    }
  });
  const double q = upper_quantile(stat, 1.0 - spec.alpha);
  return {q, round_threshold_up(q)};
}

}  // namespace anytime
