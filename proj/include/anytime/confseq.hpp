#pragma once

// Time-uniform confidence sequences for the paired effect delta = E[D].
//
// betting: for every delta on a grid, two one-sided centered betting processes
//   lower: prod (1 + l (D_i - delta))   grows when the effect exceeds delta
//   upper: prod (1 - l (D_i - delta))   grows when the effect is below delta
// each tested at alpha/2. A grid point is excluded once either running
// supremum reaches 2/alpha; the reported interval is the hull of survivors.
//
// plugin: dhat +- sigmahat sqrt(4 log(1/alpha) / n) with unpooled arm
// variances from smoothed rates (s + 1/2)/(n + 1). Not a supermartingale
// construction and not intersected over time (a running intersection of
// such bands empties on long streams); provided to match reference
// interval values. Only the betting interval is guaranteed never to widen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "anytime/core.hpp"
#include "anytime/error.hpp"

namespace anytime {

enum class CsMethod { betting, plugin };

inline const char* to_string(CsMethod m) { return m == CsMethod::betting ? "betting" : "plugin"; }

inline CsMethod cs_method_from_string(const std::string& s) {
  if (s == "betting") return CsMethod::betting;
  if (s == "plugin") return CsMethod::plugin;
  throw ArgumentError("unknown confidence sequence method '" + s + "'");
}

struct ConfidenceSequenceConfig {
  double alpha = 0.05;
  double resolution = 0.005;
  double lambda_cs = 0.2;
  CsMethod method = CsMethod::betting;
  Direction direction = Direction::treatment_higher;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("confidence sequence alpha must lie in (0, 1)");
    if (!(resolution > 0.0 && resolution <= 0.1)) throw ConfigError("grid resolution must lie in (0, 0.1]");
    if (!(lambda_cs > 0.0 && lambda_cs < 1.0)) throw ConfigError("lambda_cs must lie in (0, 1)");
  }
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  bool anomalous = false;  // every grid point excluded; reported as a point
};

class ConfidenceSequence {
 public:
  static constexpr double kFactorFloor = 1e-6;

  explicit ConfidenceSequence(ConfidenceSequenceConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.method == CsMethod::betting) init_grid();
  }

  void update(OutcomePair pair) {
    const int d = pair.increment(cfg_.direction);
    ++n_;
    sum_d_ += d;
    const bool higher = cfg_.direction == Direction::treatment_higher;
    s_fav_ += higher ? pair.x_treatment : pair.x_control;
    s_ref_ += higher ? pair.x_control : pair.x_treatment;
    if (cfg_.method == CsMethod::betting) {
      update_betting(d);
    } else {
      update_plugin();
    }
  }

  [[nodiscard]] ConfidenceSequence updated(OutcomePair pair) const {
    ConfidenceSequence next = *this;
    next.update(pair);
    return next;
  }

  [[nodiscard]] Interval interval() const noexcept { return current_; }

  /// Empirical mean increment; 0 before any data.
  [[nodiscard]] double delta_hat() const noexcept {
    return n_ == 0 ? 0.0 : static_cast<double>(sum_d_) / static_cast<double>(n_);
  }

  [[nodiscard]] std::int64_t n() const noexcept { return n_; }
  [[nodiscard]] const ConfidenceSequenceConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::size_t grid_size() const noexcept { return grid_.size(); }
  [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }

  /// Running suprema of the two one-sided log-wealths at grid index j.
  [[nodiscard]] std::pair<double, double> suprema(std::size_t j) const { return {sup_lo_.at(j), sup_hi_.at(j)}; }

 private:
  void init_grid() {
    const auto steps = static_cast<std::size_t>(std::llround(2.0 / cfg_.resolution));
    grid_.resize(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
      grid_[j] = std::min(1.0, -1.0 + static_cast<double>(j) * cfg_.resolution);
    }
    // D takes three values, so each grid column needs three log-factors per side.
    for (int k = 0; k < 3; ++k) {
      log_lo_[k].resize(grid_.size());
      log_hi_[k].resize(grid_.size());
    }
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double delta = grid_[j];
      const double l = std::min(cfg_.lambda_cs, (1.0 - kFactorFloor) / (1.0 + std::abs(delta)));
      for (int k = 0; k < 3; ++k) {
        const double x = static_cast<double>(k - 1) - delta;
        log_lo_[k][j] = std::log(std::max(1.0 + l * x, kFactorFloor));
        log_hi_[k][j] = std::log(std::max(1.0 - l * x, kFactorFloor));
      }
    }
    lw_lo_.assign(grid_.size(), 0.0);
    lw_hi_.assign(grid_.size(), 0.0);
    sup_lo_.assign(grid_.size(), 0.0);
    sup_hi_.assign(grid_.size(), 0.0);
  }

  void update_betting(int d) {
    const auto& flo = log_lo_[d + 1];
    const auto& fhi = log_hi_[d + 1];
    const double thr = std::log(2.0 / cfg_.alpha);
    std::size_t first = grid_.size(), last = 0;
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      lw_lo_[j] += flo[j];
      lw_hi_[j] += fhi[j];
      sup_lo_[j] = std::max(sup_lo_[j], lw_lo_[j]);
      sup_hi_[j] = std::max(sup_hi_[j], lw_hi_[j]);
      const double score = std::max(sup_lo_[j], sup_hi_[j]);
      if (score < thr) {
        first = std::min(first, j);
        last = j;
      }
      if (score < best_score) {
        best_score = score;
        best = j;
      }
    }
    if (first < grid_.size()) {
      current_ = {grid_[first], grid_[last], false};
    } else {
      current_ = {grid_[best], grid_[best], true};
    }
  }

  void update_plugin() {
    const double n = static_cast<double>(n_);
    const double q1 = (static_cast<double>(s_fav_) + 0.5) / (n + 1.0);
    const double q0 = (static_cast<double>(s_ref_) + 0.5) / (n + 1.0);
    const double sigma = std::sqrt(q1 * (1.0 - q1) + q0 * (1.0 - q0));
    const double hw = sigma * std::sqrt(4.0 * std::log(1.0 / cfg_.alpha) / n);
    const double dh = delta_hat();
    current_ = {std::max(-1.0, dh - hw), std::min(1.0, dh + hw), false};
  }

  ConfidenceSequenceConfig cfg_;
  std::int64_t n_ = 0;
  std::int64_t sum_d_ = 0;
  std::int64_t s_fav_ = 0, s_ref_ = 0;
  Interval current_;
  std::vector<double> grid_;
  std::vector<double> log_lo_[3], log_hi_[3];
  std::vector<double> lw_lo_, lw_hi_, sup_lo_, sup_hi_;
};

}  // namespace anytime
