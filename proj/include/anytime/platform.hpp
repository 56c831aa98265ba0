#pragma once

// Platform trials with a shared control arm.
//
// Every experimental arm k runs its own betting e-process against
// H0(k): p_k = p_C. Control outcomes form one ordered ledger; arm k keeps a
// cursor into it and pairs its i-th treated outcome with the next control
// outcome at or after its entry, so arms that enter late are compared with
// concurrent controls only. Treated outcomes that arrive before a matching
// control wait in a per-arm queue.
//
// Shared controls make the arm e-processes dependent; e-BH stays valid under
// arbitrary dependence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anytime/comparators.hpp"
#include "anytime/core.hpp"
#include "anytime/error.hpp"
#include "anytime/futility.hpp"

namespace anytime {

/// e-BH: with e-values sorted descending, k = max{k : e_(k) >= K/(alpha k)};
/// rejects the k largest. Returns input indices in rejection order (ties keep
/// input order).
inline std::vector<std::size_t> ebh(std::span<const EValue> es, double fdr_alpha) {
  check_alpha(fdr_alpha, "fdr_alpha");
  const std::size_t K = es.size();
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return es[a].value() > es[b].value(); });
  std::size_t k_hat = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    if (es[order[k - 1]].value() >= static_cast<double>(K) / (fdr_alpha * static_cast<double>(k))) k_hat = k;
  }
  order.resize(k_hat);
  return order;
}

enum class ArmStatus { active, graduated, dropped, frozen };

inline const char* to_string(ArmStatus s) {
  switch (s) {
    case ArmStatus::active: return "active";
    case ArmStatus::graduated: return "graduated";
    case ArmStatus::dropped: return "dropped";
    case ArmStatus::frozen: return "frozen";
  }
  return "?";
}

struct PlatformConfig {
  double total_alpha = 0.025;  // efficacy budget, split across arm slots
  int max_arms = 3;            // planned arm slots; default alpha_k = total_alpha / max_arms
  double fdr_alpha = 0.05;
  double lambda = 0.3125;
  Direction direction = Direction::treatment_higher;
  std::optional<FutilityConfig> futility;  // per-arm reciprocal route drops arms when set

  void validate() const {
    check_alpha(total_alpha, "total_alpha");
    check_alpha(fdr_alpha, "fdr_alpha");
    if (max_arms < 1) throw ConfigError("max_arms must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
    if (futility) futility->validate();
  }
};

struct Arm {
  std::string id;
  ArmStatus status = ArmStatus::active;
  double alpha_k = 0.0;
  BettingEProcess eprocess;
  std::optional<ReciprocalEProcess> futility;
  std::size_t cursor = 0;  // next control-ledger entry this arm will consume
  std::deque<std::uint8_t> pending;
  std::optional<std::int64_t> decided_at;  // pair count at graduation/drop
};

class Platform {
 public:
  explicit Platform(PlatformConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  /// New arm at wealth 1. alpha_k defaults to total_alpha / max_arms; the sum
  /// of allocated alpha_k may not exceed total_alpha.
  Arm& add_arm(const std::string& id, std::optional<double> alpha_k = std::nullopt) {
    if (find(id)) throw ArgumentError("arm '" + id + "' already exists");
    const double a = alpha_k.value_or(cfg_.total_alpha / cfg_.max_arms);
    check_alpha(a, "alpha_k");
    if (allocated_ + a > cfg_.total_alpha * (1.0 + 1e-12)) throw ConfigError("alpha_k allocation exceeds the efficacy budget");
    allocated_ += a;
    Arm arm{id, ArmStatus::active, a, BettingEProcess(BettingStrategy::fixed(cfg_.lambda), a, cfg_.direction), {}, 0, {}, {}};
    if (cfg_.futility) arm.futility.emplace(*cfg_.futility, cfg_.direction);
    arm.cursor = control_.size();
    arms_.push_back(std::move(arm));
    return arms_.back();
  }

  void add_control(std::uint8_t x) {
    if (x > 1) throw ArgumentError("binary outcomes must be 0 or 1");
    control_.push_back(x);
    for (auto& arm : arms_) drain(arm);
  }

  void add_treatment(const std::string& arm_id, std::uint8_t x) {
    if (x > 1) throw ArgumentError("binary outcomes must be 0 or 1");
    Arm& arm = get_mutable(arm_id);
    if (arm.status != ArmStatus::active) {
      throw StateError("arm '" + arm_id + "' is " + to_string(arm.status) + "; its e-process no longer updates");
    }
    arm.pending.push_back(x);
    drain(arm);
  }

  /// Appends the control outcome to the shared ledger and feeds the treated
  /// outcome to the arm. With a single arm this is the plain two-arm update.
  void update(const std::string& arm_id, OutcomePair pair) {
    const Arm& arm = get(arm_id);
    if (arm.status != ArmStatus::active) {
      throw StateError("arm '" + arm_id + "' is " + to_string(arm.status) + "; its e-process no longer updates");
    }
    control_.push_back(pair.x_control);
    add_treatment(arm_id, pair.x_treatment);
    for (auto& a : arms_) drain(a);
  }

  void freeze(const std::string& arm_id) { set_terminal(arm_id, ArmStatus::frozen); }
  void drop(const std::string& arm_id) { set_terminal(arm_id, ArmStatus::dropped); }

  /// e-BH across every arm using current wealth.
  [[nodiscard]] std::vector<std::string> ebh_rejections() const {
    std::vector<EValue> es;
    es.reserve(arms_.size());
    for (const auto& a : arms_) es.emplace_back(a.eprocess.wealth());
    std::vector<std::string> ids;
    for (auto i : ebh(es, cfg_.fdr_alpha)) ids.push_back(arms_[i].id);
    return ids;
  }

  [[nodiscard]] const Arm& get(const std::string& id) const {
    const Arm* a = find(id);
    if (!a) throw ArgumentError("unknown arm '" + id + "'");
    return *a;
  }

  [[nodiscard]] const std::vector<Arm>& arms() const noexcept { return arms_; }
  [[nodiscard]] const std::vector<std::uint8_t>& control_ledger() const noexcept { return control_; }
  [[nodiscard]] const PlatformConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] double allocated_alpha() const noexcept { return allocated_; }

 private:
  const Arm* find(const std::string& id) const {
    for (const auto& a : arms_) {
      if (a.id == id) return &a;
    }
    return nullptr;
  }

  Arm& get_mutable(const std::string& id) { return const_cast<Arm&>(get(id)); }

  void set_terminal(const std::string& id, ArmStatus s) {
    Arm& arm = get_mutable(id);
    if (arm.status != ArmStatus::active) throw StateError("arm '" + id + "' is already " + to_string(arm.status));
    arm.status = s;
    arm.decided_at = arm.eprocess.n();
    arm.pending.clear();
  }

  void drain(Arm& arm) {
    while (arm.status == ArmStatus::active && !arm.pending.empty() && arm.cursor < control_.size()) {
      const OutcomePair p{arm.pending.front(), control_[arm.cursor]};
      arm.pending.pop_front();
      ++arm.cursor;
      arm.eprocess.update(p);
      if (arm.futility) arm.futility->update(p);
      if (arm.eprocess.rejects()) {
        arm.status = ArmStatus::graduated;
        arm.decided_at = arm.eprocess.n();
      } else if (arm.futility && arm.futility->signals()) {
        arm.status = ArmStatus::dropped;
        arm.decided_at = arm.eprocess.n();
      }
    }
    if (arm.status != ArmStatus::active) arm.pending.clear();
  }

  PlatformConfig cfg_;
  std::vector<Arm> arms_;
  std::vector<std::uint8_t> control_;
  double allocated_ = 0.0;
};

// ---------------------------------------------------------------------------
// hybrid GS + e-process monitoring of one stream

struct HybridLookRow {
  int look = 0;
  std::int64_t n = 0;
  double info_fraction = 0.0;
  double delta_hat = 0.0;
  double z = 0.0;
  double gs_bound = 0.0;
  bool gs_reject = false;
  double log_e = 0.0;
  bool e_reject = false;
  double av_p = 1.0;
  double sup_e = 1.0;
};

/// One row per look reached by the stream. The e-process is updated after
/// every pair, so the AV p-value reflects the running supremum over all pairs;
/// both reject flags compare the look's current statistic with its threshold.
inline std::vector<HybridLookRow> hybrid_monitor(std::span<const OutcomePair> stream, const LookSchedule& schedule,
                                                 double c, double lambda, double alpha) {
  check_alpha(alpha);
  BettingEProcess ep(BettingStrategy::fixed(lambda), alpha);
  std::vector<HybridLookRow> rows;
  std::int64_t sT = 0, sC = 0;
  std::size_t next_look = 0;
  const auto& looks = schedule.looks();
  for (std::size_t i = 0; i < stream.size() && next_look < looks.size(); ++i) {
    ep.update(stream[i]);
    sT += stream[i].x_treatment;
    sC += stream[i].x_control;
    const auto n = static_cast<std::int64_t>(i + 1);
    if (n != looks[next_look]) continue;
    HybridLookRow row;
    row.look = static_cast<int>(++next_look);
    row.n = n;
    row.info_fraction = static_cast<double>(n) / static_cast<double>(schedule.n_max());
    row.delta_hat = static_cast<double>(sT - sC) / static_cast<double>(n);
    row.z = wald_z({sT, n, sC, n});
    row.gs_bound = obf_boundary_at(c, row.info_fraction);
    row.gs_reject = n >= kWaldMinPairs && row.z >= row.gs_bound;
    row.log_e = ep.log_wealth();
    row.e_reject = ep.rejects();
    row.av_p = ep.av_pvalue();
    row.sup_e = std::exp(ep.running_sup_log_wealth());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace anytime
