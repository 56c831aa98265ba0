#pragma once

// Arm-level count datasets (events out of n per arm) replayed as patient
// streams. Patient-level arrival order is not known for such data, so each
// arm's outcomes are shuffled with a seeded stream keyed by the arm id.
// Comparison i-vs-j pairs the k-th patient of arm i with the k-th of arm j.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anytime/core.hpp"
#include "anytime/error.hpp"
#include "anytime/platform.hpp"
#include "anytime/rng.hpp"

namespace anytime {

struct ArmCounts {
  std::string arm;
  std::int64_t events = 0;
  std::int64_t n = 0;
};

/// The four-arm duodenal-ulcer surgery trial: deaths out of 100 per arm.
inline std::vector<ArmCounts> novick_counts() { return {{"A", 7, 100}, {"B", 1, 100}, {"C", 1, 100}, {"D", 3, 100}}; }

/// CSV with header `arm,events,n`.
inline std::vector<ArmCounts> parse_arm_counts_csv(std::string_view text) {
  std::vector<ArmCounts> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line != "arm,events,n") throw FormatError("arm-count CSV must start with the header 'arm,events,n'");
      header = true;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream row(line);
    ArmCounts c;
    std::string ev, n;
    if (!std::getline(row, c.arm, ',') || !std::getline(row, ev, ',') || !std::getline(row, n)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected arm,events,n");
    }
    try {
      std::size_t used = 0;
      c.events = std::stoll(ev, &used);
      if (used != ev.size()) throw std::invalid_argument(ev);
      c.n = std::stoll(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line_no) + ": counts must be integers");
    }
    if (c.arm.empty() || c.n <= 0 || c.events < 0 || c.events > c.n) {
      throw FormatError("line " + std::to_string(line_no) + ": need a non-empty arm id and 0 <= events <= n, n > 0");
    }
    for (const auto& o : out) {
      if (o.arm == c.arm) throw FormatError("duplicate arm '" + c.arm + "'");
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw FormatError("arm-count CSV has no rows");
  return out;
}

/// Outcome sequence for one arm: `events` ones among `n`, Fisher-Yates
/// shuffled by a stream derived from (seed, arm id).
inline std::vector<std::uint8_t> arrival_order(const ArmCounts& arm, std::uint64_t seed) {
  std::vector<std::uint8_t> xs(static_cast<std::size_t>(arm.n), 0);
  std::fill_n(xs.begin(), arm.events, std::uint8_t{1});
  rng::Xoshiro256pp gen(rng::stream_seed(seed, rng::tag(arm.arm), 0));
  for (std::size_t i = xs.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(gen.uniform() * static_cast<double>(i));
    std::swap(xs[i - 1], xs[std::min(j, i - 1)]);
  }
  return xs;
}

using ArrivalOrders = std::map<std::string, std::vector<std::uint8_t>>;

inline ArrivalOrders arrival_orders(const std::vector<ArmCounts>& arms, std::uint64_t seed) {
  ArrivalOrders out;
  for (const auto& a : arms) out.emplace(a.arm, arrival_order(a, seed));
  return out;
}

inline const std::vector<std::uint8_t>& arm_stream(const ArrivalOrders& orders, const std::string& arm) {
  const auto it = orders.find(arm);
  if (it == orders.end()) throw ArgumentError("unknown arm '" + arm + "'");
  return it->second;
}

struct PairwiseResult {
  std::string treatment, control;
  std::int64_t events_treatment = 0, events_control = 0;
  std::int64_t n = 0;
  double final_e = 1.0;
  double max_e = 1.0;
  double av_p = 1.0;
  std::vector<TrajectoryPoint> trajectory;
};

/// E-process for "arm `treatment` has the higher event rate than `control`"
/// over the first min(n_i, n_j) pairs.
inline PairwiseResult pairwise_eprocess(const ArrivalOrders& orders, const std::string& treatment,
                                        const std::string& control, double lambda, double alpha) {
  const auto& xt = arm_stream(orders, treatment);
  const auto& xc = arm_stream(orders, control);
  BettingEProcess ep(BettingStrategy::fixed(lambda), alpha, Direction::treatment_higher, true);
  PairwiseResult r;
  r.treatment = treatment;
  r.control = control;
  const std::size_t n = std::min(xt.size(), xc.size());
  for (std::size_t i = 0; i < n; ++i) {
    ep.update({xt[i], xc[i]});
    r.events_treatment += xt[i];
    r.events_control += xc[i];
  }
  r.n = static_cast<std::int64_t>(n);
  r.final_e = ep.wealth();
  r.max_e = std::exp(ep.running_sup_log_wealth());
  r.av_p = ep.av_pvalue();
  r.trajectory = ep.trajectory();
  return r;
}

/// Comparisons reported for the four-arm trial: higher mortality of the worse
/// arms against each better one.
inline std::vector<std::pair<std::string, std::string>> novick_comparisons() {
  return {{"A", "B"}, {"A", "C"}, {"A", "D"}, {"D", "B"}, {"D", "C"}};
}

/// Design alternative 6% vs 1%: GROW fraction 0.7267.
inline constexpr double kNovickDesignTreatment = 0.06;
inline constexpr double kNovickDesignControl = 0.01;

struct PlatformLook {
  std::int64_t n = 0;  // patients per arm consumed so far
  std::vector<std::pair<std::string, double>> wealth;
  std::vector<std::string> rejections;
};

struct PlatformReplay {
  std::vector<PlatformLook> looks;
  Platform platform;
};

/// Shared-control replay: patients enter one per arm per step (control
/// first), e-BH on current wealth at each look.
inline PlatformReplay platform_replay(const ArrivalOrders& orders, const std::string& control,
                                      const std::vector<std::string>& arms, const std::vector<std::int64_t>& looks,
                                      PlatformConfig cfg) {
  cfg.max_arms = std::max<int>(cfg.max_arms, static_cast<int>(arms.size()));
  Platform platform(cfg);
  for (const auto& a : arms) platform.add_arm(a);
  const auto& xc = arm_stream(orders, control);
  std::size_t steps = xc.size();
  for (const auto& a : arms) steps = std::min(steps, arm_stream(orders, a).size());
  std::vector<PlatformLook> out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    platform.add_control(xc[i]);
    for (const auto& a : arms) {
      if (platform.get(a).status == ArmStatus::active) platform.add_treatment(a, arm_stream(orders, a)[i]);
    }
    while (next < looks.size() && looks[next] == static_cast<std::int64_t>(i + 1)) {
      PlatformLook look;
      look.n = looks[next];
      for (const auto& arm : platform.arms()) look.wealth.emplace_back(arm.id, arm.eprocess.wealth());
      look.rejections = platform.ebh_rejections();
      out.push_back(std::move(look));
      ++next;
    }
  }
  return {std::move(out), std::move(platform)};
}

}  // namespace anytime
