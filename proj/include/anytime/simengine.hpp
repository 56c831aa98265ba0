#pragma once

// Monte Carlo operating characteristics of the five monitoring rules.
//
// Every replication draws one trial path (treatment outcome, then control
// outcome, pair by pair) from its own counter-derived stream; all rules are
// evaluated on the same stored paths (common random numbers). Calibration
// paths come from streams tagged differently from the evaluation paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anytime/comparators.hpp"
#include "anytime/confseq.hpp"
#include "anytime/core.hpp"
#include "anytime/design.hpp"
#include "anytime/error.hpp"
#include "anytime/futility.hpp"
#include "anytime/rng.hpp"

namespace anytime {

/// Cumulative counts after each pair for a batch of simulated trials:
/// treatment successes, control successes and favorable discordant pairs.
class PathSet {
 public:
  PathSet() = default;

  static PathSet simulate(double p_T, double p_C, std::int64_t n_max, std::int64_t reps, std::uint64_t seed,
                          std::uint64_t experiment_tag, std::size_t workers = rng::default_workers()) {
    if (n_max < 1 || n_max > 65535) throw ArgumentError("n_max must lie in [1, 65535]");
    if (reps < 1) throw ArgumentError("reps must be positive");
    PathSet ps;
    ps.n_max_ = n_max;
    ps.reps_ = reps;
    const auto cells = static_cast<std::size_t>(n_max * reps);
    ps.s_T_.resize(cells);
    ps.s_C_.resize(cells);
    ps.n_plus_.resize(cells);
    rng::parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t begin, std::size_t end) {
      const rng::Bernoulli bt(p_T), bc(p_C);
      for (std::size_t r = begin; r < end; ++r) {
        rng::Xoshiro256pp gen(rng::stream_seed(seed, experiment_tag, r));
        const std::size_t base = r * static_cast<std::size_t>(n_max);
        std::uint16_t st = 0, sc = 0, np = 0;
        for (std::int64_t i = 0; i < n_max; ++i) {
          const bool xt = bt(gen), xc = bc(gen);
          st = static_cast<std::uint16_t>(st + xt);
          sc = static_cast<std::uint16_t>(sc + xc);
          np = static_cast<std::uint16_t>(np + (xt && !xc));
          ps.s_T_[base + i] = st;
          ps.s_C_[base + i] = sc;
          ps.n_plus_[base + i] = np;
        }
      }
    });
    return ps;
  }

  [[nodiscard]] std::int64_t n_max() const noexcept { return n_max_; }
  [[nodiscard]] std::int64_t reps() const noexcept { return reps_; }

  const std::uint16_t* s_T(std::size_t r) const noexcept { return s_T_.data() + r * static_cast<std::size_t>(n_max_); }
  const std::uint16_t* s_C(std::size_t r) const noexcept { return s_C_.data() + r * static_cast<std::size_t>(n_max_); }

  /// Counts after n pairs of replication r (n is 1-based).
  [[nodiscard]] TwoArmCounts counts(std::size_t r, std::int64_t n) const noexcept {
    const auto i = r * static_cast<std::size_t>(n_max_) + static_cast<std::size_t>(n - 1);
    return {s_T_[i], n, s_C_[i], n};
  }

  /// Log-wealth after n pairs of a fixed-lambda e-process (treatment higher).
  [[nodiscard]] double log_wealth(std::size_t r, std::int64_t n, double log_up, double log_down) const noexcept {
    const auto i = r * static_cast<std::size_t>(n_max_) + static_cast<std::size_t>(n - 1);
    const int plus = n_plus_[i];
    const int minus = plus - (int{s_T_[i]} - int{s_C_[i]});
    return plus * log_up + minus * log_down;
  }

 private:
  std::int64_t n_max_ = 0;
  std::int64_t reps_ = 0;
  std::vector<std::uint16_t> s_T_, s_C_, n_plus_;
};

// ---------------------------------------------------------------------------
// rules

enum class RuleKind { naive_p, gs_calibrated, evalue, bayes_naive, bayes_calibrated };

struct RuleSpec {
  RuleKind kind = RuleKind::evalue;
  double lambda = 0.0;     // evalue; 0 selects the GROW fraction of the design alternative
  double threshold = 0.0;  // bayes_naive; 0 selects 1 - alpha

  [[nodiscard]] std::string id() const {
    switch (kind) {
      case RuleKind::naive_p: return "naive_p";
      case RuleKind::gs_calibrated: return "gs_calibrated";
      case RuleKind::bayes_naive: return "bayes_naive";
      case RuleKind::bayes_calibrated: return "bayes_calibrated";
      case RuleKind::evalue: {
        if (lambda <= 0.0) return "evalue";
        char buf[48];
        std::snprintf(buf, sizeof buf, "evalue(%g)", lambda);
        return buf;
      }
    }
    return "?";
  }
};

/// Parses naive_p, gs_calibrated, bayes_naive, bayes_calibrated, evalue, evalue(0.2), bayes_naive(0.99).
inline RuleSpec rule_from_string(const std::string& s) {
  const auto open = s.find('(');
  const std::string name = s.substr(0, open);
  std::optional<double> arg;
  if (open != std::string::npos) {
    if (s.back() != ')') throw ArgumentError("malformed rule '" + s + "'");
    try {
      arg = std::stod(s.substr(open + 1, s.size() - open - 2));
    } catch (const std::exception&) {
      throw ArgumentError("malformed rule argument in '" + s + "'");
    }
  }
  RuleSpec r;
  if (name == "naive_p") r.kind = RuleKind::naive_p;
  else if (name == "gs_calibrated" || name == "gs") r.kind = RuleKind::gs_calibrated;
  else if (name == "evalue") r.kind = RuleKind::evalue;
  else if (name == "bayes_naive") r.kind = RuleKind::bayes_naive;
  else if (name == "bayes_calibrated") r.kind = RuleKind::bayes_calibrated;
  else throw ArgumentError("unknown rule '" + s + "'");
  if (arg) {
    if (r.kind == RuleKind::evalue) {
      if (!(*arg > 0.0 && *arg < 1.0)) throw ArgumentError("evalue lambda must lie in (0, 1)");
      r.lambda = *arg;
    } else if (r.kind == RuleKind::bayes_naive) {
      if (!(*arg > 0.0 && *arg < 1.0)) throw ArgumentError("posterior threshold must lie in (0, 1)");
      r.threshold = *arg;
    } else {
      throw ArgumentError("rule '" + name + "' takes no argument");
    }
  }
  return r;
}

inline std::vector<RuleSpec> default_rules() {
  return {{RuleKind::evalue}, {RuleKind::gs_calibrated}, {RuleKind::naive_p}, {RuleKind::bayes_naive},
          {RuleKind::bayes_calibrated}};
}

/// Constants a rule needs beyond its own spec.
struct RuleConstants {
  double gs_c = std::numeric_limits<double>::quiet_NaN();
  double bayes_threshold = std::numeric_limits<double>::quiet_NaN();
  double design_lambda = 0.0;
  double alpha = 0.025;
  BayesRule bayes;
};

/// First look at which the rule rejects, per replication; 0 when it never does.
inline std::vector<std::int32_t> evaluate_rule(const PathSet& paths, const LookSchedule& schedule, const RuleSpec& rule,
                                               const RuleConstants& k, std::size_t workers = rng::default_workers()) {
  if (schedule.n_max() != paths.n_max()) throw ArgumentError("schedule and paths disagree on n_max");
  const auto reps = static_cast<std::size_t>(paths.reps());
  std::vector<std::int32_t> stop(reps, 0);
  const double n_max = static_cast<double>(paths.n_max());
  const auto wald = schedule.wald_looks();
  const auto& looks = schedule.looks();

  switch (rule.kind) {
    case RuleKind::naive_p:
    case RuleKind::gs_calibrated: {
      const bool gs = rule.kind == RuleKind::gs_calibrated;
      if (gs && std::isnan(k.gs_c)) throw StateError("group sequential rule needs a calibrated c");
      std::vector<double> bound(wald.size());
      for (std::size_t j = 0; j < wald.size(); ++j) {
        bound[j] = gs ? obf_boundary_at(k.gs_c, static_cast<double>(wald[j]) / n_max) : normal_quantile(1.0 - k.alpha);
      }
      rng::parallel_for(reps, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          for (std::size_t j = 0; j < wald.size(); ++j) {
            if (wald_z(paths.counts(r, wald[j])) >= bound[j]) {
              stop[r] = static_cast<std::int32_t>(wald[j]);
              break;
            }
          }
        }
      });
      break;
    }
    case RuleKind::evalue: {
      const double lambda = rule.lambda > 0.0 ? rule.lambda : k.design_lambda;
      if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("e-value rule needs lambda in (0, 1)");
      const double up = std::log1p(lambda), down = std::log1p(-lambda), thr = -std::log(k.alpha);
      rng::parallel_for(reps, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          for (auto n : looks) {
            if (paths.log_wealth(r, n, up, down) >= thr) {
              stop[r] = static_cast<std::int32_t>(n);
              break;
            }
          }
        }
      });
      break;
    }
    case RuleKind::bayes_naive:
    case RuleKind::bayes_calibrated: {
      const double thr = rule.kind == RuleKind::bayes_naive
                             ? (rule.threshold > 0.0 ? rule.threshold : 1.0 - k.alpha)
                             : k.bayes_threshold;
      if (std::isnan(thr)) throw StateError("calibrated Bayesian rule needs a threshold");
      rng::parallel_for(reps, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          for (auto n : looks) {
            if (k.bayes.posterior(paths.counts(r, n)) > thr) {
              stop[r] = static_cast<std::int32_t>(n);
              break;
            }
          }
        }
      });
      break;
    }
  }
  return stop;
}

/// c from stored null paths (same quantile convention as calibrate_obf).
inline double calibrate_obf_from_paths(const PathSet& null_paths, const LookSchedule& schedule, double alpha,
                                       std::size_t workers = rng::default_workers()) {
  const auto looks = schedule.wald_looks();
  std::vector<double> stat(static_cast<std::size_t>(null_paths.reps()));
  rng::parallel_for(stat.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      stat[r] = obf_max_statistic(null_paths.s_T(r), null_paths.s_C(r), looks, null_paths.n_max());
    }
  });
  return upper_quantile(stat, 1.0 - alpha);
}

inline BayesCalibration calibrate_bayes_from_paths(const PathSet& null_paths, const LookSchedule& schedule,
                                                   double alpha, const BayesRule& rule,
                                                   std::size_t workers = rng::default_workers()) {
  const auto& looks = schedule.looks();
  std::vector<double> stat(static_cast<std::size_t>(null_paths.reps()));
  rng::parallel_for(stat.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double m = 0.0;
      for (auto n : looks) m = std::max(m, rule.posterior(null_paths.counts(r, n)));
      stat[r] = m;
    }
  });
  const double q = upper_quantile(stat, 1.0 - alpha);
  return {q, round_threshold_up(q)};
}

// ---------------------------------------------------------------------------
// comparison

struct SimulationConfig {
  double p_T_null = 0.30;
  double p_T_alt = 0.45;
  double p_C = 0.30;
  std::int64_t n_max = 200;
  LookSchedule schedule = LookSchedule::fixed(20, 200);
  double alpha = 0.025;
  std::vector<RuleSpec> rules = default_rules();
  std::int64_t reps = 50'000;
  std::int64_t calibration_reps = 0;  // 0: same as reps
  std::uint64_t master_seed = 0;
  BayesRule bayes;                    // prior and posterior method; threshold unused
  std::optional<double> gs_c;         // skip calibration when given
  std::optional<double> bayes_threshold;
  std::size_t workers = rng::default_workers();

  void validate() const {
    check_alpha(alpha);
    for (double p : {p_T_null, p_T_alt, p_C}) {
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("probabilities must lie in (0, 1)");
    }
    if (reps < 1) throw ConfigError("reps must be positive");
    if (calibration_reps < 0) throw ConfigError("calibration_reps must be nonnegative");
    if (rules.empty()) throw ConfigError("at least one rule is required");
    if (schedule.n_max() != n_max) throw ConfigError("schedule n_max differs from n_max");
  }

  [[nodiscard]] std::int64_t effective_calibration_reps() const { return calibration_reps > 0 ? calibration_reps : reps; }
};

struct RuleResult {
  std::string rule;
  double reject_rate_null = 0.0;
  double reject_rate_alt = 0.0;
  double se_null = 0.0;
  double se_alt = 0.0;
  double avg_n_null = 0.0;
  double avg_n_alt = 0.0;
};

/// Agreement of two rules on the alternative paths.
struct Concordance {
  std::string first, second;
  double both = 0.0, neither = 0.0, first_only = 0.0, second_only = 0.0;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<RuleResult> results;
  std::vector<Concordance> concordance;
  std::optional<double> gs_c;
  std::optional<BayesCalibration> bayes;
  double design_lambda = 0.0;
  bool low_precision = false;

  [[nodiscard]] const RuleResult& result(const std::string& id) const {
    for (const auto& r : results) {
      if (r.rule == id) return r;
    }
    throw ArgumentError("no result for rule '" + id + "'");
  }
};

struct Progress {
  std::int64_t done;
  std::int64_t total;
  std::map<std::string, std::pair<double, double>> partial_rates;  // rule -> (null, alt)
};
using ProgressFn = std::function<void(const Progress&)>;

namespace detail {

struct Summary {
  double rate, se, avg_n;
};

inline Summary summarize(const std::vector<std::int32_t>& stop, std::int64_t n_max) {
  std::int64_t rejects = 0, total_n = 0;
  for (auto s : stop) {
    rejects += s > 0;
    total_n += s > 0 ? s : n_max;
  }
  const double R = static_cast<double>(stop.size());
  const double rate = static_cast<double>(rejects) / R;
  return {rate, std::sqrt(rate * (1.0 - rate) / R), static_cast<double>(total_n) / R};
}

inline Concordance concordance(const std::string& a, const std::vector<std::int32_t>& sa, const std::string& b,
                               const std::vector<std::int32_t>& sb) {
  std::int64_t both = 0, neither = 0, a_only = 0, b_only = 0;
  for (std::size_t r = 0; r < sa.size(); ++r) {
    const bool x = sa[r] > 0, y = sb[r] > 0;
    both += x && y;
    neither += !x && !y;
    a_only += x && !y;
    b_only += !x && y;
  }
  const double R = static_cast<double>(sa.size());
  return {a, b, both / R, neither / R, a_only / R, b_only / R};
}

inline bool needs(const std::vector<RuleSpec>& rules, RuleKind k) {
  return std::any_of(rules.begin(), rules.end(), [k](const RuleSpec& r) { return r.kind == k; });
}

inline double design_lambda_for(double p_T, double p_C, double alpha) {
  if (p_T <= p_C) return 0.0;
  return grow_lambda({p_T, p_C, Direction::treatment_higher, alpha});
}

}  // namespace detail

inline constexpr std::uint64_t kTagCalibration = rng::tag("calibration-null");
inline constexpr std::uint64_t kTagNull = rng::tag("evaluation-null");
inline constexpr std::uint64_t kTagAlt = rng::tag("evaluation-alt");

/// Evaluates every configured rule under the null and the alternative. A rule
/// stops at its first crossing; trials that never cross count n_max pairs.
inline SimulationReport simulate_comparison(const SimulationConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();
  SimulationReport rep;
  rep.config = cfg;
  rep.low_precision = cfg.reps < 1000;
  rep.design_lambda = detail::design_lambda_for(cfg.p_T_alt, cfg.p_C, cfg.alpha);

  const bool need_gs = detail::needs(cfg.rules, RuleKind::gs_calibrated) && !cfg.gs_c;
  const bool need_bayes = detail::needs(cfg.rules, RuleKind::bayes_calibrated) && !cfg.bayes_threshold;
  const std::int64_t total = static_cast<std::int64_t>(cfg.rules.size()) + 1;

  RuleConstants k;
  k.alpha = cfg.alpha;
  k.bayes = cfg.bayes;
  k.design_lambda = rep.design_lambda;
  if (cfg.gs_c) k.gs_c = *cfg.gs_c;
  if (cfg.bayes_threshold) k.bayes_threshold = *cfg.bayes_threshold;
  if (need_gs || need_bayes) {
    const auto cal = PathSet::simulate(cfg.p_T_null, cfg.p_C, cfg.n_max, cfg.effective_calibration_reps(),
                                       cfg.master_seed, kTagCalibration, cfg.workers);
    if (need_gs) k.gs_c = calibrate_obf_from_paths(cal, cfg.schedule, cfg.alpha, cfg.workers);
    if (need_bayes) {
      const auto b = calibrate_bayes_from_paths(cal, cfg.schedule, cfg.alpha, cfg.bayes, cfg.workers);
      k.bayes_threshold = b.threshold;
      rep.bayes = b;
    }
  }
  if (detail::needs(cfg.rules, RuleKind::gs_calibrated)) rep.gs_c = k.gs_c;
  if (cfg.bayes_threshold) rep.bayes = BayesCalibration{*cfg.bayes_threshold, *cfg.bayes_threshold};

  Progress prog{1, total, {}};
  if (progress) progress(prog);

  const auto null_paths = PathSet::simulate(cfg.p_T_null, cfg.p_C, cfg.n_max, cfg.reps, cfg.master_seed, kTagNull, cfg.workers);
  const auto alt_paths = PathSet::simulate(cfg.p_T_alt, cfg.p_C, cfg.n_max, cfg.reps, cfg.master_seed, kTagAlt, cfg.workers);

  std::vector<std::vector<std::int32_t>> alt_stops;
  for (const auto& rule : cfg.rules) {
    const auto s0 = detail::summarize(evaluate_rule(null_paths, cfg.schedule, rule, k, cfg.workers), cfg.n_max);
    auto stops = evaluate_rule(alt_paths, cfg.schedule, rule, k, cfg.workers);
    const auto s1 = detail::summarize(stops, cfg.n_max);
    rep.results.push_back({rule.id(), s0.rate, s1.rate, s0.se, s1.se, s0.avg_n, s1.avg_n});
    alt_stops.push_back(std::move(stops));
    if (progress) {
      ++prog.done;
      prog.partial_rates[rule.id()] = {s0.rate, s1.rate};
      progress(prog);
    }
  }
  for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.rules.size(); ++j) {
      rep.concordance.push_back(
          detail::concordance(rep.results[i].rule, alt_stops[i], rep.results[j].rule, alt_stops[j]));
    }
  }
  return rep;
}

/// One e-value rule per lambda on common paths.
inline SimulationReport sensitivity_lambda(SimulationConfig cfg, const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ArgumentError("lambda list is empty");
  cfg.rules.clear();
  for (double l : lambdas) {
    if (!(l > 0.0 && l < 1.0)) throw ArgumentError("each lambda must lie in (0, 1)");
    cfg.rules.push_back({RuleKind::evalue, l});
  }
  return simulate_comparison(cfg);
}

// ---------------------------------------------------------------------------
// schedule study

struct ScheduleSpec {
  LookSchedule::Kind kind = LookSchedule::Kind::fixed;
  int looks = 5;
  int draws = 200;  // irregular only
  std::uint64_t seed = 0;

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case LookSchedule::Kind::fixed: return "fixed_" + std::to_string(looks);
      case LookSchedule::Kind::irregular: return "irregular_" + std::to_string(looks);
      case LookSchedule::Kind::continuous: return "continuous";
    }
    return "?";
  }
};

struct ScheduleRow {
  std::string schedule;
  std::string method;  // "gs_calibrated" or "evalue"
  double type1 = 0.0;
  double power = 0.0;
  double avg_n_alt = 0.0;
  std::optional<double> c;   // mean finite c over draws
  int infinite_c = 0;        // draws whose calibrated c is +inf
  int draws = 1;
};

/// GS recalibrated per schedule (per draw for irregular schedules, from the
/// same stored calibration paths); e-value threshold held at 1/alpha.
inline std::vector<ScheduleRow> schedule_study(const SimulationConfig& cfg, const std::vector<ScheduleSpec>& schedules) {
  cfg.validate();
  const auto cal = PathSet::simulate(cfg.p_T_null, cfg.p_C, cfg.n_max, cfg.effective_calibration_reps(),
                                     cfg.master_seed, kTagCalibration, cfg.workers);
  const auto null_paths = PathSet::simulate(cfg.p_T_null, cfg.p_C, cfg.n_max, cfg.reps, cfg.master_seed, kTagNull, cfg.workers);
  const auto alt_paths = PathSet::simulate(cfg.p_T_alt, cfg.p_C, cfg.n_max, cfg.reps, cfg.master_seed, kTagAlt, cfg.workers);
  RuleConstants k;
  k.alpha = cfg.alpha;
  k.design_lambda = detail::design_lambda_for(cfg.p_T_alt, cfg.p_C, cfg.alpha);

  std::vector<ScheduleRow> rows;
  for (const auto& spec : schedules) {
    std::vector<LookSchedule> draws;
    switch (spec.kind) {
      case LookSchedule::Kind::fixed: draws.push_back(LookSchedule::fixed(spec.looks, cfg.n_max)); break;
      case LookSchedule::Kind::continuous: draws.push_back(LookSchedule::continuous(cfg.n_max)); break;
      case LookSchedule::Kind::irregular:
        for (int d = 0; d < spec.draws; ++d) {
          draws.push_back(LookSchedule::irregular(spec.looks, cfg.n_max,
                                                  rng::stream_seed(spec.seed, rng::tag("schedule-draw"), d)));
        }
        break;
    }
    ScheduleRow gs, ev;
    gs.schedule = ev.schedule = spec.name();
    gs.method = "gs_calibrated";
    ev.method = "evalue";
    gs.draws = ev.draws = static_cast<int>(draws.size());
    double c_sum = 0.0;
    int c_finite = 0;
    for (const auto& sch : draws) {
      k.gs_c = calibrate_obf_from_paths(cal, sch, cfg.alpha, cfg.workers);
      if (std::isinf(k.gs_c)) {
        ++gs.infinite_c;
      } else {
        c_sum += k.gs_c;
        ++c_finite;
      }
      for (auto* row : {&gs, &ev}) {
        const RuleSpec rule{row == &gs ? RuleKind::gs_calibrated : RuleKind::evalue};
        const auto s0 = detail::summarize(evaluate_rule(null_paths, sch, rule, k, cfg.workers), cfg.n_max);
        const auto s1 = detail::summarize(evaluate_rule(alt_paths, sch, rule, k, cfg.workers), cfg.n_max);
        row->type1 += s0.rate;
        row->power += s1.rate;
        row->avg_n_alt += s1.avg_n;
      }
    }
    const double D = static_cast<double>(draws.size());
    for (auto* row : {&gs, &ev}) {
      row->type1 /= D;
      row->power /= D;
      row->avg_n_alt /= D;
    }
    if (c_finite > 0) gs.c = c_sum / c_finite;
    rows.push_back(gs);
    rows.push_back(ev);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// parameter grid

struct GridCell {
  double p_C = 0.0;
  double delta = 0.0;
  int looks = 0;
  double lambda_star = 0.0;
  double evalue_power = 0.0;
  double gs_power = 0.0;
  double gap = 0.0;  // gs - evalue
  double gs_c = 0.0;
};

/// E-value (lambda* per cell) and recalibrated GS power across designs. Each
/// (p_C, delta) pair owns its own calibration and evaluation streams.
inline std::vector<GridCell> parameter_grid(const std::vector<double>& p_Cs, const std::vector<double>& deltas,
                                            const std::vector<int>& look_counts, const SimulationConfig& base) {
  if (p_Cs.empty() || deltas.empty() || look_counts.empty()) throw ArgumentError("grid axes must be nonempty");
  std::vector<GridCell> cells;
  std::uint64_t cell_index = 0;
  for (double pc : p_Cs) {
    for (double d : deltas) {
      const double pt = pc + d;
      if (!(pt > 0.0 && pt < 1.0)) throw ArgumentError("p_C + delta must lie in (0, 1)");
      const std::uint64_t seed = rng::stream_seed(base.master_seed, rng::tag("grid-cell"), cell_index++);
      const auto cal = PathSet::simulate(pc, pc, base.n_max, base.effective_calibration_reps(), seed, kTagCalibration, base.workers);
      const auto alt = PathSet::simulate(pt, pc, base.n_max, base.reps, seed, kTagAlt, base.workers);
      RuleConstants k;
      k.alpha = base.alpha;
      k.design_lambda = grow_lambda({pt, pc, Direction::treatment_higher, base.alpha});
      for (int K : look_counts) {
        const auto sch = LookSchedule::fixed(K, base.n_max);
        k.gs_c = calibrate_obf_from_paths(cal, sch, base.alpha, base.workers);
        GridCell cell{pc, d, K, k.design_lambda};
        cell.gs_c = k.gs_c;
        cell.evalue_power = detail::summarize(evaluate_rule(alt, sch, {RuleKind::evalue}, k, base.workers), base.n_max).rate;
        cell.gs_power = detail::summarize(evaluate_rule(alt, sch, {RuleKind::gs_calibrated}, k, base.workers), base.n_max).rate;
        cell.gap = cell.gs_power - cell.evalue_power;
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// large-trial run

struct RecoveryConfig {
  double p_control = 0.257;    // usual care mortality
  double p_treatment = 0.229;  // treated mortality; lower is better
  std::int64_t n_max = 2000;
  double alpha = 0.025;
  double cs_alpha = 0.05;
  std::int64_t check_every = 1;
  std::int64_t reps = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = rng::default_workers();
};

struct RecoveryReport {
  RecoveryConfig config;
  double lambda_star = 0.0;
  double growth_rate = 0.0;
  std::optional<double> expected_pairs;
  double power = 0.0;
  double power_se = 0.0;
  std::optional<double> median_rejection;
  // one illustrative trial (replication index 0 of its own stream)
  std::vector<TrajectoryPoint> trajectory;
  double final_e = 1.0;
  double max_e = 1.0;
  Interval cs;
  double delta_hat = 0.0;
};

inline RecoveryReport recovery_scale_run(const RecoveryConfig& cfg) {
  if (cfg.reps < 1 || cfg.n_max < 1 || cfg.check_every < 1) throw ArgumentError("reps, n_max and check_every must be positive");
  const DesignAlternative alt{cfg.p_treatment, cfg.p_control, Direction::treatment_lower, cfg.alpha};
  RecoveryReport rep;
  rep.config = cfg;
  rep.lambda_star = grow_lambda(alt);
  rep.growth_rate = growth_rate(rep.lambda_star, alt);
  rep.expected_pairs = expected_stopping_pairs(cfg.alpha, rep.growth_rate);

  const double up = std::log1p(rep.lambda_star), down = std::log1p(-rep.lambda_star), thr = -std::log(cfg.alpha);
  std::vector<std::int32_t> stop(static_cast<std::size_t>(cfg.reps), 0);
  rng::parallel_for(stop.size(), cfg.workers, [&](std::size_t b, std::size_t e) {
    const rng::Bernoulli bt(cfg.p_treatment), bc(cfg.p_control);
    for (std::size_t r = b; r < e; ++r) {
      rng::Xoshiro256pp gen(rng::stream_seed(cfg.seed, rng::tag("recovery"), r));
      double lw = 0.0;
      for (std::int64_t i = 1; i <= cfg.n_max; ++i) {
        const bool xt = bt(gen), xc = bc(gen);
        const int d = int{xc} - int{xt};
        lw += d > 0 ? up : (d < 0 ? down : 0.0);
        if (i % cfg.check_every == 0 && lw >= thr) {
          stop[r] = static_cast<std::int32_t>(i);
          break;
        }
      }
    }
  });
  std::vector<double> rejected;
  for (auto s : stop) {
    if (s > 0) rejected.push_back(s);
  }
  const double R = static_cast<double>(cfg.reps);
  rep.power = static_cast<double>(rejected.size()) / R;
  rep.power_se = std::sqrt(rep.power * (1.0 - rep.power) / R);
  rep.median_rejection = median_of(std::move(rejected));

  rng::Xoshiro256pp gen(rng::stream_seed(cfg.seed, rng::tag("recovery-illustration"), 0));
  const rng::Bernoulli bt(cfg.p_treatment), bc(cfg.p_control);
  BettingEProcess ep(BettingStrategy::fixed(rep.lambda_star), cfg.alpha, Direction::treatment_lower, true);
  ConfidenceSequence cs({cfg.cs_alpha, 0.005, 0.2, CsMethod::plugin, Direction::treatment_lower});
  for (std::int64_t i = 0; i < cfg.n_max; ++i) {
    const bool xt = bt(gen), xc = bc(gen);
    const OutcomePair p{static_cast<std::uint8_t>(xt), static_cast<std::uint8_t>(xc)};
    ep.update(p);
    cs.update(p);
  }
  rep.trajectory = ep.trajectory();
  rep.final_e = ep.wealth();
  rep.max_e = std::exp(ep.running_sup_log_wealth());
  rep.cs = cs.interval();
  rep.delta_hat = cs.delta_hat();
  return rep;
}

}  // namespace anytime
