// Acceptance suite: one PASS/FAIL line per criterion, with the individual
// checks listed underneath. Tolerances are pinned here.
//
//   anytime_acceptance --tier smoke   reps / 10, tolerances x 3 (seconds)
//   anytime_acceptance --tier full    reference rep counts (minutes)
//
// Exit status is nonzero when any check fails that is not listed as a known
// failure; known failures still print FAIL.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "anytime/anytime.hpp"

using namespace anytime;

namespace {

constexpr std::uint64_t kSeed = 17;

std::uint64_t seed_for(const char* criterion) { return rng::stream_seed(kSeed, rng::tag(criterion), 0); }

struct Tier {
  bool full = false;
  double tol_scale = 3.0;
  std::int64_t reps(std::int64_t full_reps) const { return full ? full_reps : full_reps / 10; }
  double tol(double t) const { return t * tol_scale; }
};

class Criterion {
 public:
  Criterion(std::string name, const Tier& tier) : name_(std::move(name)), tier_(tier) {}

  /// |value - target| <= tol (tolerance scaled by tier).
  void near(const std::string& label, double value, double target, double tol, bool known = false) {
    const double t = tier_.tol(tol);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.6g (target %.6g +- %.4g)", label.c_str(), value, target, t);
    record(std::abs(value - target) <= t, buf, known);
  }

  /// Exact-tolerance check that is not widened in the smoke tier.
  void near_fixed(const std::string& label, double value, double target, double tol) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.10g (target %.10g +- %.3g)", label.c_str(), value, target, tol);
    record(std::abs(value - target) <= tol, buf, false);
  }

  void at_most(const std::string& label, double value, double bound, bool known = false) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.6g (<= %.6g)", label.c_str(), value, bound);
    record(value <= bound, buf, known);
  }

  void at_least(const std::string& label, double value, double bound, bool known = false) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.6g (>= %.6g)", label.c_str(), value, bound);
    record(value >= bound, buf, known);
  }

  void within(const std::string& label, double value, double lo, double hi) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.6g (in [%.6g, %.6g])", label.c_str(), value, lo, hi);
    record(value >= lo && value <= hi, buf, false);
  }

  void truth(const std::string& label, bool ok, bool known = false) { record(ok, label, known); }

  void note(const std::string& text) { lines_.push_back("      " + text); }

  /// Prints the verdict; returns the number of unexpected failures.
  int finish() const {
    const bool pass = failed_ == 0 && known_failed_ == 0;
    if (pass) {
      std::printf("PASS  %s\n", name_.c_str());
    } else if (failed_ == 0) {
      std::printf("FAIL  %s  [known failure, see README]\n", name_.c_str());
    } else {
      std::printf("FAIL  %s\n", name_.c_str());
    }
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
    return failed_;
  }

 private:
  void record(bool ok, const std::string& text, bool known) {
    lines_.push_back(std::string("    ") + (ok ? "ok    " : (known ? "KNOWN " : "FAIL  ")) + text);
    if (!ok) (known ? known_failed_ : failed_)++;
  }

  std::string name_;
  const Tier& tier_;
  std::vector<std::string> lines_;
  int failed_ = 0;
  int known_failed_ = 0;
};

// ---------------------------------------------------------------------------

int design_closed_form(const Tier& tier) {
  Criterion c("design: closed-form GROW fraction, growth rate, expected pairs", tier);
  const DesignAlternative base{0.45, 0.30};
  const double l = grow_lambda(base);
  c.near_fixed("lambda*(0.45, 0.30)", l, 0.3125, 1e-9);
  c.near_fixed("g(0.45, 0.30)", growth_rate(l, base), 0.023835, 1e-6);
  c.near_fixed("E[pairs](0.45, 0.30)", *expected_stopping_pairs(0.025, growth_rate(l, base)), 154.8, 0.5);
  const DesignAlternative walk{0.35, 0.20};
  const double lw = grow_lambda(walk);
  c.near_fixed("lambda*(0.35, 0.20)", lw, 0.36585, 1e-4);
  c.near_fixed("g(0.35, 0.20)", growth_rate(lw, walk), 0.0281, 5e-4);
  c.near_fixed("E[pairs](0.35, 0.20)", *expected_stopping_pairs(0.025, growth_rate(lw, walk)), 131.7, 1.0);
  const DesignAlternative rec{0.229, 0.257, Direction::treatment_lower};
  const double lr = grow_lambda(rec);
  c.near_fixed("lambda*(large trial, lower is better)", lr, 0.0760, 5e-4);
  c.near_fixed("g(large trial)", growth_rate(lr, rec), 0.001065, 2e-5);
  c.near_fixed("E[pairs](large trial)", *expected_stopping_pairs(0.025, growth_rate(lr, rec)), 3462, 10);
  return c.finish();
}

SimulationConfig base_config(const Tier& tier, const char* criterion) {
  SimulationConfig cfg;
  cfg.reps = tier.reps(50'000);
  cfg.master_seed = seed_for(criterion);
  return cfg;
}

int main_table(const Tier& tier, SimulationReport& out) {
  Criterion c("five-rule comparison: Type I error, power, average n", tier);
  out = simulate_comparison(base_config(tier, "main-table"));
  struct Row {
    const char* rule;
    double t1, t1_tol, pw, pw_tol, n, n_tol;
  };
  const Row rows[] = {{"evalue", 0.012, 0.004, 0.723, 0.012, 139.2, 3},
                      {"gs_calibrated", 0.025, 0.004, 0.861, 0.010, 139.8, 3},
                      {"naive_p", 0.148, 0.008, 0.933, 0.008, 74.2, 3},
                      {"bayes_naive", 0.135, 0.008, 0.932, 0.008, 76.2, 3},
                      {"bayes_calibrated", 0.020, 0.005, 0.688, 0.012, 133.9, 3}};
  for (const auto& r : rows) {
    const auto& res = out.result(r.rule);
    c.near(std::string(r.rule) + " type I", res.reject_rate_null, r.t1, r.t1_tol);
    c.near(std::string(r.rule) + " power", res.reject_rate_alt, r.pw, r.pw_tol);
    c.near(std::string(r.rule) + " avg n (alt)", res.avg_n_alt, r.n, r.n_tol);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: se null %.4f, se alt %.4f, avg n null %.1f", r.rule, res.se_null, res.se_alt,
                  res.avg_n_null);
    c.note(buf);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "calibrated c = %.4f, Bayesian threshold %.3f (raw quantile %.5f)", *out.gs_c,
                out.bayes->threshold, out.bayes->raw_quantile);
  c.note(buf);
  return c.finish();
}

int sensitivity(const Tier& tier) {
  Criterion c("betting-fraction sensitivity", tier);
  const std::vector<double> lambdas = {0.10, 0.20, 0.31, 0.40, 0.50};
  const std::vector<double> powers = {0.119, 0.642, 0.722, 0.685, 0.589};
  const auto rep = sensitivity_lambda(base_config(tier, "sensitivity"), lambdas);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& r = rep.results[i];
    c.near(r.rule + " power", r.reject_rate_alt, powers[i], 0.015);
    c.at_most(r.rule + " type I", r.reject_rate_null, 0.025);
  }
  return c.finish();
}

int schedules(const Tier& tier) {
  Criterion c("monitoring schedules: recalibrated GS vs e-value", tier);
  auto cfg = base_config(tier, "schedules");
  const int draws = tier.full ? 200 : 20;
  const std::vector<ScheduleSpec> specs = {{LookSchedule::Kind::continuous, 200, 1, 0},
                                           {LookSchedule::Kind::fixed, 5, 1, 0},
                                           {LookSchedule::Kind::irregular, 5, draws, seed_for("schedule-draws")}};
  const auto rows = schedule_study(cfg, specs);
  auto row = [&](const std::string& s, const std::string& m) -> const ScheduleRow& {
    for (const auto& r : rows) {
      if (r.schedule == s && r.method == m) return r;
    }
    throw std::logic_error("missing schedule row");
  };
  c.near("continuous GS power", row("continuous", "gs_calibrated").power, 0.100, 0.02);
  c.near("continuous GS type I", row("continuous", "gs_calibrated").type1, 0.043, 0.01);
  c.near("continuous e-value power", row("continuous", "evalue").power, 0.750, 0.015);
  c.near("fixed-5 GS power", row("fixed_5", "gs_calibrated").power, 0.870, 0.012);
  c.near("fixed-5 e-value power", row("fixed_5", "evalue").power, 0.686, 0.015);
  c.near("irregular-5 e-value power", row("irregular_5", "evalue").power, 0.679, 0.02);
  // Each draw with a look at n = 2 has infinite c (power ~0.10); their count
  // among the draws is roughly Poisson(draws / 50), so this row is noisy.
  c.near("irregular-5 GS power", row("irregular_5", "gs_calibrated").power, 0.868, 0.02, true);
  for (const auto& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-12s %-14s type I %.4f power %.4f avg n %.1f c %s infinite-c draws %d/%d",
                  r.schedule.c_str(), r.method.c_str(), r.type1, r.power, r.avg_n_alt,
                  r.c ? io::cell(*r.c, 4).c_str() : "inf", r.infinite_c, r.draws);
    c.note(buf);
  }
  return c.finish();
}

int grid(const Tier& tier) {
  Criterion c("design grid: spot cells and GROW column", tier);
  SimulationConfig cfg;
  cfg.reps = tier.reps(20'000);
  cfg.master_seed = seed_for("grid");
  const auto a = parameter_grid({0.1}, {0.20}, {20}, cfg);
  const auto b = parameter_grid({0.3}, {0.10}, {5}, cfg);
  c.near("gap (p_C 0.1, delta 0.20, 20 looks)", a[0].gap, 0.016, 0.01);
  c.near("gap (p_C 0.3, delta 0.10, 5 looks)", b[0].gap, 0.285, 0.03);
  char buf[160];
  std::snprintf(buf, sizeof buf, "cell 1: e-value %.4f GS %.4f; cell 2: e-value %.4f GS %.4f", a[0].evalue_power,
                a[0].gs_power, b[0].evalue_power, b[0].gs_power);
  c.note(buf);
  const double pcs[] = {0.1, 0.3, 0.5};
  const double deltas[] = {0.10, 0.15, 0.20};
  const double table[3][3] = {{0.385, 0.500, 0.588}, {0.217, 0.312, 0.400}, {0.200, 0.300, 0.400}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      std::snprintf(buf, sizeof buf, "lambda* (p_C %.1f, delta %.2f)", pcs[i], deltas[j]);
      c.near_fixed(buf, grow_lambda({pcs[i] + deltas[j], pcs[i]}), table[i][j], 1e-3);
    }
  }
  return c.finish();
}

int concordance(const Tier& tier, const SimulationReport& rep) {
  Criterion c("GS / e-value concordance on the alternative", tier);
  for (const auto& k : rep.concordance) {
    if (k.first == "evalue" && k.second == "gs_calibrated") {
      c.near("both reject", k.both, 0.720, 0.012);
      c.near("neither rejects", k.neither, 0.137, 0.010);
      c.near("GS only", k.second_only, 0.141, 0.010);
      c.near("e-value only", k.first_only, 0.002, 0.003);
      return c.finish();
    }
  }
  c.truth("concordance pair present", false);
  return c.finish();
}

int futility(const Tier& tier) {
  Criterion c("futility detection: CS route and reciprocal e-process", tier);
  FutilitySimConfig cfg;
  cfg.reps = tier.reps(10'000);
  cfg.seed = seed_for("futility");
  const auto r = futility_simulate(cfg);
  c.near("CS-route detection", r.detect_rate_cs, 0.142, 0.02);
  c.near("reciprocal detection", r.detect_rate_recip, 0.535, 0.03);
  c.near("reciprocal median detection pair", r.median_n_recip.value_or(-1), 108, 15);

  FutilitySimConfig edge = cfg;
  edge.p_treatment = edge.p_control + edge.futility.delta_min;
  edge.seed = seed_for("futility-edge");
  const auto e = futility_simulate(edge);
  c.at_most("reciprocal false futility at delta = delta_min", e.detect_rate_recip,
            edge.futility.alpha_f + 3 * e.se_recip);

  char buf[200];
  std::snprintf(buf, sizeof buf, "CS-route median %.1f; reciprocal se %.4f", r.median_n_cs.value_or(-1), r.se_recip);
  c.note(buf);
  FutilitySimConfig bet = cfg;
  bet.cs.method = CsMethod::betting;
  const auto rb = futility_simulate(bet);
  std::snprintf(buf, sizeof buf, "betting-grid CS route (default session CS): detection %.4f, median %.1f",
                rb.detect_rate_cs, rb.median_n_cs.value_or(-1));
  c.note(buf);
  for (double lp : {0.2, 0.3, 0.4, 0.556}) {
    FutilitySimConfig s = cfg;
    s.futility.lambda_prime = lp;
    s.reps = tier.reps(2'000);
    const auto rs = futility_simulate(s);
    std::snprintf(buf, sizeof buf, "lambda' %.3f: reciprocal detection %.4f, median %.1f", lp, rs.detect_rate_recip,
                  rs.median_n_recip.value_or(-1));
    c.note(buf);
  }
  return c.finish();
}

int calibration(const Tier& tier, const SimulationReport& main) {
  Criterion c("calibration constants: OBF boundary column and Bayesian threshold", tier);
  const auto sch = LookSchedule::fixed(20, 200);
  const CalibrationSpec spec{0.3, 0.025, tier.reps(4'000'000), seed_for("obf-constant"), rng::default_workers()};
  const double cc = calibrate_obf(sch, spec);
  // reference OBF boundary column, looks 1..20
  const double column[20] = {9.594, 6.783, 5.538, 4.796, 4.290, 3.916, 3.626, 3.392, 3.198, 3.033,
                             2.892, 2.769, 2.661, 2.564, 2.477, 2.398, 2.327, 2.261, 2.201, 2.145};
  double worst = 0;
  for (int k = 1; k <= 20; ++k) worst = std::max(worst, std::abs(obf_boundary_at(cc, k / 20.0) - column[k - 1]));
  char buf[160];
  std::snprintf(buf, sizeof buf, "calibrated c = %.4f from %lld null trials", cc, static_cast<long long>(spec.reps));
  c.note(buf);
  c.at_most("max |c/sqrt(t) - tabulated boundary| over 20 looks", worst, tier.tol(0.02));
  c.near("calibrated Bayesian threshold", main.bayes->threshold, 0.998, 0.001);
  return c.finish();
}

int hybrid(const Tier& tier) {
  Criterion c("hybrid monitoring table", tier);
  c.near_fixed("wald_z(7/10 vs 3/10)", wald_z({7, 10, 3, 10}), 1.952, 1e-3);
  // one simulated trial monitored with both rules
  rng::Xoshiro256pp gen(seed_for("hybrid-trial"));
  const rng::Bernoulli bt(0.45), bc(0.30);
  std::vector<OutcomePair> stream;
  for (int i = 0; i < 200; ++i) {
    const bool xt = bt(gen);
    const bool xc = bc(gen);
    stream.push_back({static_cast<std::uint8_t>(xt), static_cast<std::uint8_t>(xc)});
  }
  const auto rows = hybrid_monitor(stream, LookSchedule::fixed(20, 200), 2.145, 0.3125, 0.025);
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.av_p * r.sup_e - 1.0));
  c.at_most("max |AV p x running-sup E - 1| over 20 looks", worst, 1e-12);
  c.truth("20 rows", rows.size() == 20);
  return c.finish();
}

int novick(const Tier& tier) {
  Criterion c("four-arm ulcer trial reanalysis over 500 arrival orders", tier);
  const double lambda = grow_lambda({kNovickDesignTreatment, kNovickDesignControl});
  const auto counts = novick_counts();
  std::vector<double> max_ab;
  int ac_below = 0, ebh_silent = 0;
  const int seeds = 500;
  const std::uint64_t base = seed_for("novick");
  for (int s = 0; s < seeds; ++s) {
    const auto orders = arrival_orders(counts, base + static_cast<std::uint64_t>(s));
    max_ab.push_back(pairwise_eprocess(orders, "A", "B", lambda, 0.025).max_e);
    ac_below += pairwise_eprocess(orders, "A", "C", lambda, 0.025).av_p < 0.05;
    PlatformConfig pc;
    pc.lambda = lambda;
    pc.fdr_alpha = 0.05;
    const auto rep = platform_replay(orders, "B", {"A", "C", "D"}, {25, 50, 75, 100}, pc);
    bool silent = true;
    for (const auto& l : rep.looks) silent &= l.rejections.empty();
    ebh_silent += silent;
  }
  std::sort(max_ab.begin(), max_ab.end());
  const double median = 0.5 * (max_ab[seeds / 2 - 1] + max_ab[seeds / 2]);
  c.within("median max E, A vs B", median, 8, 30);
  c.at_least("share of orders with A-vs-C AV p < 0.05", ac_below / double(seeds), 0.5 + 1e-12, true);
  c.at_least("share of orders where e-BH rejects nothing at any look", ebh_silent / double(seeds), 0.95);
  return c.finish();
}

// -- property suites ---------------------------------------------------------

double exhaustive_mean_wealth(const BettingStrategy& strat, double p, int n) {
  // every outcome sequence of n pairs, weighted by its null probability
  double total = 0;
  const int seqs = 1 << (2 * n);
  for (int code = 0; code < seqs; ++code) {
    BettingEProcess ep(strat, 0.05);
    double prob = 1;
    for (int i = 0; i < n; ++i) {
      const int xt = (code >> (2 * i)) & 1, xc = (code >> (2 * i + 1)) & 1;
      prob *= (xt ? p : 1 - p) * (xc ? p : 1 - p);
      ep.update(OutcomePair::of(xt, xc));
    }
    total += prob * ep.wealth();
  }
  return total;
}

int properties(const Tier& tier) {
  Criterion c("properties: martingale, Ville, CS coverage, e-BH, posterior, reproducibility", tier);

  double worst = 0;
  for (double p : {0.1, 0.3, 0.5, 0.8}) {
    for (int n = 1; n <= 6; ++n) {
      worst = std::max(worst, std::abs(exhaustive_mean_wealth(BettingStrategy::fixed(0.3125), p, n) - 1));
      worst = std::max(worst, std::abs(exhaustive_mean_wealth(BettingStrategy::fixed(0.95), p, n) - 1));
      worst = std::max(worst, std::abs(exhaustive_mean_wealth(plugin_grow_strategy(), p, n) - 1));
    }
  }
  c.at_most("max |E[W_n] - 1|, exhaustive n <= 6, fixed and adaptive bets", worst, 1e-10);

  {
    const std::int64_t reps = tier.reps(20'000);
    const std::int64_t n = 500;
    const double levels[] = {0.01, 0.05, 0.10};
    std::vector<double> sup(static_cast<std::size_t>(reps));
    const std::uint64_t seed = seed_for("ville");
    rng::parallel_for(sup.size(), rng::default_workers(), [&](std::size_t b, std::size_t e) {
      const rng::Bernoulli bern(0.3);
      for (std::size_t r = b; r < e; ++r) {
        rng::Xoshiro256pp gen(rng::stream_seed(seed, rng::tag("ville-null"), r));
        BettingEProcess ep(BettingStrategy::fixed(0.5), 0.05);
        for (std::int64_t i = 0; i < n; ++i) {
          const bool xt = bern(gen);
          const bool xc = bern(gen);
          ep.update({xt, xc});
        }
        sup[r] = ep.running_sup_log_wealth();
      }
    });
    for (double a : levels) {
      const double hit = std::count_if(sup.begin(), sup.end(), [&](double s) { return s >= -std::log(a); }) /
                         static_cast<double>(reps);
      const double se = std::sqrt(a * (1 - a) / static_cast<double>(reps));
      c.at_most("P(sup W >= " + io::cell(1 / a, 0) + ") under the null", hit, a + 3 * se);
    }
  }

  {
    const std::int64_t reps = tier.reps(2'000);
    const double pt = 0.45, pc = 0.30;
    std::vector<char> covered(static_cast<std::size_t>(reps), 1);
    const std::uint64_t seed = seed_for("cs-coverage");
    rng::parallel_for(covered.size(), rng::default_workers(), [&](std::size_t b, std::size_t e) {
      const rng::Bernoulli bt(pt), bc(pc);
      for (std::size_t r = b; r < e; ++r) {
        rng::Xoshiro256pp gen(rng::stream_seed(seed, rng::tag("cs-path"), r));
        ConfidenceSequence cs;
        for (int i = 0; i < 500; ++i) {
          const bool xt = bt(gen);
          const bool xc = bc(gen);
          cs.update({xt, xc});
          const auto iv = cs.interval();
          if (iv.lo > pt - pc + 1e-12 || iv.hi < pt - pc - 1e-12) {
            covered[r] = 0;
            break;
          }
        }
      }
    });
    const double cov = std::count(covered.begin(), covered.end(), 1) / static_cast<double>(reps);
    const double se = std::sqrt(0.05 * 0.95 / static_cast<double>(reps));
    c.at_least("betting CS time-uniform coverage over 500 pairs", cov, 0.95 - 3 * se);
  }

  {
    bool mono = true, k1 = true;
    std::mt19937_64 g(seed_for("ebh-property"));
    std::exponential_distribution<double> ex(0.05);
    for (int trial = 0; trial < 2000; ++trial) {
      const int K = 1 + static_cast<int>(g() % 8);
      std::vector<EValue> es;
      for (int k = 0; k < K; ++k) es.emplace_back(ex(g));
      const auto rej = ebh(es, 0.1);
      if (!rej.empty()) {
        auto bigger = es;
        const auto i = rej[g() % rej.size()];
        bigger[i] = EValue(es[i].value() * 2);
        auto r2 = ebh(bigger, 0.1);
        auto r1 = rej;
        std::sort(r1.begin(), r1.end());
        std::sort(r2.begin(), r2.end());
        mono &= std::includes(r2.begin(), r2.end(), r1.begin(), r1.end());
      }
      const std::vector<EValue> one = {es[0]};
      k1 &= ebh(one, 0.1).empty() == !(es[0].value() >= 1 / 0.1);
    }
    c.truth("e-BH: enlarging a rejected e-value never shrinks the rejection set (2000 random cases)", mono);
    c.truth("e-BH with K = 1 is the rule e >= 1/alpha", k1);
  }

  {
    struct Case {
      std::int64_t sT, nT, sC, nC;
    };
    const Case cases[] = {{7, 10, 3, 10}, {30, 100, 20, 100}, {2, 50, 0, 50}, {15, 40, 20, 40}, {0, 10, 10, 10}};
    const int draws = 1'000'000;
    std::mt19937_64 g(seed_for("posterior-oracle"));
    double worst_diff = 0;
    for (const auto& k : cases) {
      std::gamma_distribution<double> gta(0.5 + k.sT), gtb(0.5 + k.nT - k.sT), gca(0.5 + k.sC), gcb(0.5 + k.nC - k.sC);
      int wins = 0;
      for (int i = 0; i < draws; ++i) {
        const double a1 = gta(g), b1 = gtb(g), a2 = gca(g), b2 = gcb(g);
        wins += a1 / (a1 + b1) > a2 / (a2 + b2);
      }
      const double mc = wins / static_cast<double>(draws);
      worst_diff = std::max(worst_diff, std::abs(mc - posterior_prob_superiority({k.sT, k.nT, k.sC, k.nC})));
    }
    c.at_most("max |quadrature posterior - 10^6-draw Beta sampling|, 5 cases", worst_diff, 1e-3);
  }

  {
    SimulationConfig cfg;
    cfg.reps = 2'000;
    cfg.master_seed = seed_for("reproducibility");
    std::string first;
    bool same = true;
    for (std::size_t w : {1, 2, 3, 7}) {
      cfg.workers = w;
      const auto text = io::to_json(simulate_comparison(cfg)).dump();
      if (first.empty()) first = text;
      same &= text == first;
    }
    c.truth("byte-identical comparison report for 1, 2, 3 and 7 workers", same);
  }
  return c.finish();
}

int recovery(const Tier& tier) {
  Criterion c("large-trial run (lower is better, 2000 pairs)", tier);
  RecoveryConfig cfg;
  cfg.reps = tier.reps(10'000);
  cfg.seed = seed_for("recovery");
  const auto r = recovery_scale_run(cfg);
  c.near("power", r.power, 0.314, 0.02);
  c.near("median rejection pair", r.median_rejection.value_or(-1), 1417, 50);
  char buf[200];
  std::snprintf(buf, sizeof buf, "lambda* %.4f g %.6f; illustrative trial final E %.2f, CS [%.3f, %.3f]", r.lambda_star,
                r.growth_rate, r.final_e, r.cs.lo, r.cs.hi);
  c.note(buf);
  return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
  Tier tier;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--tier") == 0 && i + 1 < argc) {
      const std::string t = argv[++i];
      if (t == "full") {
        tier.full = true;
        tier.tol_scale = 1.0;
      } else if (t != "smoke") {
        std::fprintf(stderr, "unknown tier '%s'\n", t.c_str());
        return 2;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--tier smoke|full]\n", argv[0]);
      return 2;
    }
  }
  std::printf("acceptance tier: %s (seed %llu)\n", tier.full ? "full" : "smoke", static_cast<unsigned long long>(kSeed));

  int failures = 0;
  SimulationReport main_report;
  failures += design_closed_form(tier);
  failures += main_table(tier, main_report);
  failures += sensitivity(tier);
  failures += schedules(tier);
  failures += grid(tier);
  failures += concordance(tier, main_report);
  failures += futility(tier);
  failures += calibration(tier, main_report);
  failures += hybrid(tier);
  failures += novick(tier);
  failures += properties(tier);
  failures += recovery(tier);
  std::printf("%s: %d unexpected failing check(s)\n", failures == 0 ? "OK" : "NOT OK", failures);
  return failures == 0 ? 0 : 1;
}
