#pragma once

// JSON and CSV forms of configs and reports. Doubles go through nlohmann's
// shortest round-trip formatting, so equal values serialize to equal bytes;
// non-finite values become null. Reports carry no timestamps or timings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anytime/comparators.hpp"
#include "anytime/design.hpp"
#include "anytime/futility.hpp"
#include "anytime/novick.hpp"
#include "anytime/platform.hpp"
#include "anytime/session.hpp"
#include "anytime/simengine.hpp"

namespace anytime::io {

using nlohmann::json;

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Fixed-precision CSV cell; non-finite values print as inf/-inf/nan.
inline std::string cell(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// design

inline json design_curve(const DesignAlternative& alt, double step = 0.01) {
  json pts = json::array();
  for (const auto& row : design_grid({alt}, lambda_grid(step))) {
    pts.push_back({{"lambda", row.lambda}, {"growth", row.growth}, {"expected_pairs", opt(row.expected_pairs)}});
  }
  return pts;
}

inline json to_json(const DesignReport& r, bool with_curve = true) {
  json j = {{"design", anytime::to_json(r.alt)},
            {"lambda_star", r.lambda_star},
            {"growth_rate", r.growth_rate},
            {"expected_pairs", opt(r.expected_pairs)},
            {"n_max_recommended", opt(r.n_max_recommended)},
            {"power_at_nmax", opt(r.power_at_nmax)},
            {"power_n_max", opt(r.power_n_max)},
            {"power_se", opt(r.power_se)},
            {"warnings", r.warnings}};
  if (with_curve) j["curve"] = design_curve(r.alt);
  return j;
}

// ---------------------------------------------------------------------------
// schedules and rules

inline LookSchedule::Kind schedule_kind_from_string(const std::string& s) {
  if (s == "fixed") return LookSchedule::Kind::fixed;
  if (s == "irregular") return LookSchedule::Kind::irregular;
  if (s == "continuous") return LookSchedule::Kind::continuous;
  throw ConfigError("unknown schedule kind '" + s + "'");
}

inline json to_json(const LookSchedule& s) {
  json j = {{"kind", to_string(s.kind())}, {"n_max", s.n_max()}};
  if (s.kind() != LookSchedule::Kind::continuous) j["looks"] = s.count();
  if (s.kind() == LookSchedule::Kind::irregular) {
    j["seed"] = s.seed();
    j["look_times"] = s.looks();
  }
  return j;
}

inline LookSchedule schedule_from_json(const json& j, std::int64_t n_max) {
  const auto kind = schedule_kind_from_string(j.value("kind", std::string("fixed")));
  switch (kind) {
    case LookSchedule::Kind::fixed: return LookSchedule::fixed(j.value("looks", 20), n_max);
    case LookSchedule::Kind::irregular:
      return LookSchedule::irregular(j.value("looks", 5), n_max, j.value("seed", std::uint64_t{0}));
    case LookSchedule::Kind::continuous: return LookSchedule::continuous(n_max);
  }
  throw ConfigError("unknown schedule");
}

inline PosteriorMethod posterior_method_from_string(const std::string& s) {
  if (s == "quadrature") return PosteriorMethod::quadrature;
  if (s == "normal_approx") return PosteriorMethod::normal_approx;
  throw ConfigError("unknown posterior method '" + s + "'");
}

// ---------------------------------------------------------------------------
// comparison simulation

/// Reads a simulation config. Unknown keys are rejected so typos do not pass
/// silently.
inline SimulationConfig simulation_config_from_json(const json& j) {
  static const std::vector<std::string> known = {"p_T_null", "p_T_alt", "p_C", "n_max", "schedule", "alpha",
                                                 "rules", "reps", "calibration_reps", "bayes", "gs_c",
                                                 "bayes_threshold", "seed"};
  if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    SimulationConfig c;
    c.p_T_null = j.value("p_T_null", c.p_T_null);
    c.p_T_alt = j.value("p_T_alt", c.p_T_alt);
    c.p_C = j.value("p_C", c.p_C);
    c.n_max = j.value("n_max", c.n_max);
    c.alpha = j.value("alpha", c.alpha);
    c.reps = j.value("reps", c.reps);
    c.calibration_reps = j.value("calibration_reps", c.calibration_reps);
    c.schedule = j.contains("schedule") ? schedule_from_json(j.at("schedule"), c.n_max) : LookSchedule::fixed(20, c.n_max);
    if (j.contains("rules")) {
      c.rules.clear();
      for (const auto& r : j.at("rules")) c.rules.push_back(rule_from_string(r.get<std::string>()));
    }
    if (j.contains("bayes")) {
      const auto& b = j.at("bayes");
      c.bayes.prior_a = b.value("prior_a", c.bayes.prior_a);
      c.bayes.prior_b = b.value("prior_b", c.bayes.prior_b);
      c.bayes.method = posterior_method_from_string(b.value("method", std::string("normal_approx")));
    }
    if (j.contains("gs_c") && !j.at("gs_c").is_null()) c.gs_c = j.at("gs_c").get<double>();
    if (j.contains("bayes_threshold") && !j.at("bayes_threshold").is_null()) {
      c.bayes_threshold = j.at("bayes_threshold").get<double>();
    }
    if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad simulation config: ") + e.what());
  }
}

inline json to_json(const SimulationConfig& c) {
  json rules = json::array();
  for (const auto& r : c.rules) rules.push_back(r.id());
  return {{"p_T_null", c.p_T_null},
          {"p_T_alt", c.p_T_alt},
          {"p_C", c.p_C},
          {"n_max", c.n_max},
          {"schedule", to_json(c.schedule)},
          {"alpha", c.alpha},
          {"rules", rules},
          {"reps", c.reps},
          {"calibration_reps", c.effective_calibration_reps()},
          {"seed", c.master_seed},
          {"bayes", {{"prior_a", c.bayes.prior_a}, {"prior_b", c.bayes.prior_b}, {"method", to_string(c.bayes.method)}}},
          {"gs_c", opt(c.gs_c)},
          {"bayes_threshold", opt(c.bayes_threshold)}};
}

inline json to_json(const RuleResult& r) {
  return {{"rule", r.rule},         {"null_rej", r.reject_rate_null}, {"alt_rej", r.reject_rate_alt},
          {"avg_n_null", r.avg_n_null}, {"avg_n_alt", r.avg_n_alt},     {"se_null", r.se_null},
          {"se_alt", r.se_alt}};
}

inline json to_json(const SimulationReport& r) {
  json results = json::array();
  for (const auto& x : r.results) results.push_back(to_json(x));
  json conc = json::array();
  for (const auto& c : r.concordance) {
    conc.push_back({{"first", c.first},
                    {"second", c.second},
                    {"both", c.both},
                    {"neither", c.neither},
                    {"first_only", c.first_only},
                    {"second_only", c.second_only}});
  }
  json j = {{"config", to_json(r.config)},
            {"design_lambda", r.design_lambda},
            {"gs_c", r.gs_c ? finite_or_null(*r.gs_c) : json(nullptr)},
            {"gs_c_infinite", r.gs_c && std::isinf(*r.gs_c)},
            {"bayes_threshold", r.bayes ? json(r.bayes->threshold) : json(nullptr)},
            {"bayes_raw_quantile", r.bayes ? json(r.bayes->raw_quantile) : json(nullptr)},
            {"low_precision", r.low_precision},
            {"results", results},
            {"concordance", conc}};
  return j;
}

inline constexpr const char* kRuleCsvHeader = "rule,null_rej,alt_rej,avg_n_null,avg_n_alt,se_null,se_alt";

inline std::string results_csv(const SimulationReport& r) {
  std::ostringstream out;
  out << kRuleCsvHeader << '\n';
  for (const auto& x : r.results) {
    out << x.rule << ',' << cell(x.reject_rate_null) << ',' << cell(x.reject_rate_alt) << ',' << cell(x.avg_n_null, 3)
        << ',' << cell(x.avg_n_alt, 3) << ',' << cell(x.se_null) << ',' << cell(x.se_alt) << '\n';
  }
  return out.str();
}

inline json progress_json(const Progress& p) {
  json rates = json::object();
  for (const auto& [rule, nr] : p.partial_rates) rates[rule] = {{"null_rej", nr.first}, {"alt_rej", nr.second}};
  return {{"done", p.done}, {"total", p.total}, {"partial_rates", rates}};
}

// ---------------------------------------------------------------------------
// calibration

inline json calibration_json(const std::string& rule, double value, double alpha, const LookSchedule& schedule,
                             std::int64_t reps, std::uint64_t seed, std::optional<double> raw_quantile = {}) {
  json j = {{"rule", rule},
            {"c_or_threshold", finite_or_null(value)},
            {"infinite", std::isinf(value)},
            {"alpha", alpha},
            {"schedule", to_json(schedule)},
            {"reps", reps},
            {"seed", seed}};
  if (raw_quantile) j["raw_quantile"] = *raw_quantile;
  return j;
}

// ---------------------------------------------------------------------------
// schedules, grid

inline json to_json(const ScheduleRow& r) {
  return {{"schedule", r.schedule}, {"method", r.method},         {"type1", r.type1},
          {"power", r.power},       {"avg_n_alt", r.avg_n_alt},   {"c", opt(r.c)},
          {"infinite_c", r.infinite_c}, {"draws", r.draws}};
}

inline std::string schedules_csv(const std::vector<ScheduleRow>& rows) {
  std::ostringstream out;
  out << "schedule,method,type1,power,avg_n_alt,c,infinite_c,draws\n";
  for (const auto& r : rows) {
    out << r.schedule << ',' << r.method << ',' << cell(r.type1) << ',' << cell(r.power) << ',' << cell(r.avg_n_alt, 3)
        << ',' << (r.c ? cell(*r.c, 4) : "") << ',' << r.infinite_c << ',' << r.draws << '\n';
  }
  return out.str();
}

inline json to_json(const GridCell& c) {
  return {{"p_C", c.p_C},
          {"delta", c.delta},
          {"looks", c.looks},
          {"lambda_star", c.lambda_star},
          {"evalue_power", c.evalue_power},
          {"gs_power", c.gs_power},
          {"gap", c.gap},
          {"gs_c", finite_or_null(c.gs_c)}};
}

inline std::string grid_csv(const std::vector<GridCell>& cells) {
  std::ostringstream out;
  out << "p_C,delta,looks,lambda_star,evalue_power,gs_power,gap,gs_c\n";
  for (const auto& c : cells) {
    out << cell(c.p_C, 3) << ',' << cell(c.delta, 3) << ',' << c.looks << ',' << cell(c.lambda_star, 4) << ','
        << cell(c.evalue_power) << ',' << cell(c.gs_power) << ',' << cell(c.gap) << ',' << cell(c.gs_c, 4) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// futility, recovery

inline json to_json(const FutilitySimConfig& c) {
  return {{"p_treatment", c.p_treatment},
          {"p_control", c.p_control},
          {"delta_min", c.futility.delta_min},
          {"alpha_f", c.futility.alpha_f},
          {"lambda_prime", c.futility.lambda_prime},
          {"cs_method", anytime::to_string(c.cs.method)},
          {"cs_alpha", c.cs.alpha},
          {"n_max", c.n_max},
          {"reps", c.reps},
          {"seed", c.seed}};
}

inline json to_json(const FutilitySimResult& r) {
  return {{"detect_rate_cs", r.detect_rate_cs},     {"median_n_cs", opt(r.median_n_cs)},
          {"se_cs", r.se_cs},                       {"detect_rate_recip", r.detect_rate_recip},
          {"median_n_recip", opt(r.median_n_recip)}, {"se_recip", r.se_recip}};
}

inline json to_json(const RecoveryReport& r) {
  return {{"config",
           {{"p_control", r.config.p_control},
            {"p_treatment", r.config.p_treatment},
            {"n_max", r.config.n_max},
            {"alpha", r.config.alpha},
            {"cs_alpha", r.config.cs_alpha},
            {"reps", r.config.reps},
            {"seed", r.config.seed}}},
          {"lambda_star", r.lambda_star},
          {"growth_rate", r.growth_rate},
          {"expected_pairs", opt(r.expected_pairs)},
          {"power", r.power},
          {"power_se", r.power_se},
          {"median_rejection", opt(r.median_rejection)},
          {"illustration",
           {{"final_e", r.final_e},
            {"max_e", r.max_e},
            {"cs", anytime::to_json(r.cs)},
            {"delta_hat", r.delta_hat},
            {"trajectory", trajectory_json(r.trajectory)}}}};
}

inline std::string trajectory_csv(const std::vector<TrajectoryPoint>& t) {
  std::ostringstream out;
  out << "n,log_e\n";
  for (const auto& p : t) out << p.n << ',' << cell(p.log_wealth, 9) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// platform, hybrid

inline json to_json(const Platform& p) {
  json arms = json::array();
  for (const auto& a : p.arms()) {
    arms.push_back({{"id", a.id},
                    {"status", to_string(a.status)},
                    {"n", a.eprocess.n()},
                    {"logE", a.eprocess.log_wealth()},
                    {"alpha_k", a.alpha_k}});
  }
  return {{"arms", arms}, {"fdr_alpha", p.config().fdr_alpha}, {"ebh_rejections", p.ebh_rejections()}};
}

inline json to_json(const PlatformLook& l) {
  json wealth = json::object();
  for (const auto& [id, e] : l.wealth) wealth[id] = e;
  return {{"n", l.n}, {"wealth", wealth}, {"ebh_rejections", l.rejections}};
}

inline json to_json(const PairwiseResult& r) {
  return {{"comparison", r.treatment + " vs " + r.control},
          {"treatment", r.treatment},
          {"control", r.control},
          {"events_treatment", r.events_treatment},
          {"events_control", r.events_control},
          {"n", r.n},
          {"final_e", r.final_e},
          {"max_e", r.max_e},
          {"av_p", r.av_p}};
}

inline json to_json(const HybridLookRow& r) {
  return {{"look", r.look},
          {"n", r.n},
          {"info_fraction", r.info_fraction},
          {"delta_hat", r.delta_hat},
          {"z", finite_or_null(r.z)},
          {"gs_bound", r.gs_bound},
          {"gs_reject", r.gs_reject},
          {"log_e", r.log_e},
          {"e_reject", r.e_reject},
          {"av_p", r.av_p}};
}

inline std::string hybrid_csv(const std::vector<HybridLookRow>& rows) {
  std::ostringstream out;
  out << "look,n,info_fraction,delta_hat,z,gs_bound,gs_reject,log_e,e_reject,av_p\n";
  for (const auto& r : rows) {
    out << r.look << ',' << r.n << ',' << cell(r.info_fraction, 3) << ',' << cell(r.delta_hat, 3) << ','
        << cell(r.z, 3) << ',' << cell(r.gs_bound, 3) << ',' << (r.gs_reject ? 1 : 0) << ',' << cell(r.log_e, 3)
        << ',' << (r.e_reject ? 1 : 0) << ',' << cell(r.av_p, 4) << '\n';
  }
  return out.str();
}

}  // namespace anytime::io
