// anytime: command-line front end for design, live monitoring, simulation
// studies and the HTTP service.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 bad arguments or configuration,
// 3 malformed input file, 4 operation refused by a terminal session.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "anytime/anytime.hpp"
#include "anytime/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anytime;

namespace {

enum Exit { kOk = 0, kFailure = 1, kBadArgs = 2, kBadInput = 3, kTerminal = 4 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("anytime");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("ANYTIME_LOG")) {
    const auto parsed = spdlog::level::from_str(lvl);
    // from_str maps unknown names to off; only honour real level names
    if (parsed != spdlog::level::off || std::string_view(lvl) == "off") spdlog::set_level(parsed);
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  atomic_write(path, text);
  spdlog::info("wrote {}", path);
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

Direction parse_direction(const std::string& s) {
  try {
    return direction_from_string(s);
  } catch (const std::exception&) {
    throw ArgumentError("direction must be treatment_higher or treatment_lower");
  }
}

LookSchedule make_schedule(const std::string& kind, int looks, std::int64_t n_max, std::uint64_t seed) {
  return io::schedule_from_json({{"kind", kind}, {"looks", looks}, {"seed", seed}}, n_max);
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  double pt = 0, pc = 0, alpha = 0.025;
  std::string direction = "treatment_higher";
  std::optional<std::int64_t> n_max;
  std::int64_t reps = 10'000;
  std::uint64_t seed = 0;
  double step = 0.01;
  bool curve = false;
};

int cmd_design(const DesignArgs& a) {
  const DesignAlternative alt{a.pt, a.pc, parse_direction(a.direction), a.alpha};
  alt.validate();
  std::optional<PowerRequest> power;
  if (a.n_max) power = PowerRequest{*a.n_max, a.reps, a.seed};
  const auto rep = design_report(alt, power);
  json j = io::to_json(rep, false);
  if (a.curve) j["curve"] = io::design_curve(alt, a.step);
  std::cout << j.dump(2) << '\n';

  std::fprintf(stderr, "design      p_T=%.4g p_C=%.4g (%s) alpha=%.4g\n", alt.p_treatment, alt.p_control,
               to_string(alt.direction), alt.alpha);
  std::fprintf(stderr, "lambda*     %.4f\n", rep.lambda_star);
  std::fprintf(stderr, "growth g    %.6f nats/pair\n", rep.growth_rate);
  if (rep.expected_pairs) {
    std::fprintf(stderr, "E[pairs]    %.1f (log(1/alpha)/g)\n", *rep.expected_pairs);
  } else {
    std::fprintf(stderr, "E[pairs]    -- (no positive growth)\n");
  }
  if (rep.power_at_nmax) std::fprintf(stderr, "power@%lld  %.4f (se %.4f)\n", static_cast<long long>(*rep.power_n_max), *rep.power_at_nmax, *rep.power_se);
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning     %s\n", w.c_str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct InitArgs {
  std::string session, id;
  double pt = 0, pc = 0, alpha = 0.025;
  std::string direction = "treatment_higher";
  std::optional<double> lambda;
  std::string cs_method = "betting";
  double cs_alpha = 0.05;
  double delta_min = 0.1, alpha_f = 0.1;
  std::optional<double> lambda_prime;
  bool force = false;
};

int cmd_init(const InitArgs& a) {
  SessionConfig cfg;
  cfg.design = {a.pt, a.pc, parse_direction(a.direction), a.alpha};
  cfg.design.validate();
  cfg.lambda = a.lambda;
  cfg.cs.method = cs_method_from_string(a.cs_method);
  cfg.cs.alpha = a.cs_alpha;
  cfg.cs.validate();
  FutilityConfig fc{a.delta_min, a.alpha_f, a.lambda_prime.value_or(FutilityConfig::default_lambda(a.delta_min))};
  fc.validate();
  if (auto w = fc.warning()) spdlog::warn("{}", *w);
  cfg.futility = fc;
  if (fs::exists(a.session) && !a.force) throw ArgumentError(a.session + " exists; pass --force to overwrite");
  const std::string id = a.id.empty() ? fs::path(a.session).stem().string() : a.id;
  MonitoringSession s(id, cfg);
  save_session(s, a.session);
  std::printf("session %s  lambda %.4f  threshold E >= %.4g\n", id.c_str(), s.efficacy().strategy().fixed_lambda(),
              1.0 / cfg.design.alpha);
  return kOk;
}

// ---------------------------------------------------------------------------

void print_summary(const SessionSummary& s) {
  std::printf("n          %lld\n", static_cast<long long>(s.n));
  std::printf("E          %.6g (log %.4f)\n", s.e, s.log_e);
  std::printf("AV p       %.6g\n", s.av_p);
  std::printf("CS         [%.4f, %.4f]%s  delta_hat %.4f\n", s.cs.lo, s.cs.hi, s.cs.anomalous ? " (anomalous)" : "",
              s.delta_hat);
  std::printf("futility   cs=%s recip=%s (wealth %.4g)\n", s.futility_cs ? "yes" : "no", s.futility_recip ? "yes" : "no",
              s.futility_recip_wealth);
  std::printf("decision   %s\n", s.decision.c_str());
}

int cmd_monitor(const std::string& session_path, const std::string& batch_path, bool as_json) {
  auto s = load_session(session_path);
  if (s.terminal()) {
    spdlog::error("session {} reached a terminal decision ({}); no further batches", s.id(), s.summary().decision);
    return kTerminal;
  }
  const auto pairs = parse_batch_csv(read_input(batch_path), s.n());
  if (!pairs.empty()) {
    s.apply_batch(pairs);
    save_session(s, session_path);
  }
  if (as_json) {
    std::cout << to_json(s.summary()).dump(2) << '\n';
  } else {
    print_summary(s.summary());
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> reps, calibration_reps;
  std::size_t workers = rng::default_workers();
  std::string study = "compare";
  std::string lambdas = "0.10,0.20,0.31,0.40,0.50";
  std::string schedules = "fixed:5,fixed:20,irregular:5,continuous";
  int draws = 200;
  std::string grid_pc = "0.1,0.3,0.5", grid_delta = "0.10,0.15,0.20", grid_looks = "5,20";
  std::string json_out = "-", csv_out;
};

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw ArgumentError("not a number: '" + t + "'");
    }
  }
  return out;
}

int cmd_simulate(const SimArgs& a) {
  SimulationConfig cfg;
  if (!a.config.empty()) {
    json j;
    try {
      j = json::parse(read_file(a.config));
    } catch (const json::parse_error& e) {
      throw FormatError(a.config + ": " + e.what());
    }
    cfg = io::simulation_config_from_json(j);
  }
  cfg.master_seed = a.seed;
  cfg.workers = a.workers;
  if (a.reps) cfg.reps = *a.reps;
  if (a.calibration_reps) cfg.calibration_reps = *a.calibration_reps;
  cfg.validate();
  spdlog::info("study {} reps {} seed {}", a.study, cfg.reps, cfg.master_seed);

  json out;
  std::string csv;
  if (a.study == "compare" || a.study == "sensitivity") {
    const auto rep = a.study == "compare"
                         ? simulate_comparison(cfg, [](const Progress& p) { spdlog::debug("progress {}/{}", p.done, p.total); })
                         : sensitivity_lambda(cfg, parse_doubles(a.lambdas));
    if (rep.low_precision) spdlog::warn("fewer than 1000 reps: rates are low precision");
    out = io::to_json(rep);
    csv = io::results_csv(rep);
  } else if (a.study == "schedules") {
    std::vector<ScheduleSpec> specs;
    for (const auto& item : split(a.schedules, ',')) {
      const auto parts = split(item, ':');
      ScheduleSpec sp;
      sp.kind = io::schedule_kind_from_string(parts.at(0));
      if (parts.size() > 1) sp.looks = std::stoi(parts[1]);
      sp.draws = a.draws;
      sp.seed = a.seed;
      specs.push_back(sp);
    }
    const auto rows = schedule_study(cfg, specs);
    out = {{"config", io::to_json(cfg)}, {"rows", json::array()}};
    for (const auto& r : rows) out["rows"].push_back(io::to_json(r));
    csv = io::schedules_csv(rows);
  } else if (a.study == "grid") {
    std::vector<int> looks;
    for (double v : parse_doubles(a.grid_looks)) looks.push_back(static_cast<int>(v));
    const auto cells = parameter_grid(parse_doubles(a.grid_pc), parse_doubles(a.grid_delta), looks, cfg);
    out = {{"config", io::to_json(cfg)}, {"cells", json::array()}};
    for (const auto& c : cells) out["cells"].push_back(io::to_json(c));
    csv = io::grid_csv(cells);
  } else {
    throw ArgumentError("unknown study '" + a.study + "'");
  }
  write_text(a.json_out, out.dump(2) + "\n");
  if (!a.csv_out.empty()) write_text(a.csv_out, csv);
  return kOk;
}

// ---------------------------------------------------------------------------

struct CalArgs {
  std::string rule = "gs";
  std::string schedule = "fixed";
  int looks = 20;
  std::int64_t n_max = 200;
  double alpha = 0.025, p_null = 0.3;
  std::int64_t reps = 50'000;
  std::uint64_t seed = 0;
  std::uint64_t schedule_seed = 0;
  std::size_t workers = rng::default_workers();
};

int cmd_calibrate(const CalArgs& a) {
  const auto sch = make_schedule(a.schedule, a.looks, a.n_max, a.schedule_seed);
  const CalibrationSpec spec{a.p_null, a.alpha, a.reps, a.seed, a.workers};
  json j;
  if (a.rule == "gs" || a.rule == "gs_calibrated") {
    j = io::calibration_json("gs_calibrated", calibrate_obf(sch, spec), a.alpha, sch, a.reps, a.seed);
  } else if (a.rule == "bayes" || a.rule == "bayes_calibrated") {
    const auto b = calibrate_bayes_threshold(sch, spec, BayesRule{});
    j = io::calibration_json("bayes_calibrated", b.threshold, a.alpha, sch, a.reps, a.seed, b.raw_quantile);
  } else {
    throw ArgumentError("rule must be gs or bayes");
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct FutArgs {
  double pt = 0.33, pc = 0.30, delta_min = 0.1, alpha_f = 0.1;
  std::optional<double> lambda_prime;
  std::string cs_method = "plugin";
  double cs_alpha = 0.05;
  std::int64_t n_max = 300, reps = 10'000;
  std::uint64_t seed = 0;
  std::size_t workers = rng::default_workers();
};

int cmd_futility(const FutArgs& a) {
  FutilitySimConfig cfg;
  cfg.p_treatment = a.pt;
  cfg.p_control = a.pc;
  cfg.futility = {a.delta_min, a.alpha_f, a.lambda_prime.value_or(FutilityConfig::default_lambda(a.delta_min))};
  cfg.futility.validate();
  if (auto w = cfg.futility.warning()) spdlog::warn("{}", *w);
  cfg.cs.method = cs_method_from_string(a.cs_method);
  cfg.cs.alpha = a.cs_alpha;
  cfg.n_max = a.n_max;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  const auto r = futility_simulate(cfg);
  std::cout << json{{"config", io::to_json(cfg)}, {"result", io::to_json(r)}}.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct PlatArgs {
  std::string data;
  std::string control = "B";
  std::string arms;
  std::string pairs;
  std::string looks = "25,50,75,100";
  double fdr = 0.05, alpha = 0.025;
  double design_pt = kNovickDesignTreatment, design_pc = kNovickDesignControl;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
};

int cmd_platform(const PlatArgs& a) {
  const auto counts = a.data.empty() ? novick_counts() : parse_arm_counts_csv(read_input(a.data));
  const auto orders = arrival_orders(counts, a.seed);
  (void)arm_stream(orders, a.control);
  std::vector<std::string> arms = split(a.arms, ',');
  if (arms.empty()) {
    for (const auto& c : counts) {
      if (c.arm != a.control) arms.push_back(c.arm);
    }
  }
  const double lambda = a.lambda ? *a.lambda : grow_lambda({a.design_pt, a.design_pc, Direction::treatment_higher, a.alpha});
  std::vector<std::pair<std::string, std::string>> comps;
  if (!a.pairs.empty()) {
    for (const auto& p : split(a.pairs, ',')) {
      const auto ab = split(p, ':');
      if (ab.size() != 2) throw ArgumentError("pairs are written arm:comparator, e.g. A:B");
      comps.emplace_back(ab[0], ab[1]);
    }
  } else {
    for (const auto& arm : arms) comps.emplace_back(arm, a.control);
  }
  json pairwise = json::array();
  for (const auto& [t, c] : comps) pairwise.push_back(io::to_json(pairwise_eprocess(orders, t, c, lambda, a.alpha)));

  std::vector<std::int64_t> looks;
  for (double v : parse_doubles(a.looks)) looks.push_back(static_cast<std::int64_t>(v));
  PlatformConfig pc;
  pc.fdr_alpha = a.fdr;
  pc.lambda = lambda;
  pc.total_alpha = a.alpha;
  pc.max_arms = static_cast<int>(arms.size());
  const auto replay = platform_replay(orders, a.control, arms, looks, pc);
  json jl = json::array();
  for (const auto& l : replay.looks) jl.push_back(io::to_json(l));
  json out = {{"seed", a.seed},
              {"lambda", lambda},
              {"alpha", a.alpha},
              {"pairwise", pairwise},
              {"looks", jl},
              {"platform", io::to_json(replay.platform)}};
  std::cout << out.dump(2) << '\n';

  std::fprintf(stderr, "%-10s %6s %10s %10s %8s\n", "comparison", "n", "final E", "max E", "AV p");
  for (const auto& r : pairwise) {
    std::fprintf(stderr, "%-10s %6lld %10.3f %10.3f %8.3f\n", r["comparison"].get<std::string>().c_str(),
                 r["n"].get<long long>(), r["final_e"].get<double>(), r["max_e"].get<double>(), r["av_p"].get<double>());
  }
  for (const auto& l : replay.looks) {
    std::fprintf(stderr, "look n=%lld  e-BH rejections: %zu\n", static_cast<long long>(l.n), l.rejections.size());
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct HybridArgs {
  std::string stream;
  int looks = 20;
  std::int64_t n_max = 200;
  std::optional<double> c;
  double lambda = 0.3125, alpha = 0.025, p_null = 0.3;
  std::int64_t reps = 50'000;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

int cmd_hybrid(const HybridArgs& a) {
  const auto pairs = parse_batch_csv(read_input(a.stream), 0);
  const auto sch = LookSchedule::fixed(a.looks, a.n_max);
  double c = 0;
  if (a.c) {
    c = *a.c;
  } else {
    if (!a.seed) throw ArgumentError("supply --c, or --seed to calibrate it");
    c = calibrate_obf(sch, {a.p_null, a.alpha, a.reps, *a.seed, rng::default_workers()});
    spdlog::info("calibrated c = {:.4f}", c);
  }
  const auto rows = hybrid_monitor(pairs, sch, c, a.lambda, a.alpha);
  if (a.format == "json") {
    json out = {{"c", c}, {"lambda", a.lambda}, {"alpha", a.alpha}, {"rows", json::array()}};
    for (const auto& r : rows) out["rows"].push_back(io::to_json(r));
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << io::hybrid_csv(rows);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_recovery(const RecoveryConfig& cfg, const std::string& trajectory_csv) {
  const auto rep = recovery_scale_run(cfg);
  std::cout << io::to_json(rep).dump(2) << '\n';
  if (!trajectory_csv.empty()) write_text(trajectory_csv, io::trajectory_csv(rep.trajectory));
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_serve(const std::string& addr, ServiceOptions opts) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ArgumentError("--addr must be host:port");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw ArgumentError("--addr must be host:port");
  }
  Service svc(std::move(opts));
  httplib::Server server;
  mount(server, svc);
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
  spdlog::info("listening on {}:{}", host, port);
  std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
  if (!server.listen(host, port)) {
    spdlog::error("cannot listen on {}", addr);
    return kFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Anytime-valid e-process monitoring for two-arm binary trials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "anytime 0.1.0");

  DesignArgs da;
  auto* design = app.add_subcommand("design", "GROW betting fraction, growth rate and expected stopping time");
  design->add_option("--pt", da.pt, "treatment response rate under the design alternative")->required();
  design->add_option("--pc", da.pc, "control response rate")->required();
  design->add_option("--alpha", da.alpha, "one-sided level");
  design->add_option("--direction", da.direction, "treatment_higher | treatment_lower");
  design->add_option("--n-max", da.n_max, "also simulate power within this many pairs");
  design->add_option("--reps", da.reps, "power simulation replications");
  design->add_option("--seed", da.seed, "power simulation seed");
  design->add_flag("--curve", da.curve, "include the growth curve over a lambda grid");
  design->add_option("--step", da.step, "lambda grid step for --curve");

  InitArgs ia;
  auto* init = app.add_subcommand("init", "create a monitoring session file");
  init->add_option("--session", ia.session, "session file to create")->required();
  init->add_option("--id", ia.id, "session id (default: file stem)");
  init->add_option("--pt", ia.pt)->required();
  init->add_option("--pc", ia.pc)->required();
  init->add_option("--alpha", ia.alpha);
  init->add_option("--direction", ia.direction);
  init->add_option("--lambda", ia.lambda, "betting fraction (default: GROW for the design)");
  init->add_option("--cs-method", ia.cs_method, "betting | plugin");
  init->add_option("--cs-alpha", ia.cs_alpha);
  init->add_option("--delta-min", ia.delta_min, "futility reference effect");
  init->add_option("--alpha-f", ia.alpha_f, "reciprocal futility level");
  init->add_option("--lambda-prime", ia.lambda_prime, "reciprocal futility bet");
  init->add_flag("--force", ia.force, "overwrite an existing file");

  std::string mon_session, mon_batch;
  bool mon_json = false;
  auto* monitor = app.add_subcommand("monitor", "apply a batch CSV to a session");
  monitor->add_option("--session", mon_session)->required();
  monitor->add_option("--batch", mon_batch, "pair_index,x_treatment,x_control CSV, or - for stdin")->required();
  monitor->add_flag("--json", mon_json, "print the summary as JSON");

  SimArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  simulate->add_option("--config", sa.config, "simulation config JSON");
  simulate->add_option("--seed", sa.seed, "master seed")->required();
  simulate->add_option("--reps", sa.reps);
  simulate->add_option("--calibration-reps", sa.calibration_reps);
  simulate->add_option("--workers", sa.workers);
  simulate->add_option("--study", sa.study, "compare | sensitivity | schedules | grid");
  simulate->add_option("--lambdas", sa.lambdas, "sensitivity: comma-separated betting fractions");
  simulate->add_option("--schedules", sa.schedules, "schedules: kind[:looks],...");
  simulate->add_option("--draws", sa.draws, "schedules: irregular schedule draws");
  simulate->add_option("--grid-pc", sa.grid_pc);
  simulate->add_option("--grid-delta", sa.grid_delta);
  simulate->add_option("--grid-looks", sa.grid_looks);
  simulate->add_option("--json", sa.json_out, "JSON report path (default stdout)");
  simulate->add_option("--csv", sa.csv_out, "flat CSV table path");

  CalArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "calibrate the OBF constant or the Bayesian threshold");
  calibrate->add_option("--rule", ca.rule, "gs | bayes");
  calibrate->add_option("--schedule", ca.schedule, "fixed | irregular | continuous");
  calibrate->add_option("--looks", ca.looks);
  calibrate->add_option("--schedule-seed", ca.schedule_seed, "irregular schedule draw");
  calibrate->add_option("--n-max", ca.n_max);
  calibrate->add_option("--alpha", ca.alpha);
  calibrate->add_option("--p-null", ca.p_null, "common response rate under the null");
  calibrate->add_option("--reps", ca.reps);
  calibrate->add_option("--seed", ca.seed)->required();
  calibrate->add_option("--workers", ca.workers);

  FutArgs fa;
  auto* futility = app.add_subcommand("futility", "futility detection study");
  futility->add_option("--pt", fa.pt);
  futility->add_option("--pc", fa.pc);
  futility->add_option("--delta-min", fa.delta_min);
  futility->add_option("--alpha-f", fa.alpha_f);
  futility->add_option("--lambda-prime", fa.lambda_prime);
  futility->add_option("--cs-method", fa.cs_method, "plugin | betting");
  futility->add_option("--cs-alpha", fa.cs_alpha);
  futility->add_option("--n-max", fa.n_max);
  futility->add_option("--reps", fa.reps);
  futility->add_option("--seed", fa.seed)->required();
  futility->add_option("--workers", fa.workers);

  PlatArgs pa;
  auto* platform = app.add_subcommand("platform", "pairwise e-processes and e-BH platform view of arm-level counts");
  platform->add_option("--data", pa.data, "arm,events,n CSV (default: bundled four-arm ulcer trial)");
  platform->add_option("--control", pa.control);
  platform->add_option("--arms", pa.arms, "experimental arms (default: all but control)");
  platform->add_option("--pairs", pa.pairs, "pairwise comparisons arm:comparator,...");
  platform->add_option("--looks", pa.looks);
  platform->add_option("--fdr", pa.fdr);
  platform->add_option("--alpha", pa.alpha);
  platform->add_option("--design-pt", pa.design_pt);
  platform->add_option("--design-pc", pa.design_pc);
  platform->add_option("--lambda", pa.lambda);
  platform->add_option("--seed", pa.seed, "arrival-order shuffle seed");

  HybridArgs ha;
  auto* hybrid = app.add_subcommand("hybrid", "group sequential and e-process monitoring of one stream");
  hybrid->add_option("--stream", ha.stream, "pair_index,x_treatment,x_control CSV")->required();
  hybrid->add_option("--looks", ha.looks);
  hybrid->add_option("--n-max", ha.n_max);
  hybrid->add_option("--c", ha.c, "OBF constant (otherwise calibrated with --seed)");
  hybrid->add_option("--lambda", ha.lambda);
  hybrid->add_option("--alpha", ha.alpha);
  hybrid->add_option("--reps", ha.reps, "calibration reps");
  hybrid->add_option("--seed", ha.seed);
  hybrid->add_option("--format", ha.format, "csv | json");

  RecoveryConfig rc;
  std::string rc_traj;
  auto* recovery = app.add_subcommand("recovery", "large-trial power and illustrative trajectory (lower is better)");
  recovery->add_option("--pc", rc.p_control);
  recovery->add_option("--pt", rc.p_treatment);
  recovery->add_option("--n-max", rc.n_max);
  recovery->add_option("--alpha", rc.alpha);
  recovery->add_option("--reps", rc.reps);
  recovery->add_option("--seed", rc.seed)->required();
  recovery->add_option("--workers", rc.workers);
  recovery->add_option("--trajectory-csv", rc_traj);

  std::string addr = "127.0.0.1:8080";
  std::string snapshot_dir;
  ServiceOptions so;
  auto* serve = app.add_subcommand("serve", "HTTP service");
  serve->add_option("--addr", addr, "host:port");
  serve->add_option("--cors-origin", so.cors_origin, "allowed origin; empty disables CORS");
  serve->add_option("--rep-cap", so.compare_rep_cap, "max reps for /compare");
  serve->add_option("--snapshot-dir", snapshot_dir, "also persist sessions here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArgs;
  }

  try {
    if (*design) return cmd_design(da);
    if (*init) return cmd_init(ia);
    if (*monitor) return cmd_monitor(mon_session, mon_batch, mon_json);
    if (*simulate) return cmd_simulate(sa);
    if (*calibrate) return cmd_calibrate(ca);
    if (*futility) return cmd_futility(fa);
    if (*platform) return cmd_platform(pa);
    if (*hybrid) return cmd_hybrid(ha);
    if (*recovery) return cmd_recovery(rc, rc_traj);
    if (*serve) {
      if (!snapshot_dir.empty()) so.snapshot_dir = snapshot_dir;
      return cmd_serve(addr, so);
    }
  } catch (const StateError& e) {
    spdlog::error("{}", e.what());
    return kTerminal;
  } catch (const FormatError& e) {
    spdlog::error("{}", e.what());
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kBadArgs;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
