#pragma once

// A live monitored trial: outcome ledger, efficacy e-process, confidence
// sequence, both futility routes, and a decision log.
//
// Persistence stores the configuration and the ledger; loading replays the
// ledger into fresh components and refuses files whose stored state does not
// match the replay.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anytime/confseq.hpp"
#include "anytime/core.hpp"
#include "anytime/design.hpp"
#include "anytime/error.hpp"
#include "anytime/futility.hpp"

namespace anytime {

inline constexpr int kSessionSchema = 1;

struct SessionConfig {
  DesignAlternative design{0.45, 0.30, Direction::treatment_higher, 0.025};
  std::optional<double> lambda;  // defaults to the GROW fraction of `design`
  ConfidenceSequenceConfig cs{};
  std::optional<FutilityConfig> futility;  // defaults to delta_min 0.1, alpha_f 0.1

  [[nodiscard]] double efficacy_lambda() const {
    const double l = lambda ? *lambda : grow_lambda(design);
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("design alternative gives no favorable bet; supply lambda explicitly");
    return l;
  }

  [[nodiscard]] FutilityConfig futility_config() const {
    return futility ? *futility : FutilityConfig::with_defaults(0.1, 0.1);
  }
};

enum class SessionEvent { continue_monitoring, reject_efficacy, signal_futility_cs, signal_futility_recip };

inline const char* to_string(SessionEvent e) {
  switch (e) {
    case SessionEvent::continue_monitoring: return "continue";
    case SessionEvent::reject_efficacy: return "reject_efficacy";
    case SessionEvent::signal_futility_cs: return "signal_futility_cs";
    case SessionEvent::signal_futility_recip: return "signal_futility_recip";
  }
  return "?";
}

inline SessionEvent session_event_from_string(std::string_view s) {
  if (s == "continue") return SessionEvent::continue_monitoring;
  if (s == "reject_efficacy") return SessionEvent::reject_efficacy;
  if (s == "signal_futility_cs") return SessionEvent::signal_futility_cs;
  if (s == "signal_futility_recip") return SessionEvent::signal_futility_recip;
  throw FormatError("unknown decision event '" + std::string(s) + "'");
}

struct DecisionEntry {
  std::int64_t n;
  SessionEvent event;
  friend bool operator==(const DecisionEntry&, const DecisionEntry&) = default;
};

struct SessionSummary {
  std::int64_t n = 0;
  double e = 1.0;
  double log_e = 0.0;
  double av_p = 1.0;
  Interval cs;
  double delta_hat = 0.0;
  bool futility_cs = false;
  bool futility_recip = false;
  double futility_recip_wealth = 1.0;
  std::string decision = "continue";
  bool terminal = false;
};

class MonitoringSession {
 public:
  explicit MonitoringSession(std::string id, SessionConfig cfg = {})
      : id_(std::move(id)), cfg_(std::move(cfg)),
        efficacy_(BettingStrategy::fixed(cfg_.efficacy_lambda()), cfg_.design.alpha, cfg_.design.direction, true),
        cs_(with_direction(cfg_.cs, cfg_.design.direction)),
        futility_(cfg_.futility_config(), cfg_.design.direction) {
    cfg_.design.validate();
  }

  /// Ingests a batch. Events are logged at the pair where they first occur;
  /// a batch without events logs "continue". Throws StateError once terminal.
  void apply_batch(const std::vector<OutcomePair>& batch) {
    if (terminal()) throw StateError("session '" + id_ + "' reached a terminal decision");
    if (batch.empty()) return;
    bool any = false;
    for (const auto& p : batch) {
      ingest(p);
      any |= check_events();
    }
    if (!any) decisions_.push_back({n(), SessionEvent::continue_monitoring});
  }

  [[nodiscard]] bool terminal() const noexcept {
    for (const auto& d : decisions_) {
      if (d.event != SessionEvent::continue_monitoring) return true;
    }
    return false;
  }

  [[nodiscard]] SessionSummary summary() const {
    SessionSummary s;
    s.n = n();
    s.log_e = efficacy_.log_wealth();
    s.e = efficacy_.wealth();
    s.av_p = efficacy_.av_pvalue();
    s.cs = cs_.interval();
    s.delta_hat = cs_.delta_hat();
    s.futility_cs = futility_cs_check(cs_, futility_.config().delta_min);
    s.futility_recip = futility_.ever_signaled();
    s.futility_recip_wealth = futility_.wealth();
    s.terminal = terminal();
    for (const auto& d : decisions_) {
      if (d.event != SessionEvent::continue_monitoring) {
        s.decision = to_string(d.event);
        break;
      }
    }
    return s;
  }

  [[nodiscard]] std::int64_t n() const noexcept { return static_cast<std::int64_t>(ledger_.size()); }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const SessionConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const std::vector<OutcomePair>& ledger() const noexcept { return ledger_; }
  [[nodiscard]] const std::vector<DecisionEntry>& decisions() const noexcept { return decisions_; }
  [[nodiscard]] const BettingEProcess& efficacy() const noexcept { return efficacy_; }
  [[nodiscard]] const ConfidenceSequence& confseq() const noexcept { return cs_; }
  [[nodiscard]] const ReciprocalEProcess& futility() const noexcept { return futility_; }

  /// Fresh session with the same configuration fed the same ledger, with the
  /// decision log restored verbatim.
  static MonitoringSession replay(std::string id, const SessionConfig& cfg, const std::vector<OutcomePair>& ledger,
                                  std::vector<DecisionEntry> decisions) {
    MonitoringSession s(std::move(id), cfg);
    for (const auto& p : ledger) {
      s.ingest(p);
      s.update_flags();
    }
    s.decisions_ = std::move(decisions);
    return s;
  }

 private:
  static ConfidenceSequenceConfig with_direction(ConfidenceSequenceConfig c, Direction d) {
    c.direction = d;
    return c;
  }

  void ingest(OutcomePair p) {
    ledger_.push_back(p);
    efficacy_.update(p);
    cs_.update(p);
    futility_.update(p);
  }

  void update_flags() {
    seen_efficacy_ |= efficacy_.rejects();
    seen_cs_ |= futility_cs_check(cs_, futility_.config().delta_min);
    seen_recip_ |= futility_.signals();
  }

  bool check_events() {
    bool any = false;
    auto fire = [&](bool now, bool& seen, SessionEvent e) {
      if (now && !seen) {
        seen = true;
        decisions_.push_back({n(), e});
        any = true;
      }
    };
    fire(efficacy_.rejects(), seen_efficacy_, SessionEvent::reject_efficacy);
    fire(futility_cs_check(cs_, futility_.config().delta_min), seen_cs_, SessionEvent::signal_futility_cs);
    fire(futility_.signals(), seen_recip_, SessionEvent::signal_futility_recip);
    return any;
  }

  std::string id_;
  SessionConfig cfg_;
  BettingEProcess efficacy_;
  ConfidenceSequence cs_;
  ReciprocalEProcess futility_;
  std::vector<OutcomePair> ledger_;
  std::vector<DecisionEntry> decisions_;
  bool seen_efficacy_ = false, seen_cs_ = false, seen_recip_ = false;
};

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

inline json to_json(const DesignAlternative& d) {
  return {{"p_treatment", d.p_treatment}, {"p_control", d.p_control}, {"direction", to_string(d.direction)},
          {"alpha", d.alpha}};
}

inline DesignAlternative design_from_json(const json& j) {
  DesignAlternative d;
  d.p_treatment = j.at("p_treatment").get<double>();
  d.p_control = j.at("p_control").get<double>();
  d.direction = direction_from_string(j.value("direction", std::string("treatment_higher")));
  d.alpha = j.value("alpha", 0.025);
  d.validate();
  return d;
}

inline json to_json(const Interval& iv) { return {{"lo", iv.lo}, {"hi", iv.hi}, {"anomalous", iv.anomalous}}; }

inline json to_json(const SessionSummary& s) {
  return {{"n", s.n},
          {"e", s.e},
          {"log_e", s.log_e},
          {"av_p", s.av_p},
          {"cs", to_json(s.cs)},
          {"delta_hat", s.delta_hat},
          {"futility_cs", s.futility_cs},
          {"futility_recip", s.futility_recip},
          {"futility_recip_wealth", s.futility_recip_wealth},
          {"decision", s.decision},
          {"terminal", s.terminal}};
}

inline json trajectory_json(const std::vector<TrajectoryPoint>& t, std::size_t from = 0) {
  json out = json::array();
  for (std::size_t i = from; i < t.size(); ++i) out.push_back({t[i].n, t[i].log_wealth});
  return out;
}

inline json to_json(const MonitoringSession& s) {
  const auto& cfg = s.config();
  const auto& cs = s.confseq();
  const auto& fut = s.futility();
  const auto& eff = s.efficacy();
  const auto iv = cs.interval();
  json ledger = json::array();
  for (const auto& p : s.ledger()) ledger.push_back({p.x_treatment, p.x_control});
  json decisions = json::array();
  for (const auto& d : s.decisions()) decisions.push_back({{"n", d.n}, {"event", to_string(d.event)}});
  return {
      {"schema", kSessionSchema},
      {"id", s.id()},
      {"design", to_json(cfg.design)},
      {"efficacy",
       {{"strategy", {{"kind", "fixed"}, {"lambda", eff.strategy().fixed_lambda()}}},
        {"n", eff.n()},
        {"log_wealth", eff.log_wealth()},
        {"running_sup_log_wealth", eff.running_sup_log_wealth()}}},
      {"confseq",
       {{"method", to_string(cs.config().method)},
        {"alpha", cs.config().alpha},
        {"resolution", cs.config().resolution},
        {"lambda_cs", cs.config().lambda_cs},
        {"n", cs.n()},
        {"lo", iv.lo},
        {"hi", iv.hi},
        {"anomalous", iv.anomalous},
        {"delta_hat", cs.delta_hat()}}},
      {"futility",
       {{"delta_min", fut.config().delta_min},
        {"alpha_f", fut.config().alpha_f},
        {"lambda_prime", fut.config().lambda_prime},
        {"futility_cs", futility_cs_check(cs, fut.config().delta_min)},
        {"futility_recip_wealth", fut.wealth()},
        {"log_wealth", fut.log_wealth()},
        {"running_sup_log_wealth", fut.running_sup_log_wealth()}}},
      {"ledger", ledger},
      {"decisions", decisions},
      {"summary", to_json(s.summary())},
      {"trajectory", trajectory_json(eff.trajectory())},
  };
}

inline SessionConfig session_config_from_json(const json& j) {
  SessionConfig cfg;
  cfg.design = design_from_json(j.at("design"));
  if (j.contains("efficacy")) cfg.lambda = j.at("efficacy").at("strategy").at("lambda").get<double>();
  if (j.contains("confseq")) {
    const auto& c = j.at("confseq");
    cfg.cs.method = cs_method_from_string(c.value("method", std::string("betting")));
    cfg.cs.alpha = c.value("alpha", 0.05);
    cfg.cs.resolution = c.value("resolution", 0.005);
    cfg.cs.lambda_cs = c.value("lambda_cs", 0.2);
  }
  if (j.contains("futility")) {
    const auto& f = j.at("futility");
    const double dmin = f.at("delta_min").get<double>();
    FutilityConfig fc{dmin, f.value("alpha_f", 0.1), f.value("lambda_prime", FutilityConfig::default_lambda(dmin))};
    fc.validate();
    cfg.futility = fc;
  }
  return cfg;
}

namespace detail {
inline bool same_state(double stored, double replayed) { return std::abs(stored - replayed) <= 1e-9 * (1.0 + std::abs(replayed)); }
}  // namespace detail

/// Parses a session document, replays its ledger and checks the stored
/// component state against the replay.
inline MonitoringSession session_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kSessionSchema) throw FormatError("unsupported session schema");
    const auto cfg = session_config_from_json(j);
    std::vector<OutcomePair> ledger;
    for (const auto& row : j.at("ledger")) {
      if (!row.is_array() || row.size() != 2) throw FormatError("ledger rows must be [x_treatment, x_control]");
      ledger.push_back(OutcomePair::of(row[0].get<int>(), row[1].get<int>()));
    }
    std::vector<DecisionEntry> decisions;
    for (const auto& d : j.value("decisions", json::array())) {
      decisions.push_back({d.at("n").get<std::int64_t>(), session_event_from_string(d.at("event").get<std::string>())});
    }
    auto s = MonitoringSession::replay(j.at("id").get<std::string>(), cfg, ledger, std::move(decisions));
    if (j.contains("efficacy")) {
      const auto& e = j.at("efficacy");
      if (e.at("n").get<std::int64_t>() != s.efficacy().n() ||
          !detail::same_state(e.at("log_wealth").get<double>(), s.efficacy().log_wealth()) ||
          !detail::same_state(e.at("running_sup_log_wealth").get<double>(), s.efficacy().running_sup_log_wealth())) {
        throw FormatError("stored efficacy state does not match the ledger replay");
      }
    }
    if (j.contains("futility") && j.at("futility").contains("log_wealth") &&
        !detail::same_state(j.at("futility").at("log_wealth").get<double>(), s.futility().log_wealth())) {
      throw FormatError("stored futility state does not match the ledger replay");
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed session document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid session document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// files

/// Writes to a sibling temporary file, then renames over `path`.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void save_session(const MonitoringSession& s, const std::filesystem::path& path) {
  atomic_write(path, to_json(s).dump(2) + "\n");
}

inline MonitoringSession load_session(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("session file is not JSON: ") + e.what());
  }
  return session_from_json(j);
}

inline constexpr std::string_view kBatchHeader = "pair_index,x_treatment,x_control";

/// Parses a batch CSV whose pair_index values must continue a ledger of
/// `ledger_size` pairs without gaps or overlaps.
inline std::vector<OutcomePair> parse_batch_csv(std::string_view text, std::int64_t ledger_size) {
  std::vector<OutcomePair> out;
  std::size_t pos = 0;
  std::int64_t line_no = 0;
  bool header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kBatchHeader) throw FormatError("batch CSV must start with the header '" + std::string(kBatchHeader) + "'");
      header = true;
      continue;
    }
    if (line.empty()) continue;
    std::int64_t f[3];
    std::size_t at = 0;
    for (int k = 0; k < 3; ++k) {
      const auto comma = k < 2 ? line.find(',', at) : line.size();
      if (comma == std::string_view::npos) throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields");
      const auto field = line.substr(at, comma - at);
      const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), f[k]);
      if (ec != std::errc{} || p != field.data() + field.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": field " + std::to_string(k + 1) + " is not an integer");
      }
      at = comma + 1;
    }
    const std::int64_t expected = ledger_size + static_cast<std::int64_t>(out.size()) + 1;
    if (f[0] != expected) {
      throw FormatError("line " + std::to_string(line_no) + ": pair_index " + std::to_string(f[0]) + " but " +
                        std::to_string(expected) + " expected (indices must continue the ledger without gaps)");
    }
    if ((f[1] != 0 && f[1] != 1) || (f[2] != 0 && f[2] != 1)) {
      throw FormatError("line " + std::to_string(line_no) + ": outcomes must be 0 or 1");
    }
    out.push_back({static_cast<std::uint8_t>(f[1]), static_cast<std::uint8_t>(f[2])});
  }
  if (!header) throw FormatError("batch CSV is empty; the header line is mandatory");
  return out;
}

inline std::string batch_csv(const std::vector<OutcomePair>& pairs, std::int64_t first_index = 1) {
  std::ostringstream out;
  out << kBatchHeader << '\n';
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << first_index + static_cast<std::int64_t>(i) << ',' << int{pairs[i].x_treatment} << ','
        << int{pairs[i].x_control} << '\n';
  }
  return out.str();
}

}  // namespace anytime
