#pragma once

// HTTP facade over design, monitoring sessions and comparison runs.
//
// Service holds the logic and returns (status, JSON) replies, so it can be
// exercised without sockets; mount() binds it to a cpp-httplib server.
// Sessions live in memory, each behind its own mutex; the registry lock is
// held only for lookup. Optionally every session write is also snapshotted to
// disk in the session file format.

#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "anytime/design.hpp"
#include "anytime/error.hpp"
#include "anytime/io.hpp"
#include "anytime/session.hpp"
#include "anytime/simengine.hpp"

namespace anytime {

struct ServiceOptions {
  std::int64_t compare_rep_cap = 10'000;
  int max_concurrent_compares = 2;
  std::size_t compare_workers = rng::default_workers();
  std::optional<std::filesystem::path> snapshot_dir;
  std::string cors_origin = "*";  // empty disables CORS headers
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// UTC timestamp, second resolution: 2024-01-31T12:00:00Z.
inline std::string utc_now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Service {
 public:
  using json = nlohmann::json;
  using LineSink = std::function<void(const json&)>;

  explicit Service(ServiceOptions opts = {}) : opts_(std::move(opts)), compare_slots_(opts_.max_concurrent_compares) {
    if (opts_.snapshot_dir) std::filesystem::create_directories(*opts_.snapshot_dir);
  }

  [[nodiscard]] const ServiceOptions& options() const noexcept { return opts_; }

  // POST /design ------------------------------------------------------------

  Reply design(const json& body) {
    return guarded([&] {
      const auto alt = design_from_json(body);
      DesignReport rep;
      std::optional<PowerRequest> power;
      if (body.contains("n_max")) {
        power = PowerRequest{body.at("n_max").get<std::int64_t>(), body.value("reps", std::int64_t{2000}),
                             body.value("seed", std::uint64_t{0})};
        if (power->reps > opts_.compare_rep_cap) return too_large();
      }
      rep = design_report(alt, power);
      json j = io::to_json(rep, false);
      if (body.contains("lambdas")) {
        json pts = json::array();
        for (const auto& row : design_grid({alt}, body.at("lambdas").get<std::vector<double>>())) {
          pts.push_back({{"lambda", row.lambda}, {"growth", row.growth}, {"expected_pairs", io::opt(row.expected_pairs)}});
        }
        j["curve"] = pts;
      } else {
        j["curve"] = io::design_curve(alt, body.value("lambda_step", 0.01));
      }
      return Reply{200, j};
    });
  }

  // sessions ----------------------------------------------------------------

  Reply create_session(const json& body) {
    return guarded([&] {
      const auto cfg = config_from_request(body);
      std::string id = body.value("id", std::string());
      if (!id.empty() && !valid_id(id)) throw ArgumentError("session id must match [A-Za-z0-9_-]{1,64}");
      auto entry = std::make_shared<Entry>();
      entry->created_at = utc_now_iso8601();
      {
        std::lock_guard lock(registry_mutex_);
        if (id.empty()) id = "s" + std::to_string(++next_id_);
        if (sessions_.count(id)) return Reply{409, error_body("session '" + id + "' already exists")};
        entry->session.emplace(id, cfg);
        sessions_.emplace(id, entry);
      }
      std::lock_guard lock(entry->mutex);
      snapshot(*entry);
      return Reply{201, handle_json(*entry)};
    });
  }

  Reply get_session(const std::string& id) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    std::lock_guard lock(entry->mutex);
    json j = handle_json(*entry);
    j["trajectory"] = trajectory_json(entry->session->efficacy().trajectory());
    j["decisions"] = decisions_json(entry->session->decisions());
    j["cs_method"] = to_string(entry->session->confseq().config().method);
    return {200, j};
  }

  Reply delete_session(const std::string& id) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(registry_mutex_);
      auto it = sessions_.find(id);
      if (it == sessions_.end()) return not_found(id);
      entry = it->second;
      sessions_.erase(it);
    }
    std::lock_guard lock(entry->mutex);
    if (opts_.snapshot_dir) std::filesystem::remove(snapshot_path(id));
    return {204, nullptr};
  }

  /// Body: JSON array of {pair_index, x_treatment, x_control} (or an object
  /// with a "pairs" array), or the batch CSV when `content_type` is text/csv.
  Reply batch(const std::string& id, const std::string& body, const std::string& content_type) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    std::lock_guard lock(entry->mutex);
    auto& s = *entry->session;
    if (s.terminal()) return {409, error_body("session '" + id + "' reached a terminal decision: " + s.summary().decision)};
    std::vector<OutcomePair> pairs;
    try {
      pairs = content_type.rfind("text/csv", 0) == 0 ? parse_batch_csv(body, s.n()) : parse_batch_json(body, s.n());
    } catch (const IndexConflict& e) {
      return {409, error_body(e.what())};
    } catch (const std::exception& e) {
      return {400, error_body(e.what())};
    }
    const auto before_traj = s.efficacy().trajectory().size();
    const auto before_dec = s.decisions().size();
    s.apply_batch(pairs);
    snapshot(*entry);
    json j = handle_json(*entry);
    j["trajectory"] = trajectory_json(s.efficacy().trajectory(), before_traj);
    j["decisions"] = decisions_json(s.decisions(), before_dec);
    return {200, j};
  }

  /// Full session document (session file format) for export.
  Reply export_session(const std::string& id) {
    auto entry = find(id);
    if (!entry) return not_found(id);
    std::lock_guard lock(entry->mutex);
    json j = to_json(*entry->session);
    j["created_at"] = entry->created_at;
    return {200, j};
  }

  // POST /compare -----------------------------------------------------------

  /// Runs a comparison. With a sink, progress events {done, total,
  /// partial_rates} are emitted as they happen, followed by {"report": ...}.
  Reply compare(const json& body, const LineSink& sink = {}) {
    return guarded([&] {
      if (!body.contains("seed")) throw ArgumentError("seed is required");
      auto cfg = io::simulation_config_from_json(body);
      if (cfg.reps > opts_.compare_rep_cap || cfg.effective_calibration_reps() > opts_.compare_rep_cap) {
        return too_large();
      }
      cfg.workers = opts_.compare_workers;
      compare_slots_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{compare_slots_};
      ProgressFn progress;
      if (sink) progress = [&](const Progress& p) { sink(io::progress_json(p)); };
      const auto rep = simulate_comparison(cfg, progress);
      json j = io::to_json(rep);
      if (sink) sink({{"report", j}});
      return Reply{200, j};
    });
  }

  [[nodiscard]] std::size_t session_count() const {
    std::lock_guard lock(registry_mutex_);
    return sessions_.size();
  }

 private:
  struct Entry {
    std::mutex mutex;
    std::string created_at;
    std::optional<MonitoringSession> session;
  };

  struct IndexConflict : FormatError {
    using FormatError::FormatError;
  };

  static json error_body(const std::string& msg) { return {{"error", msg}}; }
  Reply not_found(const std::string& id) const { return {404, error_body("unknown session '" + id + "'")}; }
  Reply too_large() const {
    return {413, error_body("reps exceed the service cap of " + std::to_string(opts_.compare_rep_cap) +
                            "; run full-scale studies through the CLI")};
  }

  template <class F>
  Reply guarded(F&& f) {
    try {
      return f();
    } catch (const StateError& e) {
      return {409, error_body(e.what())};
    } catch (const json::exception& e) {
      return {400, error_body(std::string("malformed request: ") + e.what())};
    } catch (const std::invalid_argument& e) {
      return {400, error_body(e.what())};
    } catch (const FormatError& e) {
      return {400, error_body(e.what())};
    }
  }

  static bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
  }

  static SessionConfig config_from_request(const json& body) {
    SessionConfig cfg;
    if (body.contains("design")) cfg.design = design_from_json(body.at("design"));
    if (body.contains("lambda") && !body.at("lambda").is_null()) cfg.lambda = body.at("lambda").get<double>();
    if (body.contains("confseq")) {
      const auto& c = body.at("confseq");
      cfg.cs.method = cs_method_from_string(c.value("method", std::string("betting")));
      cfg.cs.alpha = c.value("alpha", cfg.cs.alpha);
      cfg.cs.resolution = c.value("resolution", cfg.cs.resolution);
      cfg.cs.lambda_cs = c.value("lambda_cs", cfg.cs.lambda_cs);
      cfg.cs.validate();
    }
    if (body.contains("futility")) {
      const auto& f = body.at("futility");
      const double dmin = f.value("delta_min", 0.1);
      FutilityConfig fc{dmin, f.value("alpha_f", 0.1), f.value("lambda_prime", FutilityConfig::default_lambda(dmin))};
      fc.validate();
      cfg.futility = fc;
    }
    (void)cfg.efficacy_lambda();  // surfaces a missing favorable bet as 400 now, not on first batch
    return cfg;
  }

  static std::vector<OutcomePair> parse_batch_json(const std::string& body, std::int64_t ledger_size) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("batch body is not JSON: ") + e.what());
    }
    const json& rows = j.is_object() ? j.at("pairs") : j;
    if (!rows.is_array()) throw FormatError("batch must be an array of pairs");
    std::vector<OutcomePair> out;
    for (const auto& r : rows) {
      if (!r.is_object()) throw FormatError("each pair must be an object {pair_index, x_treatment, x_control}");
      const auto get = [&](const char* key) {
        if (!r.contains(key) || !r.at(key).is_number_integer()) {
          throw FormatError(std::string("pair field '") + key + "' must be an integer");
        }
        return r.at(key).get<std::int64_t>();
      };
      const auto idx = get("pair_index");
      const auto xt = get("x_treatment"), xc = get("x_control");
      if ((xt != 0 && xt != 1) || (xc != 0 && xc != 1)) throw FormatError("outcomes must be 0 or 1");
      const auto expected = ledger_size + static_cast<std::int64_t>(out.size()) + 1;
      if (idx != expected) {
        throw IndexConflict("pair_index " + std::to_string(idx) + " but " + std::to_string(expected) +
                            " expected (indices must continue the ledger without gaps)");
      }
      out.push_back({static_cast<std::uint8_t>(xt), static_cast<std::uint8_t>(xc)});
    }
    return out;
  }

  static json decisions_json(const std::vector<DecisionEntry>& ds, std::size_t from = 0) {
    json out = json::array();
    for (std::size_t i = from; i < ds.size(); ++i) out.push_back({{"n", ds[i].n}, {"event", to_string(ds[i].event)}});
    return out;
  }

  static json handle_json(const Entry& e) {
    const auto& s = *e.session;
    return {{"id", s.id()},
            {"created_at", e.created_at},
            {"design", to_json(s.config().design)},
            {"lambda", s.efficacy().strategy().fixed_lambda()},
            {"threshold", 1.0 / s.config().design.alpha},
            {"delta_min", s.futility().config().delta_min},
            {"summary", to_json(s.summary())}};
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::filesystem::path snapshot_path(const std::string& id) const { return *opts_.snapshot_dir / (id + ".json"); }

  void snapshot(const Entry& e) const {
    if (!opts_.snapshot_dir) return;
    json j = to_json(*e.session);
    j["created_at"] = e.created_at;
    atomic_write(snapshot_path(e.session->id()), j.dump(2) + "\n");
  }

  ServiceOptions opts_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 0;
  std::counting_semaphore<> compare_slots_;
};

// ---------------------------------------------------------------------------
// HTTP binding

/// Registers every route on `server`.
inline void mount(httplib::Server& server, Service& svc) {
  using json = nlohmann::json;
  const std::string origin = svc.options().cors_origin;
  if (!origin.empty()) {
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type, Accept"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }

  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    if (r.status != 204) res.set_content(r.body.dump(), "application/json");
  };
  auto parse = [](const httplib::Request& req) -> std::optional<json> {
    try {
      return req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::parse_error&) {
      return std::nullopt;
    }
  };
  auto bad_json = [send](httplib::Response& res) { send(res, {400, {{"error", "request body is not valid JSON"}}}); };

  server.Post("/design", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    auto body = parse(req);
    if (!body) return bad_json(res);
    send(res, svc.design(*body));
  });
  server.Post("/sessions", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    auto body = parse(req);
    if (!body) return bad_json(res);
    send(res, svc.create_session(*body));
  });
  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_session(req.matches[1]));
  });
  server.Get(R"(/sessions/([A-Za-z0-9_-]+)/export)", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.export_session(req.matches[1]));
  });
  server.Delete(R"(/sessions/([A-Za-z0-9_-]+))", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.delete_session(req.matches[1]));
  });
  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/batch)", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.batch(req.matches[1], req.body, req.get_header_value("Content-Type")));
  });
  server.Post("/compare", [=, &svc](const httplib::Request& req, httplib::Response& res) {
    auto body = parse(req);
    if (!body) return bad_json(res);
    const bool stream = req.get_param_value("stream") == "1" || req.get_param_value("stream") == "true" ||
                        req.get_header_value("Accept").find("application/x-ndjson") != std::string::npos;
    if (!stream) return send(res, svc.compare(*body));
    // Validate up front so errors keep their status codes; only the run streams.
    if (!body->contains("seed")) return send(res, {400, {{"error", "seed is required"}}});
    try {
      const auto cfg = io::simulation_config_from_json(*body);
      if (cfg.reps > svc.options().compare_rep_cap || cfg.effective_calibration_reps() > svc.options().compare_rep_cap) {
        return send(res, {413, {{"error", "reps exceed the service cap"}}});
      }
    } catch (const std::exception& e) {
      return send(res, {400, {{"error", e.what()}}});
    }
    res.set_chunked_content_provider("application/x-ndjson", [&svc, body = *body](std::size_t, httplib::DataSink& sink) {
      const auto r = svc.compare(body, [&](const json& line) {
        const auto s = line.dump() + "\n";
        sink.write(s.data(), s.size());
      });
      if (r.status != 200) {
        const auto s = json{{"error", r.body}}.dump() + "\n";
        sink.write(s.data(), s.size());
      }
      sink.done();
      return true;
    });
  });
}

}  // namespace anytime
