#include <gtest/gtest.h>

#include <string>
#include <thread>
#include <vector>

#include "anytime/anytime.hpp"
#include "anytime/service.hpp"

using namespace anytime;
using json = nlohmann::json;

namespace {

std::string pair_rows(int from, int count, int xt, int xc) {
  json a = json::array();
  for (int i = 0; i < count; ++i) a.push_back({{"pair_index", from + i}, {"x_treatment", xt}, {"x_control", xc}});
  return a.dump();
}

}  // namespace

TEST(Service, Design) {
  Service svc;
  const auto r = svc.design({{"p_treatment", 0.45}, {"p_control", 0.30}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_NEAR(r.body["lambda_star"].get<double>(), 0.3125, 1e-12);
  EXPECT_EQ(svc.design({{"p_treatment", 2.0}, {"p_control", 0.3}}).status, 400);
}

TEST(Service, SessionLifecycle) {
  Service svc;
  const auto c = svc.create_session({{"id", "trial-1"}, {"design", {{"p_treatment", 0.45}, {"p_control", 0.30}}}, {"lambda", 0.5}});
  ASSERT_EQ(c.status, 201) << c.body.dump();
  EXPECT_EQ(c.body["id"], "trial-1");
  EXPECT_TRUE(c.body.contains("created_at"));
  EXPECT_EQ(svc.create_session({{"id", "trial-1"}}).status, 409);
  EXPECT_EQ(svc.get_session("nope").status, 404);

  auto b = svc.batch("trial-1", pair_rows(1, 3, 1, 0), "application/json");
  ASSERT_EQ(b.status, 200) << b.body.dump();
  EXPECT_EQ(b.body["summary"]["n"], 3);
  EXPECT_EQ(b.body["trajectory"].size(), 3u);
  EXPECT_EQ(svc.batch("trial-1", pair_rows(2, 1, 1, 0), "application/json").status, 409);  // index conflict
  EXPECT_EQ(svc.batch("trial-1", "[{\"pair_index\": 4}]", "application/json").status, 400);

  b = svc.batch("trial-1", "pair_index,x_treatment,x_control\n4,1,0\n5,1,0\n6,1,0\n7,1,0\n8,1,0\n9,1,0\n10,1,0\n",
                "text/csv");
  ASSERT_EQ(b.status, 200) << b.body.dump();
  EXPECT_EQ(b.body["summary"]["decision"], "reject_efficacy");
  EXPECT_EQ(svc.batch("trial-1", pair_rows(11, 1, 0, 0), "application/json").status, 409);  // terminal

  const auto ex = svc.export_session("trial-1");
  ASSERT_EQ(ex.status, 200);
  const auto replayed = session_from_json(ex.body);
  EXPECT_EQ(replayed.n(), 10);
  EXPECT_EQ(svc.delete_session("trial-1").status, 204);
  EXPECT_EQ(svc.session_count(), 0u);
}

TEST(Service, MatchesLibraryReplay) {
  Service svc;
  ASSERT_EQ(svc.create_session({{"id", "eq"}}).status, 201);
  std::vector<OutcomePair> ledger;
  std::string csv = std::string(kBatchHeader) + "\n";
  rng::Xoshiro256pp gen(21);
  const rng::Bernoulli bt(0.4), bc(0.3);
  for (int i = 1; i <= 80; ++i) {
    const bool xt = bt(gen);
    const bool xc = bc(gen);
    ledger.push_back({xt, xc});
    csv += std::to_string(i) + "," + std::to_string(int{xt}) + "," + std::to_string(int{xc}) + "\n";
  }
  ASSERT_EQ(svc.batch("eq", csv, "text/csv").status, 200);
  MonitoringSession lib("eq");
  lib.apply_batch(ledger);
  EXPECT_EQ(svc.get_session("eq").body["summary"].dump(), to_json(lib.summary()).dump());
}

TEST(Service, CompareLimitsAndStreaming) {
  ServiceOptions opts;
  opts.compare_rep_cap = 1'000;
  Service svc(opts);
  EXPECT_EQ(svc.compare({{"reps", 200}}).status, 400);  // no seed
  EXPECT_EQ(svc.compare({{"reps", 50'000}, {"seed", 1}}).status, 413);
  EXPECT_EQ(svc.compare({{"reps", 200}, {"seed", 1}, {"bogus", 1}}).status, 400);
  std::vector<json> lines;
  const auto r = svc.compare({{"reps", 300}, {"calibration_reps", 300}, {"seed", 3}},
                             [&](const json& j) { lines.push_back(j); });
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_GE(lines.size(), 2u);
  EXPECT_TRUE(lines.front().contains("done"));
  EXPECT_TRUE(lines.back().contains("report"));
  EXPECT_EQ(lines.back()["report"].dump(), r.body.dump());
}

TEST(Service, Http) {
  Service svc;
  httplib::Server server;
  mount(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto r = cli.Post("/sessions", R"({"id":"h1"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  r = cli.Post("/sessions/h1/batch", "pair_index,x_treatment,x_control\n1,1,0\n", "text/csv");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["summary"]["n"], 1);
  r = cli.Get("/sessions/h1");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = cli.Get("/sessions/none");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  r = cli.Post("/compare?stream=1", R"({"reps":200,"calibration_reps":200,"seed":2})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_NE(r->get_header_value("Content-Type").find("ndjson"), std::string::npos);
  EXPECT_NE(r->body.find("\"report\""), std::string::npos);
  r = cli.Delete("/sessions/h1");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);

  server.stop();
  t.join();
}
