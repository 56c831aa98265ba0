#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "anytime/anytime.hpp"

using namespace anytime;

namespace {

std::vector<OutcomePair> hybrid_fixture() {
  return parse_batch_csv(read_file(std::string(ANYTIME_TEST_DATA) + "/hybrid_stream.csv"), 0);
}

}  // namespace

TEST(Comparators, WaldZ) {
  EXPECT_NEAR(wald_z({7, 10, 3, 10}), 1.952, 1e-3);
  EXPECT_EQ(wald_z({2, 2, 0, 2}), std::numeric_limits<double>::infinity());
  EXPECT_EQ(wald_z({0, 2, 2, 2}), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(wald_z({1, 2, 1, 2}), 0.0);
}

TEST(Comparators, ObfBoundary) {
  EXPECT_NEAR(obf_boundary_at(2.145, 1.0), 2.145, 1e-12);
  EXPECT_NEAR(obf_boundary_at(2.145, 0.25), 4.290, 1e-12);
  EXPECT_NEAR(obf_boundary_at(2.145, 0.05), 9.594, 2e-3);
}

TEST(Comparators, Schedules) {
  const auto f = LookSchedule::fixed(20, 200);
  ASSERT_EQ(f.looks().size(), 20u);
  EXPECT_EQ(f.looks().front(), 10);
  EXPECT_EQ(f.looks().back(), 200);
  const auto ir = LookSchedule::irregular(5, 200, 11);
  ASSERT_EQ(ir.looks().size(), 5u);
  EXPECT_EQ(ir.looks().back(), 200);
  EXPECT_TRUE(std::is_sorted(ir.looks().begin(), ir.looks().end()));
  EXPECT_EQ(LookSchedule::irregular(5, 200, 11).looks(), ir.looks());
  EXPECT_EQ(LookSchedule::continuous(200).looks().size(), 200u);
  EXPECT_THROW(LookSchedule::fixed(0, 200), std::invalid_argument);
}

TEST(Comparators, PosteriorExtremes) {
  EXPECT_LT(posterior_prob_superiority({0, 10, 10, 10}), 1e-4);
  EXPECT_NEAR(posterior_prob_superiority({5, 10, 5, 10}), 0.5, 1e-9);
  const double p = posterior_prob_superiority({7, 10, 3, 10});
  EXPECT_NEAR(p + posterior_prob_superiority({3, 10, 7, 10}), 1.0, 1e-9);
}

TEST(Comparators, ContinuousCalibrationExceedsTwentyLooks) {
  CalibrationSpec spec{0.3, 0.025, 20'000, 4, 2};
  const double c20 = calibrate_obf(LookSchedule::fixed(20, 200), spec);
  EXPECT_NEAR(c20, 2.145, 0.05);
  const double c5 = calibrate_obf(LookSchedule::fixed(5, 200), spec);
  EXPECT_LT(c5, c20);
  EXPECT_TRUE(std::isinf(calibrate_obf(LookSchedule::continuous(200), spec)));
}

TEST(Comparators, SingleLookBayesThresholdIsNearNominal) {
  CalibrationSpec spec{0.3, 0.025, 20'000, 6, 2};
  const auto b = calibrate_bayes_threshold(LookSchedule::fixed(1, 200), spec);
  EXPECT_GT(b.threshold, 0.96);
  EXPECT_LT(b.threshold, 0.99);
}

TEST(Platform, EbhHandExample) {
  const std::vector<EValue> es = {100.0, 90.0, 10.0, 1.0};
  auto r = ebh(es, 0.05);
  std::sort(r.begin(), r.end());
  EXPECT_EQ(r, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(ebh(std::vector<EValue>{}, 0.05).empty());
}

TEST(Platform, SharedControlCursor) {
  PlatformConfig cfg;
  cfg.lambda = 0.5;
  Platform p(cfg);
  p.add_arm("A");
  p.add_control(0);
  p.add_control(0);
  p.add_treatment("A", 1);
  EXPECT_EQ(p.get("A").eprocess.n(), 1);
  EXPECT_NEAR(p.get("A").eprocess.wealth(), 1.5, 1e-12);
  p.add_arm("B");  // joins now: only later controls are concurrent
  p.add_treatment("B", 1);
  EXPECT_EQ(p.get("B").eprocess.n(), 0);
  p.add_control(0);
  EXPECT_EQ(p.get("B").eprocess.n(), 1);
  p.add_treatment("A", 1);
  EXPECT_EQ(p.get("A").eprocess.n(), 2);
}

TEST(Platform, AlphaSpendingAndCapacity) {
  PlatformConfig cfg;
  cfg.max_arms = 2;
  Platform p(cfg);
  p.add_arm("A");
  p.add_arm("B");
  EXPECT_THROW(p.add_arm("C"), ConfigError);
  EXPECT_NEAR(p.allocated_alpha(), cfg.total_alpha, 1e-15);
  p.drop("A");
  EXPECT_THROW(p.add_treatment("A", 1), StateError);
}

TEST(Platform, NovickReplayRejectsNothing) {
  const auto orders = arrival_orders(novick_counts(), 0);
  PlatformConfig cfg;
  cfg.lambda = grow_lambda({kNovickDesignTreatment, kNovickDesignControl});
  EXPECT_NEAR(cfg.lambda, 0.7267, 1e-4);
  const auto rep = platform_replay(orders, "B", {"A", "C", "D"}, {25, 50, 75, 100}, cfg);
  ASSERT_EQ(rep.looks.size(), 4u);
  for (const auto& l : rep.looks) EXPECT_TRUE(l.rejections.empty());
  const auto ab = pairwise_eprocess(orders, "A", "B", cfg.lambda, 0.025);
  EXPECT_EQ(ab.events_treatment, 7);
  EXPECT_EQ(ab.events_control, 1);
  EXPECT_NEAR(ab.av_p * ab.max_e, 1.0, 1e-12);
}

TEST(Platform, ArrivalOrderKeepsCounts) {
  for (const auto& a : novick_counts()) {
    const auto xs = arrival_order(a, 42);
    EXPECT_EQ(std::count(xs.begin(), xs.end(), 1), a.events);
    EXPECT_EQ(arrival_order(a, 42), xs);
  }
  EXPECT_THROW(parse_arm_counts_csv("arm,events,n\nA,5,3\n"), FormatError);
  EXPECT_THROW(parse_arm_counts_csv("a,b\n"), FormatError);
}

TEST(Hybrid, FixtureTable) {
  const auto stream = hybrid_fixture();
  ASSERT_EQ(stream.size(), 200u);
  const auto rows = hybrid_monitor(stream, LookSchedule::fixed(20, 200), 2.145, 0.3125, 0.025);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_NEAR(rows[0].z, 1.952, 1e-3);
  EXPECT_NEAR(rows[0].gs_bound, 9.593, 2e-3);
  int first_e = 0, first_gs = 0;
  for (const auto& r : rows) {
    if (!first_e && r.e_reject) first_e = r.look;
    if (!first_gs && r.gs_reject) first_gs = r.look;
    EXPECT_NEAR(r.av_p * r.sup_e, 1.0, 1e-12);
  }
  EXPECT_EQ(first_e, 5);
  EXPECT_EQ(first_gs, 6);
  EXPECT_NEAR(rows[4].log_e, 4.484, 1e-3);
  EXPECT_NEAR(rows[19].z, 5.089, 1e-3);
  EXPECT_NEAR(rows[19].log_e, 10.278, 1e-3);
}

TEST(SimEngine, ReportIsIndependentOfWorkerCount) {
  SimulationConfig cfg;
  cfg.reps = 500;
  cfg.master_seed = 17;
  cfg.workers = 1;
  const auto a = io::to_json(simulate_comparison(cfg)).dump();
  cfg.workers = 4;
  EXPECT_EQ(io::to_json(simulate_comparison(cfg)).dump(), a);
  cfg.master_seed = 18;
  EXPECT_NE(io::to_json(simulate_comparison(cfg)).dump(), a);
}

TEST(SimEngine, SmallRunNearReferencePower) {
  SimulationConfig cfg;
  cfg.reps = 5'000;
  cfg.master_seed = 17;
  const auto rep = simulate_comparison(cfg);
  const auto& e = rep.result("evalue");
  EXPECT_NEAR(e.reject_rate_alt, 0.723, 4 * e.se_alt);
  EXPECT_LE(e.reject_rate_null, 0.025);
}

TEST(SimEngine, ProgressReachesTotal) {
  SimulationConfig cfg;
  cfg.reps = 200;
  cfg.master_seed = 1;
  std::vector<Progress> seen;
  simulate_comparison(cfg, [&](const Progress& p) { seen.push_back(p); });
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.back().done, seen.back().total);
}
