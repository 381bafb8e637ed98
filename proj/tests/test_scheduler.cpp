#include <gtest/gtest.h>

#include "ecolife/ecolife.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ecolife;
using fixture::expect_rel;

namespace {

const std::vector<Generation> kBoth{Generation::old_gen, Generation::new_gen};

}  // namespace

TEST(Normalizers, GoldenValues) {
  const Normalizers n = normalizers(fixture::sample_function(), sample_hardware(), dpso::SearchSpace{}, 300);
  expect_rel(n.s_max, 5.699999999999999);
  expect_rel(n.sc_max, 0.08435717033955241);
  expect_rel(n.kc_max, 0.17928121829020802);
}

TEST(Normalizers, SingleGenerationAndFloor) {
  dpso::SearchSpace s;
  s.locations = {Generation::new_gen};
  s.kat = {0};
  const FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, sample_hardware(), s, 300);
  EXPECT_DOUBLE_EQ(n.s_max, 5.0);
  expect_rel(n.sc_max, service_carbon(f, sample_hardware().new_hw, true, 300).total);
  EXPECT_EQ(n.kc_max, 1e-12);
}

TEST(KdmFitness, NoKeepAlive) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, {}, 200);
  const std::vector<double> gaps{10, 50, 900};
  const double v = kdm_fitness(f, {Generation::old_gen, 0}, gaps, 200, {}, n, hw, kBoth);
  const Generation cold = epdm_cold_choice(f, 200, {}, n, hw, kBoth);
  const double expected = 0.5 * f.on(cold).service_s(true) / n.s_max +
                          0.5 * service_carbon(f, hw[cold], true, 200).total / n.sc_max;
  expect_rel(v, expected, 1e-12);
}

TEST(KdmFitness, AlwaysWarm) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, {}, 200);
  const std::vector<double> gaps{10, 50, 120};
  const ObjectiveWeights time_only{1, 0};
  EXPECT_DOUBLE_EQ(kdm_fitness(f, {Generation::old_gen, 120}, gaps, 200, time_only, n, hw, kBoth), 2.4 / n.s_max);
}

TEST(KdmFitness, HandExpandedTwoGapHistory) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const oracle::Hw o = oracle::raw(hw.old_hw), nw = oracle::raw(hw.new_hw);
  const double ci = 300;
  dpso::SearchSpace space;
  space.kat = {0, 300};

  auto sc = [&](const oracle::Hw& h, Generation g, bool cold) {
    const HardwareTiming& t = f.on(g);
    return oracle::service(h, 512, t.exec_s, t.coldstart_s, t.cpu_power_exec_w, t.dram_power_exec_w, cold, ci);
  };
  const std::vector<double> ci_minutes(20, ci);
  const double s_max = 2.4 + 3.3;
  const double sc_max = std::max(sc(o, Generation::old_gen, true), sc(nw, Generation::new_gen, true));
  const double kc_max = oracle::keepalive(nw, 512, ci_minutes, 0, 300'000);
  // cold placement: new scores lower on both terms here
  ASSERT_LT(sc(nw, Generation::new_gen, true), sc(o, Generation::old_gen, true));

  // gaps 100 s (warm on old) and 400 s (cold, runs on new); keep (old, 300)
  const double es = (2.4 + 5.0) / 2;
  const double esc = (sc(o, Generation::old_gen, false) + sc(nw, Generation::new_gen, true)) / 2;
  const double ekc = (oracle::keepalive(o, 512, ci_minutes, 0, 100'000) + oracle::keepalive(o, 512, ci_minutes, 0, 300'000)) / 2;
  const double expected = 0.5 * es / s_max + 0.5 * esc / sc_max + 0.5 * ekc / kc_max;

  ArrivalHistory h(10);
  h.push(100);
  h.push(400);
  const Normalizers n = normalizers(f, hw, space, ci);
  expect_rel(kdm_fitness(f, {Generation::old_gen, 300}, h, ci, {}, n, hw, kBoth), expected, 1e-9);
}

TEST(KdmFitness, EmptyHistory) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  EXPECT_THROW(kdm_fitness(f, {}, std::vector<double>{}, 1, {}, {}, hw, kBoth), domain_error);
}

TEST(KdmFitness, TimeOnlyIsNonIncreasingInK) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const dpso::SearchSpace space;
  const Normalizers n = normalizers(f, hw, space, 150);
  const std::vector<double> gaps{30, 70, 200, 450, 1000, 90};
  for (Generation l : kBoth) {
    double prev = 1e300;
    for (double k : space.kat) {
      const double v = kdm_fitness(f, {l, k}, gaps, 150, {1, 0}, n, hw, kBoth);
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
  }
}

TEST(ArrivalHistory, WindowAndValidation) {
  ArrivalHistory h(3);
  for (double g : {1.0, 2.0, 3.0, 4.0}) h.push(g);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.gaps().front(), 2.0);
  EXPECT_THROW(h.push(0), domain_error);
  EXPECT_THROW(ArrivalHistory(0), config_error);
}

TEST(Epdm, WarmShortCircuits) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, {}, 100);
  EXPECT_EQ(epdm_choose(f, true, false, 100, {}, n, hw, kBoth), Generation::old_gen);
  EXPECT_EQ(epdm_choose(f, false, true, 100, {}, n, hw, kBoth), Generation::new_gen);
}

TEST(Epdm, PurePerformance) {
  const HardwarePair hw = sample_hardware();
  FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, {}, 100);
  EXPECT_EQ(epdm_choose(f, false, false, 100, {1, 0}, n, hw, kBoth), Generation::new_gen);
  f.timing[Generation::old_gen]->coldstart_s = 1.0;  // old now 3.4 s cold vs 5 s
  EXPECT_EQ(epdm_choose(f, false, false, 100, {1, 0}, n, hw, kBoth), Generation::old_gen);
}

TEST(Epdm, TieGoesToNew) {
  const Normalizers unit{1, 1, 1};
  const std::array<Generation, 2> gens{Generation::old_gen, Generation::new_gen};
  const std::array<double, 2> scores{placement_score(0.8, 0.6, {}, unit), placement_score(1.0, 0.4, {}, unit)};
  EXPECT_NEAR(scores[0], 0.7, 1e-15);
  EXPECT_NEAR(scores[1], 0.7, 1e-15);
  EXPECT_EQ(pick_lowest(gens, scores), Generation::new_gen);
  const std::array<Generation, 2> reversed{Generation::new_gen, Generation::old_gen};
  EXPECT_EQ(pick_lowest(reversed, std::array<double, 2>{scores[1], scores[0]}), Generation::new_gen);
}

TEST(Epdm, BothWarmUsesWarmScores) {
  const HardwarePair hw = sample_hardware();
  FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, {}, 100);
  EXPECT_EQ(epdm_choose(f, true, true, 100, {1, 0}, n, hw, kBoth), Generation::new_gen);
  f.timing[Generation::old_gen]->exec_s = 1.0;
  EXPECT_EQ(epdm_choose(f, true, true, 100, {1, 0}, n, hw, kBoth), Generation::old_gen);
}

TEST(Scheduler, FirstInvocationIsColdWithInitialSwarmDecision) {
  SchedulerConfig cfg;
  cfg.seed = 5;
  EcoLifeScheduler s(cfg, sample_hardware());
  const FunctionProfile f = fixture::sample_function("first");
  const InvocationOutcome out = s.on_invocation(f, 0, 100, false, false);
  EXPECT_TRUE(out.cold);
  const dpso::Swarm fresh = dpso::init_swarm(cfg.space, cfg.particles, function_seed(5, "first"));
  const dpso::GridCell c = dpso::best_decision(fresh, cfg.space);
  EXPECT_EQ(out.decision, (Decision{c.location, c.keepalive_s}));
}

TEST(Scheduler, WarmCopyIsUsed) {
  EcoLifeScheduler s(SchedulerConfig{}, sample_hardware());
  const FunctionProfile f = fixture::sample_function();
  s.on_invocation(f, 0, 100, false, false);
  const InvocationOutcome out = s.on_invocation(f, 60'000, 100, true, false);
  EXPECT_EQ(out.exec_location, Generation::old_gen);
  EXPECT_FALSE(out.cold);
}

TEST(Scheduler, DecisionsStayOnTheGrid) {
  SchedulerConfig cfg;
  cfg.space.locations = {Generation::old_gen};
  EcoLifeScheduler s(cfg, sample_hardware());
  const FunctionProfile f = fixture::sample_function();
  for (int i = 0; i < 30; ++i) {
    const Decision d = s.decide(f, i * 97'000, 80 + i * 7);
    EXPECT_EQ(d.keep_location, Generation::old_gen);
    EXPECT_NE(std::find(cfg.space.kat.begin(), cfg.space.kat.end(), d.keep_duration_s), cfg.space.kat.end());
  }
}

TEST(Scheduler, ScalingWeightsLeavesDecisionsUnchanged) {
  SchedulerConfig a, b;
  b.weights = {2.0, 2.0};
  EcoLifeScheduler sa(a, sample_hardware()), sb(b, sample_hardware());
  const FunctionProfile f = fixture::sample_function();
  const std::int64_t times[] = {0, 40'000, 200'000, 260'000, 900'000, 950'000, 1'300'000};
  for (std::size_t i = 0; i < std::size(times); ++i) {
    const double ci = 60.0 + 40.0 * static_cast<double>(i);
    const bool wo = i % 3 == 1, wn = i % 2 == 1;
    const InvocationOutcome x = sa.on_invocation(f, times[i], ci, wo, wn);
    const InvocationOutcome y = sb.on_invocation(f, times[i], ci, wo, wn);
    EXPECT_EQ(x.exec_location, y.exec_location);
    EXPECT_EQ(x.decision, y.decision);
  }
}

TEST(Scheduler, InvalidConfig) {
  SchedulerConfig cfg;
  cfg.weights = {0, 0};
  EXPECT_THROW(EcoLifeScheduler(cfg, sample_hardware()), config_error);
  cfg = {};
  cfg.particles = 0;
  EXPECT_THROW(EcoLifeScheduler(cfg, sample_hardware()), config_error);
}

// Two functions, six invocations; frozen after checking each row by hand.
TEST(Scheduler, GoldenEventLog) {
  const HardwarePair hw = sample_hardware();
  FunctionProfile alpha = fixture::sample_function("alpha");
  FunctionProfile beta;
  beta.id = "beta";
  beta.mem_mib = 256;
  beta.timing[Generation::new_gen] = HardwareTiming{0.5, 1.2, 125, 30, {}, {}};
  beta.timing[Generation::old_gen] = HardwareTiming{0.56, 1.32, 150, 45, {}, {}};
  const ProfileMap profiles{{"alpha", alpha}, {"beta", beta}};
  const InvocationTrace trace{{0, "alpha"},       {30'000, "beta"},  {90'000, "alpha"},
                              {150'000, "alpha"}, {400'000, "beta"}, {460'000, "alpha"}};
  CarbonIntensitySeries ci;
  ci.values = {100, 100, 100, 100};
  ci.values.resize(19, 250);

  SchedulerConfig cfg;
  cfg.seed = 1;
  auto policy = ecolife_policy(cfg, hw);
  const RunResult r = run(trace, *policy, profiles, hw, ci, EngineConfig{});

  struct Row {
    const char* fn;
    std::int64_t t;
    Generation exec;
    bool cold;
    Generation keep;
    double k;
    double kept;
  };
  const Generation O = Generation::old_gen, N = Generation::new_gen;
  const Row want[] = {
      {"alpha", 0, N, true, O, 300, 90},         {"beta", 30'000, N, true, N, 300, 300},
      {"alpha", 90'000, O, false, N, 120, 60},   {"alpha", 150'000, N, false, N, 120, 120},
      {"beta", 400'000, N, true, N, 600, 600},   {"alpha", 460'000, N, true, N, 600, 600},
  };
  ASSERT_EQ(r.records.size(), std::size(want));
  for (std::size_t i = 0; i < std::size(want); ++i) {
    const MetricsRecord& rec = r.records[i];
    SCOPED_TRACE(i);
    EXPECT_EQ(rec.function_id, want[i].fn);
    EXPECT_EQ(rec.time_ms, want[i].t);
    EXPECT_EQ(rec.exec_location, want[i].exec);
    EXPECT_EQ(rec.cold, want[i].cold);
    EXPECT_EQ(rec.decision.keep_location, want[i].keep);
    EXPECT_EQ(rec.decision.keep_duration_s, want[i].k);
    EXPECT_EQ(rec.keepalive_s, want[i].kept);
  }
}
