#include <random>

#include <gtest/gtest.h>

#include "ecolife/scenario.hpp"
#include "ecolife/scheduler.hpp"
#include "ecolife/warm_pool.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ecolife;

namespace {

PoolEntry make_entry(const std::string& id, double mem, std::int64_t expiry = 1'000'000, std::int64_t admitted = 0) {
  return PoolEntry{id, mem, expiry, admitted, Generation::new_gen};
}

std::vector<std::string> ids_of(const WarmPool& p) {
  std::vector<std::string> ids;
  for (const auto& [id, e] : p.entries()) ids.push_back(id);
  return ids;
}

}  // namespace

TEST(Lookup, Boundaries) {
  WarmPool p(Generation::new_gen, 1024);
  EXPECT_FALSE(lookup(p, "f", 0));
  p.place(make_entry("f", 128, 5000));
  EXPECT_TRUE(lookup(p, "f", 5000));
  EXPECT_TRUE(p.contains("f"));
  EXPECT_FALSE(lookup(p, "f", 5001));
  EXPECT_FALSE(p.contains("f"));
  EXPECT_EQ(p.used(), 0.0);
}

TEST(Insert, FitsExactFitAndOverflow) {
  WarmPool p(Generation::old_gen, 300);
  EXPECT_EQ(insert(p, make_entry("a", 100)), InsertResult::inserted);
  EXPECT_EQ(insert(p, make_entry("b", 200)), InsertResult::inserted);
  EXPECT_EQ(p.free_space(), 0.0);
  EXPECT_EQ(insert(p, make_entry("c", 1)), InsertResult::capacity_exceeded);
  EXPECT_EQ(p.size(), 2u);
  // replacing an entry reclaims its memory first
  EXPECT_EQ(insert(p, make_entry("b", 200, 9)), InsertResult::inserted);
  EXPECT_EQ(p.find("b")->expiry_ms, 9);
}

TEST(Pool, NegativeCapacity) { EXPECT_THROW(WarmPool(Generation::old_gen, -1), config_error); }

TEST(Priority, GoldenValues) {
  const HardwarePair hw = sample_hardware();
  const FunctionProfile f = fixture::sample_function();
  const Normalizers n = normalizers(f, hw, dpso::SearchSpace{}, 300);
  fixture::expect_rel(priority(f, hw.old_hw, 300, {}, n).score, 0.5789473684210527);
  fixture::expect_rel(priority(f, hw.new_hw, 300, {}, n).score, 0.5049478829920966);
}

TEST(Priority, ColdStartComponent) {
  const HardwarePair hw = sample_hardware();
  FunctionProfile f = fixture::sample_function();
  const Normalizers n{10.0, 1.0, 1.0};
  const ObjectiveWeights time_only{1.0, 0.0};
  f.timing[Generation::new_gen]->coldstart_s = 0.0;
  EXPECT_EQ(priority(f, hw.new_hw, 100, time_only, n).score, 0.0);
  f.timing[Generation::new_gen]->coldstart_s = 1.5;
  const double one = priority(f, hw.new_hw, 100, time_only, n).score;
  f.timing[Generation::new_gen]->coldstart_s = 3.0;
  EXPECT_DOUBLE_EQ(priority(f, hw.new_hw, 100, time_only, n).score, 2 * one);
}

TEST(Adjust, AllFit) {
  WarmPool target(Generation::new_gen, 1000), other(Generation::old_gen, 1000);
  target.place(make_entry("r", 100));
  auto prio = [](const PoolEntry&, Generation) { return 0.5; };
  const AdjustResult r = adjust(target, &other, {{make_entry("a", 200), 0.1}}, 0, prio);
  EXPECT_TRUE(r.evicted.empty());
  EXPECT_TRUE(r.transferred.empty());
  ASSERT_EQ(r.admitted.size(), 1u);
  EXPECT_EQ(ids_of(target), (std::vector<std::string>{"a", "r"}));
  EXPECT_EQ(other.size(), 0u);
}

TEST(Adjust, WorkedExample) {
  const std::map<std::string, double> score{{"A", 0.9}, {"B", 0.5}, {"C", 0.4}};
  auto prio = [&](const PoolEntry& e, Generation) { return score.at(e.function_id); };

  // B is rejected by rank order and moves to the other pool.
  {
    WarmPool target(Generation::new_gen, 150), other(Generation::old_gen, 1000);
    target.place(make_entry("A", 100));
    target.place(make_entry("C", 50));
    const AdjustResult r = adjust(target, &other, {{make_entry("B", 200), 0.5}}, 0, prio);
    EXPECT_EQ(ids_of(target), (std::vector<std::string>{"A", "C"}));
    ASSERT_EQ(r.transferred.size(), 1u);
    EXPECT_EQ(r.transferred[0].entry.function_id, "B");
    EXPECT_EQ(r.transferred[0].to, Generation::old_gen);
    EXPECT_TRUE(other.contains("B"));
    EXPECT_TRUE(r.evicted.empty());
    EXPECT_DOUBLE_EQ(oracle::best_subset_value({0.9, 0.5, 0.4}, {100, 200, 50}, 150), 0.9 + 0.4);
  }
  // Other pool full: B is evicted.
  {
    WarmPool target(Generation::new_gen, 150), other(Generation::old_gen, 200);
    other.place(make_entry("Z", 200));
    target.place(make_entry("A", 100));
    target.place(make_entry("C", 50));
    const AdjustResult r = adjust(target, &other, {{make_entry("B", 200), 0.5}}, 0, prio);
    ASSERT_EQ(r.evicted.size(), 1u);
    EXPECT_EQ(r.evicted[0].entry.function_id, "B");
    EXPECT_EQ(r.evicted[0].reason, EvictionReason::no_space);
    EXPECT_FALSE(r.evicted[0].was_resident);
    EXPECT_EQ(ids_of(other), (std::vector<std::string>{"Z"}));
  }
}

TEST(Adjust, HigherPriorityIncomingDisplacesResident) {
  WarmPool target(Generation::new_gen, 150), other(Generation::old_gen, 0);
  target.place(make_entry("low", 150));
  auto prio = [](const PoolEntry& e, Generation) { return e.function_id == "low" ? 0.1 : 0.9; };
  const AdjustResult r = adjust(target, &other, {{make_entry("hi", 100), 0.9}}, 0, prio);
  EXPECT_EQ(ids_of(target), (std::vector<std::string>{"hi"}));
  ASSERT_EQ(r.evicted.size(), 1u);
  EXPECT_TRUE(r.evicted[0].was_resident);
}

TEST(Adjust, TransferKeepsExpiry) {
  WarmPool target(Generation::new_gen, 100), other(Generation::old_gen, 500);
  target.place(make_entry("old", 100, 77'000));
  auto prio = [](const PoolEntry& e, Generation) { return e.function_id == "old" ? 0.1 : 0.9; };
  const AdjustResult r = adjust(target, &other, {{make_entry("new", 100, 90'000), 0.9}}, 10'000, prio);
  ASSERT_EQ(r.transferred.size(), 1u);
  EXPECT_TRUE(r.transferred[0].was_resident);
  EXPECT_EQ(other.find("old")->expiry_ms, 77'000);
}

TEST(Adjust, Unplaceable) {
  WarmPool target(Generation::new_gen, 100), other(Generation::old_gen, 200);
  auto prio = [](const PoolEntry&, Generation) { return 1.0; };
  const AdjustResult r = adjust(target, &other, {{make_entry("huge", 300), 1.0}}, 0, prio);
  ASSERT_EQ(r.evicted.size(), 1u);
  EXPECT_EQ(r.evicted[0].reason, EvictionReason::unplaceable);
}

TEST(Adjust, TiesByAdmissionThenId) {
  WarmPool target(Generation::new_gen, 100);
  target.place(make_entry("b", 100, 1'000'000, 5));
  auto prio = [](const PoolEntry&, Generation) { return 0.5; };
  AdjustResult r = adjust(target, nullptr, {{make_entry("a", 100, 1'000'000, 5), 0.5}}, 10, prio);
  EXPECT_EQ(ids_of(target), (std::vector<std::string>{"a"}));
  r = adjust(target, nullptr, {{make_entry("c", 100, 1'000'000, 1), 0.5}}, 10, prio);
  EXPECT_EQ(ids_of(target), (std::vector<std::string>{"c"}));
}

TEST(Adjust, DropsExpiredFirst) {
  WarmPool target(Generation::new_gen, 100);
  target.place(make_entry("stale", 100, 50));
  auto prio = [](const PoolEntry&, Generation) { return 0.0; };
  const AdjustResult r = adjust(target, nullptr, {{make_entry("fresh", 100), 0.0}}, 51, prio);
  EXPECT_TRUE(r.evicted.empty());
  EXPECT_EQ(ids_of(target), (std::vector<std::string>{"fresh"}));
}

namespace {

struct RandomCase {
  std::vector<oracle::Item> items;  // residents and incoming for the target
  std::vector<std::pair<std::string, double>> other_residents;
  double capacity = 0;
  double other_capacity = 0;
  bool with_other = true;
};

RandomCase random_case(std::mt19937_64& rng) {
  RandomCase c;
  std::uniform_int_distribution<int> count(1, 12), mem(1, 8), prio(0, 6), adm(0, 4);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    oracle::Item it;
    it.id = "f" + std::to_string(i);
    it.mem = 32.0 * mem(rng);
    it.admitted = adm(rng);
    it.expiry = 1'000'000;
    it.prio_here = prio(rng) / 6.0;
    it.prio_there = prio(rng) / 6.0;
    it.resident = rng() % 2 == 0;
    c.items.push_back(it);
  }
  c.capacity = 32.0 * std::uniform_int_distribution<int>(0, 30)(rng);
  c.other_capacity = 32.0 * std::uniform_int_distribution<int>(0, 20)(rng);
  c.with_other = rng() % 4 != 0;
  double used = 0;
  for (int i = 0; i < 3; ++i) {
    const double m = 32.0 * mem(rng);
    if (used + m <= c.other_capacity) {
      used += m;
      c.other_residents.push_back({"o" + std::to_string(i), m});
    }
  }
  return c;
}

}  // namespace

// adjust against the reference greedy on random candidate sets.
TEST(Adjust, MatchesReferenceGreedy) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const RandomCase c = random_case(rng);
    // residents already fit by construction of the pool, so size the pool to hold them
    double resident_mem = 0;
    for (const auto& it : c.items) resident_mem += it.resident ? it.mem : 0.0;
    const double capacity = std::max(c.capacity, resident_mem);

    WarmPool target(Generation::new_gen, capacity), other(Generation::old_gen, c.other_capacity);
    std::map<std::string, oracle::Item> by_id;
    std::vector<Candidate> incoming;
    for (const auto& it : c.items) {
      by_id[it.id] = it;
      const PoolEntry e{it.id, it.mem, it.expiry, it.admitted, Generation::new_gen};
      if (it.resident) {
        target.place(e);
      } else {
        incoming.push_back({e, it.prio_here});
      }
    }
    std::vector<std::string> other_ids;
    double other_used = 0;
    for (const auto& [id, m] : c.other_residents) {
      other.place(PoolEntry{id, m, 1'000'000, 0, Generation::old_gen});
      other_ids.push_back(id);
      other_used += m;
    }
    auto prio = [&](const PoolEntry& e, Generation g) {
      const auto& it = by_id.at(e.function_id);
      return g == Generation::new_gen ? it.prio_here : it.prio_there;
    };

    const AdjustResult r = adjust(target, c.with_other ? &other : nullptr, incoming, 0, prio);
    const oracle::GreedyOutcome want =
        oracle::greedy(c.items, capacity, c.with_other ? c.other_capacity - other_used : -1.0, other_ids);

    EXPECT_EQ(ids_of(target), want.kept) << "trial " << trial;
    std::vector<std::string> moved, evicted;
    for (const auto& t : r.transferred) moved.push_back(t.entry.function_id);
    for (const auto& e : r.evicted) evicted.push_back(e.entry.function_id);
    EXPECT_EQ(moved, want.moved) << "trial " << trial;
    EXPECT_EQ(evicted, want.evicted) << "trial " << trial;
    EXPECT_LE(target.used(), target.capacity());
    EXPECT_LE(other.used(), other.capacity());
  }
}

// Random operation sequences never overfill either pool.
TEST(WarmPool, CapacityInvariantUnderRandomOperations) {
  std::mt19937_64 rng(99);
  WarmPool a(Generation::old_gen, 1024), b(Generation::new_gen, 768);
  std::int64_t now = 0;
  std::uniform_int_distribution<int> op(0, 4), fn(0, 19), mem(1, 12), keep(0, 600);
  auto prio = [](const PoolEntry& e, Generation g) {
    return static_cast<double>((e.function_id.size() * 7 + e.function_id.back() + index_of(g)) % 11);
  };
  for (int i = 0; i < 10'000; ++i) {
    now += std::uniform_int_distribution<int>(0, 5000)(rng);
    const std::string id = "f" + std::to_string(fn(rng));
    WarmPool& target = rng() % 2 ? a : b;
    WarmPool& spill = &target == &a ? b : a;
    switch (op(rng)) {
      case 0:
        lookup(target, id, now);
        break;
      case 1:
        target.remove_expired(now);
        break;
      case 2:
        if (!spill.contains(id)) insert(target, PoolEntry{id, 64.0 * mem(rng), now + 1000 * keep(rng), now, target.generation()});
        break;
      default: {
        spill.erase(id);
        const PoolEntry e{id, 64.0 * mem(rng), now + 1000 * keep(rng), now, target.generation()};
        if (insert(target, e) == InsertResult::capacity_exceeded) {
          adjust(target, &spill, {{e, prio(e, target.generation())}}, now, prio);
        }
      }
    }
    ASSERT_LE(a.used(), a.capacity());
    ASSERT_LE(b.used(), b.capacity());
    for (const auto& [fid, e] : a.entries()) ASSERT_FALSE(b.contains(fid)) << fid;
  }
}
