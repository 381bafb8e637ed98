#pragma once

// Per-generation pools of kept-alive functions under a memory capacity, and
// the priority-eviction adjustment that moves rejected functions to the other
// generation when it has room.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecolife/carbon_model.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/generation.hpp"
#include "ecolife/objective.hpp"

namespace ecolife {

struct PoolEntry {
  std::string function_id;
  double mem_mib = 0.0;
  std::int64_t expiry_ms = 0;       // absolute; warm while now <= expiry
  std::int64_t admitted_at_ms = 0;
  Generation home = Generation::new_gen;  // generation the keep-alive decision designated

  bool operator==(const PoolEntry&) const = default;
};

class WarmPool {
 public:
  WarmPool() = default;
  WarmPool(Generation generation, double capacity_mib) : generation_(generation), capacity_(capacity_mib) {
    if (!(capacity_mib >= 0.0)) throw config_error("pool capacity must be >= 0");
  }

  Generation generation() const { return generation_; }
  double capacity() const { return capacity_; }
  double used() const { return used_; }
  double free_space() const { return capacity_ - used_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, PoolEntry>& entries() const { return entries_; }

  bool contains(const std::string& id) const { return entries_.contains(id); }

  const PoolEntry* find(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool fits(double mem_mib) const { return used_ + mem_mib <= capacity_; }

  std::optional<PoolEntry> erase(const std::string& id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    PoolEntry e = std::move(it->second);
    entries_.erase(it);
    recompute_used();
    return e;
  }

  // Removes entries whose expiry is before `now`, in function-id order.
  std::vector<PoolEntry> remove_expired(std::int64_t now_ms) {
    std::vector<PoolEntry> gone;
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (it->second.expiry_ms < now_ms) {
        gone.push_back(std::move(it->second));
        it = entries_.erase(it);
      } else {
        ++it;
      }
    }
    if (!gone.empty()) recompute_used();
    return gone;
  }

  void clear() {
    entries_.clear();
    used_ = 0.0;
  }

  // Caller guarantees capacity; replaces an existing entry for the same function.
  void place(PoolEntry e) {
    entries_.insert_or_assign(e.function_id, std::move(e));
    recompute_used();
  }

 private:
  // Summed in key order so that equal contents give bit-equal totals.
  void recompute_used() {
    used_ = 0.0;
    for (const auto& [id, e] : entries_) used_ += e.mem_mib;
  }

  Generation generation_ = Generation::old_gen;
  double capacity_ = 0.0;
  double used_ = 0.0;
  std::map<std::string, PoolEntry> entries_;
};

// Warm iff an entry exists with expiry >= now. Expired entries are dropped.
inline bool lookup(WarmPool& pool, const std::string& function_id, std::int64_t now_ms) {
  const PoolEntry* e = pool.find(function_id);
  if (e == nullptr) return false;
  if (e->expiry_ms >= now_ms) return true;
  pool.erase(function_id);
  return false;
}

enum class InsertResult { inserted, capacity_exceeded };

// Inserts when the entry fits next to the current residents (an existing entry
// for the same function is replaced); otherwise leaves the pool untouched.
inline InsertResult insert(WarmPool& pool, PoolEntry entry) {
  const PoolEntry* existing = pool.find(entry.function_id);
  const double reclaimed = existing ? existing->mem_mib : 0.0;
  if (pool.used() - reclaimed + entry.mem_mib > pool.capacity()) return InsertResult::capacity_exceeded;
  pool.place(std::move(entry));
  return InsertResult::inserted;
}

struct PriorityScore {
  std::string function_id;
  double score = 0.0;
  double mem_mib = 0.0;
};

// Value of keeping `f` warm on `keep_hw`: the normalized service time and
// service carbon a cold start would add there.
inline PriorityScore priority(const FunctionProfile& f, const HardwareProfile& keep_hw, double ci,
                              const ObjectiveWeights& weights, const Normalizers& norm) {
  const HardwareTiming& t = f.on(keep_hw.id);
  const double ds = t.service_s(true) - t.service_s(false);
  const double dc = service_carbon(f, keep_hw, true, ci).total - service_carbon(f, keep_hw, false, ci).total;
  const double score = weights.lambda_s * ds / norm.s_max + weights.lambda_c * dc / norm.sc_max;
  return {f.id, std::max(0.0, score), f.mem_mib};
}

struct Candidate {
  PoolEntry entry;
  double priority = 0.0;
};

enum class EvictionReason { no_space, unplaceable };

struct Eviction {
  PoolEntry entry;
  EvictionReason reason = EvictionReason::no_space;
  bool was_resident = false;  // false when the entry was an incoming candidate
};

struct Transfer {
  PoolEntry entry;
  Generation from = Generation::old_gen;  // pool it was designated for or resident in
  Generation to = Generation::new_gen;
  bool was_resident = false;
};

struct AdjustResult {
  std::vector<Eviction> evicted;
  std::vector<Transfer> transferred;
  std::vector<PoolEntry> admitted;  // incoming entries kept in the target pool
};

namespace detail {

// Descending priority; ties go to the earlier admission, then the smaller id.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.entry.admitted_at_ms != b.entry.admitted_at_ms) return a.entry.admitted_at_ms < b.entry.admitted_at_ms;
  return a.entry.function_id < b.entry.function_id;
}

}  // namespace detail

// Priority eviction on `target` for `incoming` candidates (all designated for
// `target`). Residents and candidates are ranked together and admitted
// greedily while capacity allows. Rejected ones are re-ranked with their
// priority on the other generation and placed into `other`'s free space
// without displacing its residents; the rest are evicted. `other` may be null
// when transfers are not allowed. Transferred entries keep their expiry.
//
// `priority_on(entry, generation)` scores residents on `target` and rejected
// entries on `other`.
template <typename PriorityFn>
AdjustResult adjust(WarmPool& target, WarmPool* other, std::vector<Candidate> incoming, std::int64_t now_ms,
                    PriorityFn&& priority_on) {
  AdjustResult result;
  target.remove_expired(now_ms);
  if (other != nullptr) other->remove_expired(now_ms);

  struct Ranked {
    Candidate c;
    bool resident;
  };
  std::vector<Ranked> pool;
  for (const auto& [id, e] : target.entries()) {
    const bool replaced = std::any_of(incoming.begin(), incoming.end(),
                                      [&](const Candidate& c) { return c.entry.function_id == id; });
    if (!replaced) pool.push_back({{e, priority_on(e, target.generation())}, true});
  }
  for (auto& c : incoming) pool.push_back({std::move(c), false});
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Ranked& a, const Ranked& b) { return detail::ranks_before(a.c, b.c); });

  target.clear();
  std::vector<Ranked> rejected;
  for (auto& r : pool) {
    if (target.fits(r.c.entry.mem_mib)) {
      if (!r.resident) result.admitted.push_back(r.c.entry);
      target.place(std::move(r.c.entry));
    } else {
      rejected.push_back(std::move(r));
    }
  }

  if (other != nullptr) {
    for (auto& r : rejected) r.c.priority = priority_on(r.c.entry, other->generation());
    std::stable_sort(rejected.begin(), rejected.end(),
                     [](const Ranked& a, const Ranked& b) { return detail::ranks_before(a.c, b.c); });
  }
  for (auto& r : rejected) {
    if (other != nullptr && !other->contains(r.c.entry.function_id) && other->fits(r.c.entry.mem_mib)) {
      result.transferred.push_back({r.c.entry, target.generation(), other->generation(), r.resident});
      other->place(std::move(r.c.entry));
      continue;
    }
    const bool too_big = r.c.entry.mem_mib > target.capacity() &&
                         (other == nullptr || r.c.entry.mem_mib > other->capacity());
    result.evicted.push_back(
        {std::move(r.c.entry), too_big ? EvictionReason::unplaceable : EvictionReason::no_space, r.resident});
  }
  return result;
}

}  // namespace ecolife
