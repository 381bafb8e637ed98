#pragma once

// Deterministic trace replay of a scheduling policy with per-invocation
// service and carbon accounting.
//
// Keep-alive carbon accrues only for time actually spent warm: a window opened
// at an invocation closes at the next invocation of the same function, at its
// expiry, or at eviction, whichever comes first. A transfer closes the segment
// on one generation and continues it on the other. Realized keep-alive carbon
// is attributed to the invocation that opened the window.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecolife/carbon_model.hpp"
#include "ecolife/dpso.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/objective.hpp"
#include "ecolife/policy.hpp"
#include "ecolife/scheduler.hpp"
#include "ecolife/warm_pool.hpp"
#include "ecolife/workload.hpp"

namespace ecolife {

struct MetricsRecord {
  std::string function_id;
  std::int64_t time_ms = 0;
  Generation exec_location = Generation::new_gen;
  bool cold = true;
  double service_time_s = 0.0;
  double service_carbon_g = 0.0;
  double keepalive_carbon_g = 0.0;  // realized, attributed to this invocation
  double keepalive_s = 0.0;         // realized keep-alive time
  Decision decision;
  double objective = 0.0;  // normalized contribution to the run objective

  double carbon_g() const { return service_carbon_g + keepalive_carbon_g; }
};

struct CdfPoint {
  double quantile = 0.0;
  double service_time_s = 0.0;
  double carbon_g = 0.0;
};

struct Percentiles {
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

struct RunSummary {
  std::string policy;
  bool contention_free = false;
  std::size_t invocations = 0;
  std::size_t cold_starts = 0;
  double total_service_time_s = 0.0;
  double mean_service_time_s = 0.0;
  double total_service_carbon_g = 0.0;
  double total_keepalive_carbon_g = 0.0;
  double total_carbon_g = 0.0;
  double mean_carbon_g = 0.0;
  double total_objective = 0.0;
  double keepalive_function_minutes = 0.0;
  std::size_t evictions = 0;
  std::size_t transfers = 0;
  Percentiles service_time_s;
  Percentiles carbon_g;
  std::vector<CdfPoint> cdf;  // quantiles 0.01 .. 1.00
};

// Wall-clock cost of the policy's per-invocation decisions. Kept apart from
// RunSummary, which must be reproducible byte for byte.
struct DecisionOverhead {
  std::size_t decisions = 0;
  double mean_us = 0.0;
  double max_us = 0.0;
  double total_us = 0.0;
};

struct RunResult {
  std::vector<MetricsRecord> records;
  RunSummary summary;
  DecisionOverhead overhead;
};

struct EngineConfig {
  double mem_old_mib = 16 * 1024.0;
  double mem_new_mib = 16 * 1024.0;
  ObjectiveWeights weights;      // run objective
  dpso::SearchSpace space;       // normalizers of the run objective
  bool check_invariants = true;  // capacity and single-residency checks at every event
};

// Nearest-rank percentile of an ascending sample: element ceil(q*n) - 1.
inline double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double rank = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

inline RunSummary summarize(const std::vector<MetricsRecord>& records) {
  RunSummary s;
  s.invocations = records.size();
  std::vector<double> service, carbon;
  service.reserve(records.size());
  carbon.reserve(records.size());
  for (const auto& r : records) {
    s.cold_starts += r.cold ? 1 : 0;
    s.total_service_time_s += r.service_time_s;
    s.total_service_carbon_g += r.service_carbon_g;
    s.total_keepalive_carbon_g += r.keepalive_carbon_g;
    s.total_objective += r.objective;
    s.keepalive_function_minutes += r.keepalive_s / 60.0;
    service.push_back(r.service_time_s);
    carbon.push_back(r.carbon_g());
  }
  s.total_carbon_g = s.total_service_carbon_g + s.total_keepalive_carbon_g;
  if (!records.empty()) {
    const double n = static_cast<double>(records.size());
    s.mean_service_time_s = s.total_service_time_s / n;
    s.mean_carbon_g = s.total_carbon_g / n;
    std::sort(service.begin(), service.end());
    std::sort(carbon.begin(), carbon.end());
    s.service_time_s = {nearest_rank(service, 0.50), nearest_rank(service, 0.95), nearest_rank(service, 0.99)};
    s.carbon_g = {nearest_rank(carbon, 0.50), nearest_rank(carbon, 0.95), nearest_rank(carbon, 0.99)};
    s.cdf.reserve(100);
    for (int i = 1; i <= 100; ++i) {
      const double q = i / 100.0;
      s.cdf.push_back({q, nearest_rank(service, q), nearest_rank(carbon, q)});
    }
  }
  return s;
}

namespace detail {

class Replay {
 public:
  Replay(const InvocationTrace& trace, Policy& policy, const ProfileMap& profiles, const HardwarePair& hw,
         const CarbonIntensitySeries& ci, const EngineConfig& config)
      : trace_(trace), policy_(policy), profiles_(profiles), hw_(hw), ci_(ci), config_(config) {
    const double inf = std::numeric_limits<double>::infinity();
    const bool unbounded = policy.contention_free();
    pools_[Generation::old_gen] = WarmPool(Generation::old_gen, unbounded ? inf : config.mem_old_mib);
    pools_[Generation::new_gen] = WarmPool(Generation::new_gen, unbounded ? inf : config.mem_new_mib);
  }

  RunResult run() {
    const std::vector<std::size_t> order = processing_order();
    std::vector<std::optional<std::int64_t>> next(order.size());
    {
      std::map<std::string, std::size_t> later;
      for (std::size_t pos = order.size(); pos-- > 0;) {
        const Invocation& inv = trace_[order[pos]];
        auto it = later.find(inv.function_id);
        if (it != later.end()) next[pos] = trace_[order[it->second]].timestamp_ms;
        later[inv.function_id] = pos;
      }
    }

    policy_.begin(trace_);
    records_.reserve(order.size());
    exec_term_.reserve(order.size());
    kc_norm_.reserve(order.size());

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const Invocation& inv = trace_[order[pos]];
      process(pos, inv, next[pos]);
      if (config_.check_invariants) check_invariants();
    }
    for (auto& [id, w] : windows_) close_window(w, w.expiry_ms);
    windows_.clear();

    for (std::size_t i = 0; i < records_.size(); ++i) {
      records_[i].objective =
          exec_term_[i] + config_.weights.lambda_c * records_[i].keepalive_carbon_g / kc_norm_[i];
    }

    RunResult result;
    result.summary = summarize(records_);
    result.summary.policy = policy_.name();
    result.summary.contention_free = policy_.contention_free();
    result.summary.evictions = evictions_;
    result.summary.transfers = transfers_;
    if (overhead_.decisions > 0) overhead_.mean_us = overhead_.total_us / overhead_.decisions;
    result.overhead = overhead_;
    result.records = std::move(records_);
    return result;
  }

 private:
  struct Window {
    std::size_t record = 0;
    std::string function_id;
    Generation gen = Generation::new_gen;
    std::int64_t segment_start_ms = 0;
    std::int64_t expiry_ms = 0;
  };

  // Invocations ordered by (time, function id, trace position).
  std::vector<std::size_t> processing_order() const {
    std::vector<std::size_t> order(trace_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Invocation& x = trace_[a];
      const Invocation& y = trace_[b];
      if (x.timestamp_ms != y.timestamp_ms) return x.timestamp_ms < y.timestamp_ms;
      return x.function_id < y.function_id;
    });
    return order;
  }

  void close_window(Window& w, std::int64_t end_ms) {
    const std::int64_t end = std::min(end_ms, w.expiry_ms);
    if (end > w.segment_start_ms) {
      const FunctionProfile& f = profiles_.at(w.function_id);
      const CarbonBreakdown kc = keepalive_carbon(f, hw_[w.gen], ci_, w.segment_start_ms, end);
      records_[w.record].keepalive_carbon_g += kc.total;
      records_[w.record].keepalive_s += static_cast<double>(end - w.segment_start_ms) / 1000.0;
    }
    w.segment_start_ms = std::max(w.segment_start_ms, end);
  }

  void open_window(std::size_t record, const PoolEntry& e, Generation gen, std::int64_t now_ms) {
    windows_[e.function_id] = Window{record, e.function_id, gen, now_ms, e.expiry_ms};
  }

  void process(std::size_t pos, const Invocation& inv, std::optional<std::int64_t> next_ms) {
    const FunctionProfile& f = profiles_.at(inv.function_id);
    const std::int64_t now = inv.timestamp_ms;
    const double ci = ci_.at(now);

    if (auto it = windows_.find(inv.function_id); it != windows_.end()) {
      close_window(it->second, now);
      windows_.erase(it);
    }
    const bool warm_old = lookup(pools_[Generation::old_gen], inv.function_id, now);
    const bool warm_new = lookup(pools_[Generation::new_gen], inv.function_id, now);
    pools_[Generation::old_gen].erase(inv.function_id);
    pools_[Generation::new_gen].erase(inv.function_id);

    const InvocationView view{pos, f, now, ci, warm_old, warm_new, next_ms, ci_};
    const auto t0 = std::chrono::steady_clock::now();
    const InvocationOutcome out = policy_.on_invocation(view);
    const auto t1 = std::chrono::steady_clock::now();
    const double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    overhead_.decisions += 1;
    overhead_.total_us += us;
    overhead_.max_us = std::max(overhead_.max_us, us);

    const bool warm_at_exec = out.exec_location == Generation::old_gen ? warm_old : warm_new;
    const bool cold = !warm_at_exec;
    const HardwareTiming& t = f.on(out.exec_location);
    const CarbonBreakdown sc = service_carbon(f, hw_[out.exec_location], cold, ci);

    MetricsRecord rec;
    rec.function_id = inv.function_id;
    rec.time_ms = now;
    rec.exec_location = out.exec_location;
    rec.cold = cold;
    rec.service_time_s = t.service_s(cold);
    rec.service_carbon_g = sc.total;
    rec.decision = out.decision;
    const std::size_t index = records_.size();
    records_.push_back(rec);

    const Normalizers norm = normalizers(f, hw_, config_.space, ci);
    exec_term_.push_back(placement_score(rec.service_time_s, rec.service_carbon_g, config_.weights, norm));
    kc_norm_.push_back(norm.kc_max);

    if (out.decision.keep_duration_s > 0.0) keep_alive(index, f, out.decision, now, ci);
  }

  void keep_alive(std::size_t record, const FunctionProfile& f, const Decision& d, std::int64_t now, double ci) {
    const auto k_ms = static_cast<std::int64_t>(std::llround(d.keep_duration_s * 1000.0));
    PoolEntry entry{f.id, f.mem_mib, now + k_ms, now, d.keep_location};
    WarmPool& target = pools_[d.keep_location];
    if (insert(target, entry) == InsertResult::inserted) {
      open_window(record, entry, d.keep_location, now);
      return;
    }
    if (!policy_.adjusts_pools()) {
      ++evictions_;
      return;
    }

    auto priority_on = [&](const PoolEntry& e, Generation g) {
      return policy_.keep_priority(profiles_.at(e.function_id), g, ci);
    };
    const double incoming = policy_.keep_priority(f, d.keep_location, ci);
    WarmPool* spill = policy_.transfers_allowed() ? &pools_[other(d.keep_location)] : nullptr;
    AdjustResult r = adjust(target, spill, {Candidate{entry, incoming}}, now, priority_on);

    for (const auto& e : r.admitted) open_window(record, e, target.generation(), now);
    for (const auto& ev : r.evicted) {
      ++evictions_;
      if (!ev.was_resident) continue;
      if (auto it = windows_.find(ev.entry.function_id); it != windows_.end()) {
        close_window(it->second, now);
        windows_.erase(it);
      }
    }
    for (const auto& tr : r.transferred) {
      ++transfers_;
      if (!tr.was_resident) {
        open_window(record, tr.entry, tr.to, now);
        continue;
      }
      auto it = windows_.find(tr.entry.function_id);
      if (it == windows_.end()) continue;
      close_window(it->second, now);
      it->second.gen = tr.to;
    }
  }

  void check_invariants() const {
    for (Generation g : kAllGenerations) {
      const WarmPool& p = pools_[g];
      if (p.used() > p.capacity() * (1.0 + 1e-12)) {
        throw std::logic_error("warm pool " + std::string(to_string(g)) + " exceeds its capacity");
      }
    }
    for (const auto& [id, e] : pools_[Generation::old_gen].entries()) {
      if (pools_[Generation::new_gen].contains(id)) {
        throw std::logic_error("function '" + id + "' resident in both pools");
      }
    }
  }

  const InvocationTrace& trace_;
  Policy& policy_;
  const ProfileMap& profiles_;
  const HardwarePair& hw_;
  const CarbonIntensitySeries& ci_;
  const EngineConfig& config_;

  PerGeneration<WarmPool> pools_;
  std::map<std::string, Window> windows_;
  std::vector<MetricsRecord> records_;
  std::vector<double> exec_term_;
  std::vector<double> kc_norm_;
  std::size_t evictions_ = 0;
  std::size_t transfers_ = 0;
  DecisionOverhead overhead_;
};

}  // namespace detail

// Replays `trace` against `policy`. Every trace function must have a profile
// covering both generations of `hw`.
inline RunResult run(const InvocationTrace& trace, Policy& policy, const ProfileMap& profiles,
                     const HardwarePair& hw, const CarbonIntensitySeries& ci, const EngineConfig& config) {
  config.weights.validate();
  config.space.validate();
  hw.old_hw.validate();
  hw.new_hw.validate();
  ci.validate();
  require_resolvable(trace, profiles);
  for (const auto& [id, f] : profiles) {
    f.validate();
    for (Generation g : kAllGenerations) {
      if (!f.has(g)) throw config_error("function '" + id + "' has no profile for generation " +
                                        std::string(to_string(g)));
    }
  }
  if (hw.old_hw.id != Generation::old_gen || hw.new_hw.id != Generation::new_gen) {
    throw config_error("hardware pair must hold the old generation first and the new one second");
  }
  return detail::Replay(trace, policy, profiles, hw, ci, config).run();
}

}  // namespace ecolife
