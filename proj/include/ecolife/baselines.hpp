#pragma once

// Policies compared against EcoLife: fixed keep-alive baselines,
// single-generation EcoLife, and clairvoyant per-invocation bounds.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ecolife/carbon_model.hpp"
#include "ecolife/dpso.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/objective.hpp"
#include "ecolife/policy.hpp"
#include "ecolife/scheduler.hpp"

namespace ecolife {

enum class PolicyKind { ecolife, new_only, old_only, eco_new, eco_old, oracle, co2_opt, stime_opt, energy_opt };

inline constexpr std::array<PolicyKind, 9> kAllPolicies{
    PolicyKind::ecolife, PolicyKind::new_only,  PolicyKind::old_only,  PolicyKind::eco_new,   PolicyKind::eco_old,
    PolicyKind::oracle,  PolicyKind::co2_opt,   PolicyKind::stime_opt, PolicyKind::energy_opt};

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::ecolife: return "ecolife";
    case PolicyKind::new_only: return "new_only";
    case PolicyKind::old_only: return "old_only";
    case PolicyKind::eco_new: return "eco_new";
    case PolicyKind::eco_old: return "eco_old";
    case PolicyKind::oracle: return "oracle";
    case PolicyKind::co2_opt: return "co2_opt";
    case PolicyKind::stime_opt: return "stime_opt";
    case PolicyKind::energy_opt: return "energy_opt";
  }
  return "?";
}

inline PolicyKind parse_policy_kind(std::string_view s) {
  for (PolicyKind k : kAllPolicies) {
    if (to_string(k) == s) return k;
  }
  throw config_error("unknown scheduler '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------

// Always executes on one generation and keeps alive there for a fixed time.
class FixedPolicy final : public Policy {
 public:
  FixedPolicy(Generation generation, double keepalive_s = 600.0) : gen_(generation), keepalive_s_(keepalive_s) {}

  std::string name() const override {
    return gen_ == Generation::new_gen ? "new_only" : "old_only";
  }

  InvocationOutcome on_invocation(const InvocationView& v) override {
    const bool warm = gen_ == Generation::old_gen ? v.warm_old : v.warm_new;
    return {gen_, !warm, Decision{gen_, keepalive_s_}};
  }

 private:
  Generation gen_;
  double keepalive_s_;
};

inline std::unique_ptr<Policy> fixed_policy(Generation generation, double keepalive_s = 600.0) {
  return std::make_unique<FixedPolicy>(generation, keepalive_s);
}

// EcoLife's online scheduler behind the policy interface.
class EcoLifePolicy final : public Policy {
 public:
  EcoLifePolicy(std::string name, SchedulerConfig config, HardwarePair hw, bool adjust = true)
      : name_(std::move(name)), scheduler_(std::move(config), std::move(hw)), adjust_(adjust) {}

  std::string name() const override { return name_; }
  bool adjusts_pools() const override { return adjust_; }
  bool transfers_allowed() const override { return scheduler_.config().space.locations.size() > 1; }

  InvocationOutcome on_invocation(const InvocationView& v) override {
    return scheduler_.on_invocation(v.function, v.now_ms, v.ci, v.warm_old, v.warm_new);
  }

  double keep_priority(const FunctionProfile& f, Generation g, double ci) const override {
    return scheduler_.keep_priority(f, g, ci);
  }

  const EcoLifeScheduler& scheduler() const { return scheduler_; }

 private:
  std::string name_;
  EcoLifeScheduler scheduler_;
  bool adjust_;
};

inline std::unique_ptr<Policy> ecolife_policy(SchedulerConfig config, HardwarePair hw, bool adjust = true) {
  return std::make_unique<EcoLifePolicy>("ecolife", std::move(config), std::move(hw), adjust);
}

// EcoLife restricted to one generation for placement and keep-alive.
inline std::unique_ptr<Policy> eco_single(Generation generation, SchedulerConfig config, HardwarePair hw,
                                          bool adjust = true) {
  config.space.locations = {generation};
  const std::string name = generation == Generation::new_gen ? "eco_new" : "eco_old";
  return std::make_unique<EcoLifePolicy>(name, std::move(config), std::move(hw), adjust);
}

// ---------------------------------------------------------------------------
// Clairvoyant per-invocation enumeration.

enum class Metric { combined, carbon, service_time, energy };

// Knows each function's next arrival and the realized CI path. Execution
// picks the best location given what is warm; the keep-alive choice minimizes
// realized keep-alive cost plus the cost of the next invocation it enables.
// Pools are unbounded, so the result bounds contended policies.
class ClairvoyantPolicy final : public Policy {
 public:
  static constexpr std::size_t kMaxInvocations = 2000;
  static constexpr std::size_t kMaxOptions = 16;

  ClairvoyantPolicy(Metric metric, HardwarePair hw, ObjectiveWeights weights, dpso::SearchSpace space)
      : metric_(metric), hw_(std::move(hw)), weights_(weights), space_(std::move(space)) {
    weights_.validate();
    space_.validate();
  }

  std::string name() const override {
    switch (metric_) {
      case Metric::combined: return "oracle";
      case Metric::carbon: return "co2_opt";
      case Metric::service_time: return "stime_opt";
      case Metric::energy: return "energy_opt";
    }
    return "?";
  }

  bool contention_free() const override { return true; }

  void begin(const InvocationTrace& trace) override {
    if (trace.size() > kMaxInvocations || space_.cells() > kMaxOptions) {
      throw size_error(name() + " enumerates at most " + std::to_string(kMaxInvocations) +
                       " invocations and " + std::to_string(kMaxOptions) + " options; got " +
                       std::to_string(trace.size()) + " invocations and " + std::to_string(space_.cells()) +
                       " options");
    }
  }

  InvocationOutcome on_invocation(const InvocationView& v) override {
    const FunctionProfile& f = v.function;
    InvocationOutcome out;
    const Cost exec = best_execution(f, v.ci_series, v.now_ms, v.warm_old, v.warm_new, &out.exec_location);
    out.cold = !(out.exec_location == Generation::old_gen ? v.warm_old : v.warm_new);
    (void)exec;

    out.decision = Decision{out.exec_location, 0.0};
    if (!v.next_ms) return out;

    const std::int64_t gap_ms = *v.next_ms - v.now_ms;
    bool have = false;
    Cost best;
    for (Generation l : space_.locations) {
      for (double k : space_.kat) {
        const auto k_ms = static_cast<std::int64_t>(std::llround(k * 1000.0));
        const bool warm_next = k_ms > 0 && gap_ms <= k_ms;
        const std::int64_t kept_ms = std::min(k_ms, gap_ms);
        const Cost keep = keep_cost(f, l, v.ci_series, v.now_ms, kept_ms);
        const bool warm_old = warm_next && l == Generation::old_gen;
        const bool warm_new = warm_next && l == Generation::new_gen;
        const Cost next = best_execution(f, v.ci_series, *v.next_ms, warm_old, warm_new, nullptr);
        const Cost total{keep.primary + next.primary, keep.combined + next.combined};
        if (!have || total.better_than(best)) {
          have = true;
          best = total;
          out.decision = Decision{l, k};
        }
      }
    }
    return out;
  }

 private:
  // Primary metric, then the combined objective as a tie-breaker.
  struct Cost {
    double primary = 0.0;
    double combined = 0.0;

    bool better_than(const Cost& o) const {
      if (primary != o.primary) return primary < o.primary;
      return combined < o.combined;
    }
  };

  Cost exec_cost(const FunctionProfile& f, Generation r, bool cold, double ci) const {
    const double s = f.on(r).service_s(cold);
    const double sc = service_carbon(f, hw_[r], cold, ci).total;
    const double combined = placement_score(s, sc, weights_, normalizers(f, hw_, space_, ci));
    switch (metric_) {
      case Metric::combined: return {combined, combined};
      case Metric::carbon: return {sc, combined};
      case Metric::service_time: return {s, combined};
      case Metric::energy: return {service_energy_kwh(f, hw_[r], cold), combined};
    }
    return {};
  }

  Cost keep_cost(const FunctionProfile& f, Generation l, const CarbonIntensitySeries& ci, std::int64_t start_ms,
                 std::int64_t kept_ms) const {
    const double kc = keepalive_carbon(f, hw_[l], ci, start_ms, start_ms + kept_ms).total;
    const Normalizers n = normalizers(f, hw_, space_, ci.at(start_ms));
    const double combined = weights_.lambda_c * kc / n.kc_max;
    switch (metric_) {
      case Metric::combined: return {combined, combined};
      case Metric::carbon: return {kc, combined};
      case Metric::service_time: return {0.0, combined};
      case Metric::energy: return {keepalive_energy_kwh(f, hw_[l], static_cast<double>(kept_ms) / 1000.0), combined};
    }
    return {};
  }

  // Best execution over the allowed locations given which copies are warm.
  // Equal costs go to the newer generation.
  Cost best_execution(const FunctionProfile& f, const CarbonIntensitySeries& ci, std::int64_t t_ms, bool warm_old,
                      bool warm_new, Generation* where) const {
    const double ci_t = ci.at(t_ms);
    bool have = false;
    Cost best;
    Generation best_gen = space_.locations.front();
    for (Generation r : space_.locations) {
      const bool warm = r == Generation::old_gen ? warm_old : warm_new;
      const Cost c = exec_cost(f, r, !warm, ci_t);
      const bool tie = have && !c.better_than(best) && !best.better_than(c);
      if (!have || c.better_than(best) || (tie && r == Generation::new_gen)) {
        have = true;
        best = c;
        best_gen = r;
      }
    }
    if (where != nullptr) *where = best_gen;
    return best;
  }

  Metric metric_;
  HardwarePair hw_;
  ObjectiveWeights weights_;
  dpso::SearchSpace space_;
};

inline std::unique_ptr<Policy> oracle(HardwarePair hw, ObjectiveWeights weights, dpso::SearchSpace space) {
  return std::make_unique<ClairvoyantPolicy>(Metric::combined, std::move(hw), weights, std::move(space));
}

inline std::unique_ptr<Policy> single_metric_opt(Metric metric, HardwarePair hw, ObjectiveWeights weights,
                                                 dpso::SearchSpace space) {
  return std::make_unique<ClairvoyantPolicy>(metric, std::move(hw), weights, std::move(space));
}

// Everything needed to build any policy for one run.
struct PolicyOptions {
  SchedulerConfig scheduler;  // EcoLife variants; its weights and space also define the clairvoyant objective
  double fixed_keepalive_s = 600.0;
  bool warm_pool_adjustment = true;
};

inline std::unique_ptr<Policy> make_policy(PolicyKind kind, const PolicyOptions& opt, const HardwarePair& hw) {
  const SchedulerConfig& sc = opt.scheduler;
  dpso::SearchSpace full = sc.space;
  full.locations = {Generation::old_gen, Generation::new_gen};
  switch (kind) {
    case PolicyKind::ecolife: return ecolife_policy(sc, hw, opt.warm_pool_adjustment);
    case PolicyKind::new_only: return fixed_policy(Generation::new_gen, opt.fixed_keepalive_s);
    case PolicyKind::old_only: return fixed_policy(Generation::old_gen, opt.fixed_keepalive_s);
    case PolicyKind::eco_new: return eco_single(Generation::new_gen, sc, hw, opt.warm_pool_adjustment);
    case PolicyKind::eco_old: return eco_single(Generation::old_gen, sc, hw, opt.warm_pool_adjustment);
    case PolicyKind::oracle: return oracle(hw, sc.weights, full);
    case PolicyKind::co2_opt: return single_metric_opt(Metric::carbon, hw, sc.weights, full);
    case PolicyKind::stime_opt: return single_metric_opt(Metric::service_time, hw, sc.weights, full);
    case PolicyKind::energy_opt: return single_metric_opt(Metric::energy, hw, sc.weights, full);
  }
  throw config_error("unhandled scheduler kind");
}

}  // namespace ecolife
