#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "ecolife/carbon_model.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/objective.hpp"
#include "ecolife/scheduler.hpp"
#include "ecolife/workload.hpp"

namespace ecolife {

// What a policy sees at one invocation. `next_ms` and `ci_series` are
// hindsight information; online policies must not read them.
struct InvocationView {
  std::size_t sequence = 0;  // position in processing order
  const FunctionProfile& function;
  std::int64_t now_ms = 0;
  double ci = 0.0;
  bool warm_old = false;
  bool warm_new = false;
  std::optional<std::int64_t> next_ms;
  const CarbonIntensitySeries& ci_series;
};

// A scheduling policy driven by the simulation loop: one call per invocation
// returning the execution location and the keep-alive decision.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;

  // Pools are unbounded for this policy (hindsight bounds).
  virtual bool contention_free() const { return false; }

  // On overflow: priority eviction (true) or drop the incoming entry (false).
  virtual bool adjusts_pools() const { return false; }

  // Whether adjustment may move rejected entries to the other generation.
  virtual bool transfers_allowed() const { return false; }

  // Called once before the run; may refuse a trace.
  virtual void begin(const InvocationTrace& /*trace*/) {}

  virtual InvocationOutcome on_invocation(const InvocationView& view) = 0;

  // Priority of keeping `f` warm on `g` at carbon intensity `ci`, for adjustment.
  virtual double keep_priority(const FunctionProfile& /*f*/, Generation /*g*/, double /*ci*/) const { return 0.0; }
};

}  // namespace ecolife
