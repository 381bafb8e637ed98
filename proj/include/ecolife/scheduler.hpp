#pragma once

// Keep-alive decisions (KDM) and execution placement (EPDM).
//
// The KDM scores a candidate (location, keep-alive time) by the expected
// normalized service time, service carbon, and keep-alive carbon of the
// function's next invocation, with the expectation taken over its recent
// inter-arrival gaps. A per-function dynamic PSO searches that score.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecolife/carbon_model.hpp"
#include "ecolife/dpso.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/objective.hpp"
#include "ecolife/warm_pool.hpp"

namespace ecolife {

inline constexpr double kKeepaliveNormFloor = 1e-12;

// Last W inter-arrival gaps of one function, oldest first.
class ArrivalHistory {
 public:
  explicit ArrivalHistory(std::size_t window = 10) : window_(window) {
    if (window == 0) throw config_error("history window must be >= 1");
  }

  void push(double gap_s) {
    if (!(gap_s > 0.0)) throw domain_error("inter-arrival gaps must be > 0");
    gaps_.push_back(gap_s);
    if (gaps_.size() > window_) gaps_.pop_front();
  }

  bool empty() const { return gaps_.empty(); }
  std::size_t size() const { return gaps_.size(); }
  std::size_t window() const { return window_; }
  const std::deque<double>& gaps() const { return gaps_; }

 private:
  std::size_t window_;
  std::deque<double> gaps_;
};

inline Normalizers normalizers(const FunctionProfile& f, const HardwarePair& hw, const dpso::SearchSpace& space,
                               double ci) {
  Normalizers n;
  const Generation s_ref = space.contains(Generation::old_gen) ? Generation::old_gen : space.locations.front();
  n.s_max = f.on(s_ref).service_s(true);
  n.sc_max = 0.0;
  for (Generation g : space.locations) n.sc_max = std::max(n.sc_max, service_carbon(f, hw[g], true, ci).total);
  const double k_max = space.kat.back();
  n.kc_max = std::max(kKeepaliveNormFloor, keepalive_carbon(f, hw.new_hw, k_max, ci * k_max).total);
  return n;
}

// f_score of executing on one generation.
inline double placement_score(double service_s, double service_carbon_g, const ObjectiveWeights& w,
                              const Normalizers& n) {
  return w.lambda_s * service_s / n.s_max + w.lambda_c * service_carbon_g / n.sc_max;
}

namespace detail {

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

// Lowest score wins; equal scores (to 1e-12 relative) go to the newer generation.
inline Generation pick_lowest(std::span<const Generation> candidates, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (detail::nearly_equal(scores[i], scores[best])) {
      if (candidates[i] == Generation::new_gen) best = i;
    } else if (scores[i] < scores[best]) {
      best = i;
    }
  }
  return candidates[best];
}

// Cold placement over `locations`.
inline Generation epdm_cold_choice(const FunctionProfile& f, double ci, const ObjectiveWeights& w,
                                   const Normalizers& n, const HardwarePair& hw,
                                   std::span<const Generation> locations) {
  std::array<double, 2> scores{};
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Generation g = locations[i];
    scores[i] = placement_score(f.on(g).service_s(true), service_carbon(f, hw[g], true, ci).total, w, n);
  }
  return pick_lowest(locations, std::span<const double>(scores.data(), locations.size()));
}

// Execution placement: a warm copy short-circuits to its generation; two warm
// copies or none are decided by f_score.
inline Generation epdm_choose(const FunctionProfile& f, bool warm_old, bool warm_new, double ci,
                              const ObjectiveWeights& w, const Normalizers& n, const HardwarePair& hw,
                              std::span<const Generation> locations) {
  if (warm_old != warm_new) return warm_old ? Generation::old_gen : Generation::new_gen;
  if (warm_old && warm_new) {
    const std::array<Generation, 2> gens{Generation::old_gen, Generation::new_gen};
    std::array<double, 2> scores{};
    for (std::size_t i = 0; i < 2; ++i) {
      scores[i] = placement_score(f.on(gens[i]).exec_s, service_carbon(f, hw[gens[i]], false, ci).total, w, n);
    }
    return pick_lowest(gens, scores);
  }
  return epdm_cold_choice(f, ci, w, n, hw, locations);
}

// Expected normalized objective of keeping `f` alive per `candidate`, over the
// sampled gaps: a gap within k is a warm start on the kept location, otherwise
// a cold start wherever the cold placement rule sends it; keep-alive carbon
// accrues for min(k, gap). `ci` prices both service and keep-alive.
inline double kdm_fitness(const FunctionProfile& f, const Decision& candidate, std::span<const double> gaps,
                          double ci, const ObjectiveWeights& w, const Normalizers& n, const HardwarePair& hw,
                          std::span<const Generation> locations) {
  if (gaps.empty()) throw domain_error("kdm_fitness needs at least one observed inter-arrival gap");
  const Generation cold_loc = epdm_cold_choice(f, ci, w, n, hw, locations);
  const double s_cold = f.on(cold_loc).service_s(true);
  const double sc_cold = service_carbon(f, hw[cold_loc], true, ci).total;
  const Generation l = candidate.keep_location;
  const double k = candidate.keep_duration_s;
  const HardwareProfile& keep_hw = hw[l];
  double s_warm = 0.0;
  double sc_warm = 0.0;
  if (k > 0.0) {
    s_warm = f.on(l).exec_s;
    sc_warm = service_carbon(f, keep_hw, false, ci).total;
  }

  double s = 0.0, sc = 0.0, kc = 0.0;
  for (double gap : gaps) {
    const bool warm = k > 0.0 && gap <= k;
    s += warm ? s_warm : s_cold;
    sc += warm ? sc_warm : sc_cold;
    const double kept = std::min(k, gap);
    if (kept > 0.0) kc += keepalive_carbon(f, keep_hw, kept, ci * kept).total;
  }
  const double m = static_cast<double>(gaps.size());
  return w.lambda_s * (s / m) / n.s_max + w.lambda_c * (sc / m) / n.sc_max + w.lambda_c * (kc / m) / n.kc_max;
}

inline double kdm_fitness(const FunctionProfile& f, const Decision& candidate, const ArrivalHistory& history,
                          double ci, const ObjectiveWeights& w, const Normalizers& n, const HardwarePair& hw,
                          std::span<const Generation> locations) {
  const std::vector<double> gaps(history.gaps().begin(), history.gaps().end());
  return kdm_fitness(f, candidate, gaps, ci, w, n, hw, locations);
}

struct SchedulerConfig {
  ObjectiveWeights weights;
  dpso::SearchSpace space;
  dpso::WeightBounds bounds;
  std::size_t particles = 15;
  std::size_t iterations = 10;  // PSO steps per invocation
  std::size_t window = 10;      // inter-arrival gaps in the expectation
  std::uint64_t seed = 1;
  bool dynamic_weights = true;
  bool perception_response = true;

  void validate() const {
    weights.validate();
    space.validate();
    bounds.validate();
    if (particles == 0) throw config_error("particles must be >= 1");
    if (window == 0) throw config_error("window must be >= 1");
  }
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Stable per-function seed derived from the run seed.
inline std::uint64_t function_seed(std::uint64_t run_seed, std::string_view function_id) {
  return detail::splitmix64(run_seed ^ detail::fnv1a(function_id));
}

struct InvocationOutcome {
  Generation exec_location = Generation::new_gen;
  bool cold = true;
  Decision decision;
};

// EcoLife's online scheduler: one swarm, arrival history, and change tracker
// per function.
class EcoLifeScheduler {
 public:
  EcoLifeScheduler(SchedulerConfig config, HardwarePair hw) : config_(std::move(config)), hw_(std::move(hw)) {
    config_.validate();
  }

  const SchedulerConfig& config() const { return config_; }
  const HardwarePair& hardware() const { return hw_; }

  Normalizers normalizers_for(const FunctionProfile& f, double ci) const {
    return normalizers(f, hw_, config_.space, ci);
  }

  Generation place(const FunctionProfile& f, bool warm_old, bool warm_new, double ci) const {
    return epdm_choose(f, warm_old, warm_new, ci, config_.weights, normalizers_for(f, ci), hw_,
                       config_.space.locations);
  }

  // Keep-alive decision after an invocation of `f` at `now_ms`.
  Decision decide(const FunctionProfile& f, std::int64_t now_ms, double ci) {
    auto [it, first] = state_.try_emplace(f.id, config_.window);
    FunctionState& st = it->second;
    const dpso::SearchSpace& space = config_.space;
    if (first) {
      st.swarm = dpso::init_swarm(space, config_.particles, function_seed(config_.seed, f.id), config_.bounds);
      st.tracker.observe(std::nullopt, ci);
      st.last_ms = now_ms;
      return to_decision(dpso::best_decision(st.swarm, space));
    }

    const double gap_s = std::max<double>(1.0, static_cast<double>(now_ms - st.last_ms)) / 1000.0;
    st.last_ms = now_ms;
    st.history.push(gap_s);
    const dpso::EnvironmentDelta env = st.tracker.observe(gap_s, ci);
    if (config_.dynamic_weights) dpso::update_weights(st.swarm, env);

    const Normalizers norm = normalizers_for(f, ci);
    const std::vector<double> gaps(st.history.gaps().begin(), st.history.gaps().end());
    std::vector<std::optional<double>> cache(space.cells());
    auto fitness = [&](const dpso::GridCell& c) {
      auto& slot = cache[c.location_index * space.kat.size() + c.kat_index];
      if (!slot) slot = kdm_fitness(f, to_decision(c), gaps, ci, config_.weights, norm, hw_, space.locations);
      return *slot;
    };

    dpso::refresh_memory(st.swarm, space, fitness);
    if (config_.perception_response) dpso::perceive_and_redistribute(st.swarm, env);
    for (std::size_t i = 0; i < config_.iterations; ++i) dpso::step(st.swarm, space, fitness);
    return to_decision(dpso::best_decision(st.swarm, space));
  }

  // Placement then keep-alive decision for one invocation.
  InvocationOutcome on_invocation(const FunctionProfile& f, std::int64_t now_ms, double ci, bool warm_old,
                                  bool warm_new) {
    InvocationOutcome out;
    out.exec_location = place(f, warm_old, warm_new, ci);
    out.cold = !(out.exec_location == Generation::old_gen ? warm_old : warm_new);
    out.decision = decide(f, now_ms, ci);
    return out;
  }

  double keep_priority(const FunctionProfile& f, Generation g, double ci) const {
    return priority(f, hw_[g], ci, config_.weights, normalizers_for(f, ci)).score;
  }

  const dpso::Swarm* swarm_of(const std::string& function_id) const {
    auto it = state_.find(function_id);
    return it == state_.end() ? nullptr : &it->second.swarm;
  }

 private:
  struct FunctionState {
    explicit FunctionState(std::size_t window) : history(window) {}
    dpso::Swarm swarm;
    ArrivalHistory history;
    dpso::EnvironmentTracker tracker;
    std::int64_t last_ms = 0;
  };

  static Decision to_decision(const dpso::GridCell& c) { return {c.location, c.keepalive_s}; }

  SchedulerConfig config_;
  HardwarePair hw_;
  std::map<std::string, FunctionState> state_;
};

}  // namespace ecolife
