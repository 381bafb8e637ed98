#pragma once

// Synthetic desk-scale scenarios: a trace, a CI series, a profile catalog, a
// hardware pair, and the pool capacities they are meant to run with.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ecolife/carbon_model.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/workload.hpp"

namespace ecolife {

enum class ScenarioKind { poisson_small, ci_step, memory_pressure };

inline constexpr std::array<ScenarioKind, 3> kAllScenarios{ScenarioKind::poisson_small, ScenarioKind::ci_step,
                                                           ScenarioKind::memory_pressure};

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::poisson_small: return "poisson-small";
    case ScenarioKind::ci_step: return "ci-step";
    case ScenarioKind::memory_pressure: return "memory-pressure";
  }
  return "?";
}

inline ScenarioKind parse_scenario_kind(std::string_view s) {
  for (ScenarioKind k : kAllScenarios) {
    if (to_string(k) == s) return k;
  }
  throw config_error("unknown scenario '" + std::string(s) + "'");
}

struct Scenario {
  std::string name;
  InvocationTrace trace;
  CarbonIntensitySeries ci;
  ProfileCatalog profiles;
  HardwarePair hw;
  double mem_old_mib = 16 * 1024.0;
  double mem_new_mib = 16 * 1024.0;
};

// Older generation: many slower cores, large DRAM, low embodied carbon,
// higher idle power per core. Newer generation: the opposite. Keeping a
// function alive is cheaper on the old one below roughly 175 gCO2/kWh and on
// the new one above it.
inline HardwarePair sample_hardware() {
  HardwareProfile old_hw;
  old_hw.id = Generation::old_gen;
  old_hw.ec_cpu = 100'000.0;
  old_hw.ec_dram = 400'000.0;
  old_hw.core_num = 36;
  old_hw.m_dram = 512 * 1024.0;
  old_hw.keepalive_cpu_power = 135.0;
  old_hw.keepalive_dram_power = 40.0;

  HardwareProfile new_hw;
  new_hw.id = Generation::new_gen;
  new_hw.ec_cpu = 242'000.0;
  new_hw.ec_dram = 300'000.0;
  new_hw.core_num = 24;
  new_hw.m_dram = 192 * 1024.0;
  new_hw.keepalive_cpu_power = 60.0;
  new_hw.keepalive_dram_power = 20.0;
  return {old_hw, new_hw};
}

namespace detail {

struct Template {
  const char* id;
  double mem_mib;
  double exec_new_s;
  double cold_new_s;
  double old_slowdown;
  double cpu_power_new_w;
};

inline constexpr std::array<Template, 8> kTemplates{{
    {"compression", 512, 2.4, 2.0, 1.18, 135},
    {"dna-visualization", 512, 4.0, 2.5, 1.22, 150},
    {"dynamic-html", 128, 0.2, 0.9, 1.10, 120},
    {"graph-bfs", 256, 0.8, 1.5, 1.15, 130},
    {"graph-pagerank", 384, 1.6, 1.6, 1.16, 140},
    {"image-recognition", 1536, 3.2, 4.5, 1.25, 160},
    {"thumbnailer", 256, 0.5, 1.2, 1.12, 125},
    {"video-processing", 1024, 6.0, 3.5, 1.16, 155},
}};

inline FunctionProfile from_template(const Template& t, std::string id) {
  FunctionProfile f;
  f.id = std::move(id);
  f.mem_mib = t.mem_mib;
  f.timing[Generation::new_gen] = HardwareTiming{t.exec_new_s, t.cold_new_s, t.cpu_power_new_w, 30.0, {}, {}};
  f.timing[Generation::old_gen] = HardwareTiming{t.exec_new_s * t.old_slowdown, t.cold_new_s * 1.1,
                                                 t.cpu_power_new_w * 1.2, 45.0, {}, {}};
  return f;
}

// Portable uniform [0, 1) from a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// `count` arrivals with exponential gaps (mean `mean_gap_s` across all
// functions), each picking a function uniformly at random.
inline InvocationTrace poisson_trace(const std::vector<std::string>& ids, std::size_t count, double mean_gap_s,
                                     std::mt19937_64& rng) {
  InvocationTrace trace;
  trace.reserve(count);
  double t_s = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) t_s += -mean_gap_s * std::log1p(-uniform01(rng));
    const std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(ids.size()));
    trace.push_back({static_cast<std::int64_t>(std::llround(t_s * 1000.0)), ids[std::min(pick, ids.size() - 1)]});
  }
  return trace;
}

inline std::int64_t minutes_covering(const InvocationTrace& trace) {
  const std::int64_t last = trace.empty() ? 0 : trace.back().timestamp_ms;
  return last / 60'000 + 12;  // trailing keep-alive windows
}

}  // namespace detail

// poisson-small: 8 functions, 300 invocations, each function re-invoked every
// 4 minutes on average; CI drifts between about 70 and 140.
// ci-step: the same workload shape; CI is 50 for the first half of the trace
// and 300 afterwards.
// memory-pressure: 16 functions invoked every 2 minutes on average, each pool
// holding a quarter of their summed memory; constant CI.
inline Scenario generate_scenario(ScenarioKind kind, std::uint64_t seed) {
  Scenario s;
  s.name = std::string(to_string(kind));
  s.hw = sample_hardware();
  std::mt19937_64 rng(seed ^ (0x5eed0000ULL + static_cast<std::uint64_t>(kind)));

  std::vector<std::string> ids;
  if (kind == ScenarioKind::memory_pressure) {
    for (const auto& t : detail::kTemplates) {
      for (const char* suffix : {"-a", "-b"}) {
        ids.push_back(std::string(t.id) + suffix);
        s.profiles.push_back(detail::from_template(t, ids.back()));
      }
    }
  } else {
    for (const auto& t : detail::kTemplates) {
      ids.push_back(t.id);
      s.profiles.push_back(detail::from_template(t, t.id));
    }
  }

  const double per_function_gap_s = kind == ScenarioKind::memory_pressure ? 120.0 : 240.0;
  const std::size_t count = kind == ScenarioKind::memory_pressure ? 480 : 300;
  s.trace = detail::poisson_trace(ids, count, per_function_gap_s / static_cast<double>(ids.size()), rng);

  const std::int64_t minutes = detail::minutes_covering(s.trace);
  s.ci.values.resize(static_cast<std::size_t>(minutes));
  switch (kind) {
    case ScenarioKind::poisson_small: {
      const double phase = detail::uniform01(rng) * 2.0 * std::acos(-1.0);
      for (std::int64_t m = 0; m < minutes; ++m) {
        const double wave = std::sin(phase + 2.0 * std::acos(-1.0) * static_cast<double>(m) / 90.0);
        const double noise = (detail::uniform01(rng) - 0.5) * 10.0;
        s.ci.values[static_cast<std::size_t>(m)] = std::round(105.0 + 30.0 * wave + noise);
      }
      break;
    }
    case ScenarioKind::ci_step: {
      const std::int64_t mid = s.trace.empty() ? 0 : s.trace.back().timestamp_ms / 2 / 60'000;
      for (std::int64_t m = 0; m < minutes; ++m) s.ci.values[static_cast<std::size_t>(m)] = m < mid ? 50.0 : 300.0;
      break;
    }
    case ScenarioKind::memory_pressure: {
      for (auto& v : s.ci.values) v = 100.0;
      double demand = 0.0;
      for (const auto& f : s.profiles) demand += f.mem_mib;
      s.mem_old_mib = demand / 4.0;
      s.mem_new_mib = demand / 4.0;
      break;
    }
  }
  return s;
}

}  // namespace ecolife
