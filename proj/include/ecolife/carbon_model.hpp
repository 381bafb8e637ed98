#pragma once

// Embodied and operational carbon of serverless functions on one hardware
// generation. Units: grams CO2, seconds, watts, MiB, kWh, gCO2/kWh.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecolife/errors.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/generation.hpp"

namespace ecolife {

inline constexpr double kJoulesPerKwh = 3.6e6;
inline constexpr double kFourYearsS = 4.0 * 365.0 * 24.0 * 3600.0;  // 126 144 000 s

inline double to_kwh(double watts, double seconds) { return watts * seconds / kJoulesPerKwh; }

struct HardwareProfile {
  Generation id = Generation::new_gen;
  double ec_cpu = 0.0;   // g, whole CPU
  double ec_dram = 0.0;  // g, whole DRAM
  double lt_cpu = kFourYearsS;
  double lt_dram = kFourYearsS;
  int core_num = 1;
  double m_dram = 0.0;  // MiB
  double keepalive_cpu_power = 0.0;   // W, whole CPU while hosting warm functions
  double keepalive_dram_power = 0.0;  // W, whole DRAM
  double extra_embodied = 0.0;        // g, storage/motherboard/PSU, amortized during service only
  std::optional<double> extra_lifetime;  // s, defaults to lt_cpu

  double extra_lifetime_s() const { return extra_lifetime.value_or(lt_cpu); }

  void validate() const {
    const std::string where = "hardware '" + std::string(to_string(id)) + "': ";
    if (!(ec_cpu > 0.0) || !(ec_dram > 0.0)) throw domain_error(where + "embodied carbon must be > 0");
    if (!(lt_cpu > 0.0) || !(lt_dram > 0.0)) throw domain_error(where + "lifetimes must be > 0");
    if (core_num < 1) throw domain_error(where + "core_num must be >= 1");
    if (!(m_dram > 0.0)) throw domain_error(where + "m_dram must be > 0");
    if (!(keepalive_cpu_power > 0.0) || !(keepalive_dram_power > 0.0)) {
      throw domain_error(where + "keep-alive powers must be > 0");
    }
    if (!(extra_embodied >= 0.0)) throw domain_error(where + "extra_embodied must be >= 0");
    if (!(extra_lifetime_s() > 0.0)) throw domain_error(where + "extra_lifetime must be > 0");
  }
};

// Minute-resolution (by default) grid carbon intensity. Step-function
// semantics: values[i] holds on [start + i*step, start + (i+1)*step).
// Lookups before the first sample use the first value, after the last use the last.
struct CarbonIntensitySeries {
  std::int64_t start_ms = 0;
  std::int64_t step_ms = 60'000;
  std::vector<double> values;

  void validate() const {
    if (values.empty()) throw domain_error("carbon intensity series is empty");
    if (step_ms <= 0) throw domain_error("carbon intensity step must be > 0");
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw domain_error("carbon intensity must be finite and >= 0");
    }
  }

  std::size_t bucket(std::int64_t t_ms) const {
    if (t_ms < start_ms) return 0;
    const auto b = static_cast<std::size_t>((t_ms - start_ms) / step_ms);
    return std::min(b, values.size() - 1);
  }

  double at(std::int64_t t_ms) const { return values[bucket(t_ms)]; }

  // Integral of CI over [t0, t1) in gCO2*s/kWh.
  double integral(std::int64_t t0_ms, std::int64_t t1_ms) const {
    if (t1_ms <= t0_ms) return 0.0;
    double acc = 0.0;  // CI * ms
    std::int64_t cur = t0_ms;
    while (cur < t1_ms) {
      const std::size_t b = bucket(cur);
      std::int64_t seg_end = t1_ms;
      if (b + 1 < values.size()) {
        seg_end = std::min<std::int64_t>(t1_ms, start_ms + static_cast<std::int64_t>(b + 1) * step_ms);
      }
      acc += values[b] * static_cast<double>(seg_end - cur);
      cur = seg_end;
    }
    return acc / 1000.0;
  }
};

struct CarbonBreakdown {
  double embodied_cpu = 0.0;
  double embodied_dram = 0.0;
  double embodied_extra = 0.0;
  double op_cpu = 0.0;
  double op_dram = 0.0;
  double total = 0.0;

  static CarbonBreakdown of(double e_cpu, double e_dram, double e_extra, double o_cpu, double o_dram) {
    return {e_cpu, e_dram, e_extra, o_cpu, o_dram, e_cpu + e_dram + e_extra + o_cpu + o_dram};
  }

  double embodied() const { return embodied_cpu + embodied_dram + embodied_extra; }
  double operational() const { return op_cpu + op_dram; }

  CarbonBreakdown& operator+=(const CarbonBreakdown& o) {
    *this = of(embodied_cpu + o.embodied_cpu, embodied_dram + o.embodied_dram,
               embodied_extra + o.embodied_extra, op_cpu + o.op_cpu, op_dram + o.op_dram);
    return *this;
  }
};

namespace detail {

inline double memory_share(const HardwareProfile& hw, double mem_mib) {
  if (!(mem_mib > 0.0)) throw domain_error("function memory must be > 0");
  if (mem_mib > hw.m_dram) {
    throw capacity_error("function memory " + std::to_string(mem_mib) + " MiB exceeds DRAM capacity " +
                         std::to_string(hw.m_dram) + " MiB");
  }
  return mem_mib / hw.m_dram;
}

inline void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) throw domain_error(std::string(what) + " must be >= 0");
}

}  // namespace detail

// DRAM embodied carbon attributed to a function resident for `duration_s`
// (service time plus keep-alive, composed by the caller).
inline double embodied_dram(const HardwareProfile& hw, double mem_mib, double duration_s) {
  detail::require_non_negative(duration_s, "duration");
  const double share = detail::memory_share(hw, mem_mib);
  return duration_s / hw.lt_dram * share * hw.ec_dram;
}

// The whole CPU is attributed during service, one core during keep-alive.
inline double embodied_cpu(const HardwareProfile& hw, double service_s, double keepalive_s) {
  detail::require_non_negative(service_s, "service time");
  detail::require_non_negative(keepalive_s, "keep-alive time");
  return service_s / hw.lt_cpu * hw.ec_cpu + keepalive_s / hw.lt_cpu * (hw.ec_cpu / hw.core_num);
}

inline double embodied_extra(const HardwareProfile& hw, double service_s) {
  detail::require_non_negative(service_s, "service time");
  return service_s / hw.extra_lifetime_s() * hw.extra_embodied;
}

// Energies are whole-DRAM energies; the function's share is its memory ratio.
inline double operational_dram(const HardwareProfile& hw, double mem_mib, double e_service_kwh,
                               double e_keepalive_kwh, double ci) {
  detail::require_non_negative(e_service_kwh, "service energy");
  detail::require_non_negative(e_keepalive_kwh, "keep-alive energy");
  detail::require_non_negative(ci, "carbon intensity");
  const double share = detail::memory_share(hw, mem_mib);
  return share * (e_service_kwh + e_keepalive_kwh) * ci;
}

// Keep-alive energy is whole-CPU energy; one core of it is attributed.
inline double operational_cpu(const HardwareProfile& hw, double e_service_kwh, double e_keepalive_kwh,
                              double ci) {
  detail::require_non_negative(e_service_kwh, "service energy");
  detail::require_non_negative(e_keepalive_kwh, "keep-alive energy");
  detail::require_non_negative(ci, "carbon intensity");
  return (e_service_kwh + e_keepalive_kwh / hw.core_num) * ci;
}

struct ServiceEnergy {
  double cpu_kwh = 0.0;
  double dram_kwh = 0.0;  // whole DRAM
};

inline ServiceEnergy service_energy(const HardwareTiming& t, bool cold) {
  ServiceEnergy e{to_kwh(t.cpu_power_exec_w, t.exec_s), to_kwh(t.dram_power_exec_w, t.exec_s)};
  if (cold) {
    e.cpu_kwh += to_kwh(t.cpu_power_cold(), t.coldstart_s);
    e.dram_kwh += to_kwh(t.dram_power_cold(), t.coldstart_s);
  }
  return e;
}

// Carbon of one invocation's service period (cold-start overhead included when
// `cold`), priced at a single CI sample.
inline CarbonBreakdown service_carbon(const FunctionProfile& f, const HardwareProfile& hw, bool cold, double ci) {
  const HardwareTiming& t = f.on(hw.id);
  const double service = t.service_s(cold);
  const ServiceEnergy e = service_energy(t, cold);
  return CarbonBreakdown::of(embodied_cpu(hw, service, 0.0), embodied_dram(hw, f.mem_mib, service),
                             embodied_extra(hw, service), operational_cpu(hw, e.cpu_kwh, 0.0, ci),
                             operational_dram(hw, f.mem_mib, e.dram_kwh, 0.0, ci));
}

// Carbon of keeping `f` alive on `hw` for `duration_s`. `ci_integral` is the
// integral of CI over the window (gCO2*s/kWh); for a constant CI it is ci * duration.
inline CarbonBreakdown keepalive_carbon(const FunctionProfile& f, const HardwareProfile& hw, double duration_s,
                                        double ci_integral) {
  detail::require_non_negative(duration_s, "keep-alive duration");
  detail::require_non_negative(ci_integral, "carbon intensity integral");
  if (duration_s == 0.0) {
    detail::memory_share(hw, f.mem_mib);
    return {};
  }
  const double mean_ci = ci_integral / duration_s;
  const double e_cpu = to_kwh(hw.keepalive_cpu_power, duration_s);
  const double e_dram = to_kwh(hw.keepalive_dram_power, duration_s);
  return CarbonBreakdown::of(embodied_cpu(hw, 0.0, duration_s), embodied_dram(hw, f.mem_mib, duration_s), 0.0,
                             operational_cpu(hw, 0.0, e_cpu, mean_ci),
                             operational_dram(hw, f.mem_mib, 0.0, e_dram, mean_ci));
}

inline CarbonBreakdown keepalive_carbon(const FunctionProfile& f, const HardwareProfile& hw,
                                        const CarbonIntensitySeries& ci, std::int64_t start_ms,
                                        std::int64_t end_ms) {
  const std::int64_t span = std::max<std::int64_t>(0, end_ms - start_ms);
  return keepalive_carbon(f, hw, static_cast<double>(span) / 1000.0, ci.integral(start_ms, start_ms + span));
}

// Energy attributed to the function with the same CPU/DRAM shares the carbon
// formulas use, i.e. operational carbon at CI = 1.
inline double service_energy_kwh(const FunctionProfile& f, const HardwareProfile& hw, bool cold) {
  const ServiceEnergy e = service_energy(f.on(hw.id), cold);
  return e.cpu_kwh + detail::memory_share(hw, f.mem_mib) * e.dram_kwh;
}

inline double keepalive_energy_kwh(const FunctionProfile& f, const HardwareProfile& hw, double duration_s) {
  detail::require_non_negative(duration_s, "keep-alive duration");
  return to_kwh(hw.keepalive_cpu_power, duration_s) / hw.core_num +
         detail::memory_share(hw, f.mem_mib) * to_kwh(hw.keepalive_dram_power, duration_s);
}

// The old and new generation side by side.
struct HardwarePair {
  HardwareProfile old_hw;
  HardwareProfile new_hw;

  const HardwareProfile& operator[](Generation g) const { return g == Generation::old_gen ? old_hw : new_hw; }
};

}  // namespace ecolife
