#pragma once

#include <optional>
#include <string>

#include "ecolife/errors.hpp"
#include "ecolife/generation.hpp"

namespace ecolife {

// Timing and power of one function on one hardware generation.
// Cold-start power defaults to the execution power when not given.
struct HardwareTiming {
  double exec_s = 0.0;       // warm execution time
  double coldstart_s = 0.0;  // extra latency of a cold start
  double cpu_power_exec_w = 0.0;
  double dram_power_exec_w = 0.0;
  std::optional<double> cpu_power_cold_w;
  std::optional<double> dram_power_cold_w;

  double cpu_power_cold() const { return cpu_power_cold_w.value_or(cpu_power_exec_w); }
  double dram_power_cold() const { return dram_power_cold_w.value_or(dram_power_exec_w); }

  double service_s(bool cold) const { return exec_s + (cold ? coldstart_s : 0.0); }
};

struct FunctionProfile {
  std::string id;
  double mem_mib = 0.0;
  PerGeneration<std::optional<HardwareTiming>> timing;

  bool has(Generation g) const { return timing[g].has_value(); }

  const HardwareTiming& on(Generation g) const {
    if (!timing[g]) {
      throw profile_error("function '" + id + "' has no profile entry for generation " +
                          std::string(to_string(g)));
    }
    return *timing[g];
  }

  void validate() const {
    if (id.empty()) throw profile_error("function profile with empty id");
    if (!(mem_mib > 0.0)) throw profile_error("function '" + id + "': mem must be > 0");
    for (Generation g : kAllGenerations) {
      if (!timing[g]) continue;
      const HardwareTiming& t = *timing[g];
      const std::string where = "function '" + id + "' on " + std::string(to_string(g)) + ": ";
      if (!(t.exec_s > 0.0)) throw profile_error(where + "exec must be > 0");
      if (!(t.coldstart_s >= 0.0)) throw profile_error(where + "coldstart must be >= 0");
      if (!(t.cpu_power_exec_w > 0.0) || !(t.dram_power_exec_w > 0.0) ||
          !(t.cpu_power_cold() > 0.0) || !(t.dram_power_cold() > 0.0)) {
        throw profile_error(where + "powers must be > 0");
      }
    }
  }
};

}  // namespace ecolife
