#pragma once

// Invocation traces, function-profile catalogs, hardware profiles, and
// carbon-intensity series: loading, validation, writing, and trace-to-catalog
// matching.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecolife/carbon_model.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/function_profile.hpp"

namespace ecolife {

struct Invocation {
  std::int64_t timestamp_ms = 0;
  std::string function_id;

  bool operator==(const Invocation&) const = default;
};

using InvocationTrace = std::vector<Invocation>;

struct TraceFunctionStats {
  std::string function_id;
  double mem_mib = 0.0;
  double mean_exec_s = 0.0;
};

using ProfileCatalog = std::vector<FunctionProfile>;

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw parse_error(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
  }
  return value;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trace CSV: header `timestamp_ms,function_id`, timestamps non-decreasing.

inline InvocationTrace parse_trace(std::istream& in) {
  InvocationTrace trace;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "timestamp_ms,function_id") {
        throw parse_error("expected header 'timestamp_ms,function_id'", line_no);
      }
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2) throw parse_error("expected 2 columns", line_no);
    const auto ts = detail::parse_number<std::int64_t>(fields[0], line_no, "timestamp");
    if (ts < 0) throw parse_error("negative timestamp", line_no);
    if (fields[1].empty()) throw parse_error("empty function_id", line_no);
    if (!trace.empty() && ts < trace.back().timestamp_ms) {
      throw parse_error("timestamp " + std::to_string(ts) + " is earlier than the previous row", line_no);
    }
    trace.push_back({ts, std::string(fields[1])});
  }
  return trace;
}

inline InvocationTrace load_trace(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_trace(in);
}

inline void write_trace(std::ostream& out, const InvocationTrace& trace) {
  out << "timestamp_ms,function_id\n";
  for (const auto& inv : trace) out << inv.timestamp_ms << ',' << inv.function_id << '\n';
}

// ---------------------------------------------------------------------------
// CI CSV: header `minute,g_co2_per_kwh`, consecutive minute indices.

inline CarbonIntensitySeries parse_ci(std::istream& in) {
  CarbonIntensitySeries series;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::int64_t prev_minute = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "minute,g_co2_per_kwh") throw parse_error("expected header 'minute,g_co2_per_kwh'", line_no);
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2) throw parse_error("expected 2 columns", line_no);
    const auto minute = detail::parse_number<std::int64_t>(fields[0], line_no, "minute");
    const auto value = detail::parse_number<double>(fields[1], line_no, "carbon intensity");
    if (!(value >= 0.0) || !std::isfinite(value)) throw parse_error("carbon intensity must be >= 0", line_no);
    if (series.values.empty()) {
      series.start_ms = minute * 60'000;
    } else if (minute != prev_minute + 1) {
      throw parse_error("minute indices must be consecutive", line_no);
    }
    prev_minute = minute;
    series.values.push_back(value);
  }
  if (series.values.empty()) throw parse_error("carbon intensity file has no samples");
  return series;
}

inline CarbonIntensitySeries load_ci(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_ci(in);
}

inline void write_ci(std::ostream& out, const CarbonIntensitySeries& series) {
  if (series.step_ms != 60'000 || series.start_ms % 60'000 != 0) {
    throw config_error("only minute-aligned series can be written as CSV");
  }
  out << "minute,g_co2_per_kwh\n";
  const std::int64_t first = series.start_ms / 60'000;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out << first + static_cast<std::int64_t>(i) << ',' << format_double(series.values[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON: hardware profiles and function-profile catalogs.

inline nlohmann::json to_json(const HardwareProfile& hw) {
  nlohmann::json j{{"id", std::string(to_string(hw.id))},
                   {"ec_cpu", hw.ec_cpu},
                   {"ec_dram", hw.ec_dram},
                   {"lt_cpu", hw.lt_cpu},
                   {"lt_dram", hw.lt_dram},
                   {"core_num", hw.core_num},
                   {"m_dram", hw.m_dram},
                   {"keepalive_cpu_power", hw.keepalive_cpu_power},
                   {"keepalive_dram_power", hw.keepalive_dram_power},
                   {"extra_embodied", hw.extra_embodied}};
  if (hw.extra_lifetime) j["extra_lifetime"] = *hw.extra_lifetime;
  return j;
}

inline HardwareProfile hardware_from_json(const nlohmann::json& j) {
  try {
    HardwareProfile hw;
    hw.id = parse_generation(j.at("id").get<std::string>());
    hw.ec_cpu = j.at("ec_cpu").get<double>();
    hw.ec_dram = j.at("ec_dram").get<double>();
    hw.lt_cpu = j.value("lt_cpu", kFourYearsS);
    hw.lt_dram = j.value("lt_dram", kFourYearsS);
    hw.core_num = j.at("core_num").get<int>();
    hw.m_dram = j.at("m_dram").get<double>();
    hw.keepalive_cpu_power = j.at("keepalive_cpu_power").get<double>();
    hw.keepalive_dram_power = j.at("keepalive_dram_power").get<double>();
    hw.extra_embodied = j.value("extra_embodied", 0.0);
    if (j.contains("extra_lifetime")) hw.extra_lifetime = j.at("extra_lifetime").get<double>();
    hw.validate();
    return hw;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("hardware profile: ") + e.what());
  } catch (const domain_error& e) {
    throw parse_error(std::string("hardware profile: ") + e.what());
  }
}

inline nlohmann::json to_json(const FunctionProfile& f) {
  nlohmann::json hw = nlohmann::json::object();
  for (Generation g : kAllGenerations) {
    if (!f.timing[g]) continue;
    const HardwareTiming& t = *f.timing[g];
    nlohmann::json e{{"exec", t.exec_s},
                     {"coldstart", t.coldstart_s},
                     {"cpu_power_exec", t.cpu_power_exec_w},
                     {"dram_power_exec", t.dram_power_exec_w}};
    if (t.cpu_power_cold_w) e["cpu_power_cold"] = *t.cpu_power_cold_w;
    if (t.dram_power_cold_w) e["dram_power_cold"] = *t.dram_power_cold_w;
    hw[std::string(to_string(g))] = std::move(e);
  }
  return {{"id", f.id}, {"mem", f.mem_mib}, {"hardware", std::move(hw)}};
}

inline FunctionProfile function_from_json(const nlohmann::json& j) {
  try {
    FunctionProfile f;
    f.id = j.at("id").get<std::string>();
    f.mem_mib = j.at("mem").get<double>();
    for (const auto& [key, e] : j.at("hardware").items()) {
      HardwareTiming t;
      t.exec_s = e.at("exec").get<double>();
      t.coldstart_s = e.at("coldstart").get<double>();
      t.cpu_power_exec_w = e.at("cpu_power_exec").get<double>();
      t.dram_power_exec_w = e.at("dram_power_exec").get<double>();
      if (e.contains("cpu_power_cold")) t.cpu_power_cold_w = e.at("cpu_power_cold").get<double>();
      if (e.contains("dram_power_cold")) t.dram_power_cold_w = e.at("dram_power_cold").get<double>();
      f.timing[parse_generation(key)] = t;
    }
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("function profile: ") + e.what());
  } catch (const profile_error& e) {
    throw parse_error(e.what());
  }
}

inline ProfileCatalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw parse_error("profile catalog must be a JSON array");
  ProfileCatalog catalog;
  for (const auto& item : j) catalog.push_back(function_from_json(item));
  std::map<std::string, int> seen;
  for (const auto& f : catalog) {
    if (seen[f.id]++ > 0) throw parse_error("duplicate function profile id '" + f.id + "'");
  }
  return catalog;
}

inline nlohmann::json to_json(const ProfileCatalog& catalog) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& f : catalog) j.push_back(to_json(f));
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  auto in = detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error("'" + path + "': " + e.what());
  }
}

inline ProfileCatalog load_catalog(const std::string& path) { return catalog_from_json(read_json_file(path)); }

inline HardwareProfile load_hardware(const std::string& path) { return hardware_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Trace-to-catalog matching.

// Mean warm execution time over the generations the profile covers.
inline double mean_exec_s(const FunctionProfile& f) {
  double sum = 0.0;
  int n = 0;
  for (Generation g : kAllGenerations) {
    if (f.timing[g]) {
      sum += f.timing[g]->exec_s;
      ++n;
    }
  }
  if (n == 0) throw profile_error("function '" + f.id + "' has no hardware entries");
  return sum / n;
}

// Nearest catalog profile in (memory, execution time) space, each axis
// divided by the catalog's maximum. Equal distances go to the smaller id.
inline const FunctionProfile& match_profile(const TraceFunctionStats& stats, std::span<const FunctionProfile> catalog) {
  if (catalog.empty()) throw config_error("cannot match against an empty profile catalog");
  double mem_max = 0.0;
  double exec_max = 0.0;
  for (const auto& f : catalog) {
    mem_max = std::max(mem_max, f.mem_mib);
    exec_max = std::max(exec_max, mean_exec_s(f));
  }
  const FunctionProfile* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& f : catalog) {
    const double dm = (stats.mem_mib - f.mem_mib) / mem_max;
    const double de = (stats.mean_exec_s - mean_exec_s(f)) / exec_max;
    const double d = std::hypot(dm, de);
    if (best == nullptr || d < best_d || (d == best_d && f.id < best->id)) {
      best = &f;
      best_d = d;
    }
  }
  return *best;
}

// Profiles keyed by trace function id. Every trace id must resolve.
using ProfileMap = std::map<std::string, FunctionProfile>;

inline ProfileMap profiles_by_id(std::span<const FunctionProfile> catalog) {
  ProfileMap map;
  for (const auto& f : catalog) map.emplace(f.id, f);
  return map;
}

inline void require_resolvable(const InvocationTrace& trace, const ProfileMap& profiles) {
  for (const auto& inv : trace) {
    if (!profiles.contains(inv.function_id)) {
      throw config_error("trace function '" + inv.function_id + "' has no profile");
    }
  }
}

}  // namespace ecolife
