#pragma once

// Run outputs: per-invocation records CSV, summary JSON, CDF CSV, comparison
// table CSV, decision-overhead JSON, and loaders for each.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecolife/errors.hpp"
#include "ecolife/sim_engine.hpp"
#include "ecolife/workload.hpp"

namespace ecolife {

inline constexpr const char* kRecordsHeader =
    "function_id,time_ms,exec_location,cold,service_time_s,service_carbon_g,keepalive_carbon_g,keepalive_s,"
    "keep_location,keep_duration_s,objective";
inline constexpr const char* kCdfHeader = "quantile,service_time_s,carbon_g";
inline constexpr const char* kComparisonHeader =
    "policy,contention_free,invocations,cold_starts,total_service_time_s,mean_service_time_s,p95_service_time_s,"
    "total_carbon_g,total_service_carbon_g,total_keepalive_carbon_g,total_objective,evictions,transfers,"
    "keepalive_function_minutes";

inline void write_records(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.function_id << ',' << r.time_ms << ',' << to_string(r.exec_location) << ',' << (r.cold ? 1 : 0) << ','
        << format_double(r.service_time_s) << ',' << format_double(r.service_carbon_g) << ','
        << format_double(r.keepalive_carbon_g) << ',' << format_double(r.keepalive_s) << ','
        << to_string(r.decision.keep_location) << ',' << format_double(r.decision.keep_duration_s) << ','
        << format_double(r.objective) << '\n';
  }
}

inline std::vector<MetricsRecord> parse_records(std::istream& in) {
  std::vector<MetricsRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line_no == 1) {
      if (line != kRecordsHeader) throw parse_error("unexpected records header", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 11) throw parse_error("expected 11 columns", line_no);
    MetricsRecord r;
    r.function_id = std::string(f[0]);
    r.time_ms = detail::parse_number<std::int64_t>(f[1], line_no, "time_ms");
    r.exec_location = parse_generation(f[2]);
    r.cold = detail::parse_number<int>(f[3], line_no, "cold") != 0;
    r.service_time_s = detail::parse_number<double>(f[4], line_no, "service_time_s");
    r.service_carbon_g = detail::parse_number<double>(f[5], line_no, "service_carbon_g");
    r.keepalive_carbon_g = detail::parse_number<double>(f[6], line_no, "keepalive_carbon_g");
    r.keepalive_s = detail::parse_number<double>(f[7], line_no, "keepalive_s");
    r.decision.keep_location = parse_generation(f[8]);
    r.decision.keep_duration_s = detail::parse_number<double>(f[9], line_no, "keep_duration_s");
    r.objective = detail::parse_number<double>(f[10], line_no, "objective");
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_cdf(std::ostream& out, const RunSummary& s) {
  out << kCdfHeader << '\n';
  for (const auto& p : s.cdf) {
    out << format_double(p.quantile) << ',' << format_double(p.service_time_s) << ',' << format_double(p.carbon_g)
        << '\n';
  }
}

inline std::vector<CdfPoint> parse_cdf(std::istream& in) {
  std::vector<CdfPoint> points;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line_no == 1) {
      if (line != kCdfHeader) throw parse_error("unexpected CDF header", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 3) throw parse_error("expected 3 columns", line_no);
    points.push_back({detail::parse_number<double>(f[0], line_no, "quantile"),
                      detail::parse_number<double>(f[1], line_no, "service_time_s"),
                      detail::parse_number<double>(f[2], line_no, "carbon_g")});
  }
  return points;
}

inline nlohmann::json to_json(const Percentiles& p) { return {{"p50", p.p50}, {"p95", p.p95}, {"p99", p.p99}}; }

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j;
  j["policy"] = s.policy;
  j["contention_free"] = s.contention_free;
  j["invocations"] = s.invocations;
  j["cold_starts"] = s.cold_starts;
  j["total_service_time_s"] = s.total_service_time_s;
  j["mean_service_time_s"] = s.mean_service_time_s;
  j["total_service_carbon_g"] = s.total_service_carbon_g;
  j["total_keepalive_carbon_g"] = s.total_keepalive_carbon_g;
  j["total_carbon_g"] = s.total_carbon_g;
  j["mean_carbon_g"] = s.mean_carbon_g;
  j["total_objective"] = s.total_objective;
  j["keepalive_function_minutes"] = s.keepalive_function_minutes;
  j["evictions"] = s.evictions;
  j["transfers"] = s.transfers;
  j["service_time_s"] = to_json(s.service_time_s);
  j["carbon_g"] = to_json(s.carbon_g);
  return j;
}

inline Percentiles percentiles_from_json(const nlohmann::json& j) {
  return {j.at("p50").get<double>(), j.at("p95").get<double>(), j.at("p99").get<double>()};
}

// The CDF lives in its own file and is not restored here.
inline RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.policy = j.at("policy").get<std::string>();
  s.contention_free = j.at("contention_free").get<bool>();
  s.invocations = j.at("invocations").get<std::size_t>();
  s.cold_starts = j.at("cold_starts").get<std::size_t>();
  s.total_service_time_s = j.at("total_service_time_s").get<double>();
  s.mean_service_time_s = j.at("mean_service_time_s").get<double>();
  s.total_service_carbon_g = j.at("total_service_carbon_g").get<double>();
  s.total_keepalive_carbon_g = j.at("total_keepalive_carbon_g").get<double>();
  s.total_carbon_g = j.at("total_carbon_g").get<double>();
  s.mean_carbon_g = j.at("mean_carbon_g").get<double>();
  s.total_objective = j.at("total_objective").get<double>();
  s.keepalive_function_minutes = j.at("keepalive_function_minutes").get<double>();
  s.evictions = j.at("evictions").get<std::size_t>();
  s.transfers = j.at("transfers").get<std::size_t>();
  s.service_time_s = percentiles_from_json(j.at("service_time_s"));
  s.carbon_g = percentiles_from_json(j.at("carbon_g"));
  return s;
}

inline nlohmann::json to_json(const DecisionOverhead& o) {
  return {{"decisions", o.decisions}, {"mean_us", o.mean_us}, {"max_us", o.max_us}, {"total_us", o.total_us}};
}

inline void write_comparison(std::ostream& out, const std::vector<RunSummary>& rows) {
  out << kComparisonHeader << '\n';
  for (const auto& s : rows) {
    out << s.policy << ',' << (s.contention_free ? 1 : 0) << ',' << s.invocations << ',' << s.cold_starts << ','
        << format_double(s.total_service_time_s) << ',' << format_double(s.mean_service_time_s) << ','
        << format_double(s.service_time_s.p95) << ',' << format_double(s.total_carbon_g) << ','
        << format_double(s.total_service_carbon_g) << ',' << format_double(s.total_keepalive_carbon_g) << ','
        << format_double(s.total_objective) << ',' << s.evictions << ',' << s.transfers << ','
        << format_double(s.keepalive_function_minutes) << '\n';
  }
}

inline std::vector<RunSummary> parse_comparison(std::istream& in) {
  std::vector<RunSummary> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line_no == 1) {
      if (line != kComparisonHeader) throw parse_error("unexpected comparison header", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 14) throw parse_error("expected 14 columns", line_no);
    RunSummary s;
    s.policy = std::string(f[0]);
    s.contention_free = detail::parse_number<int>(f[1], line_no, "contention_free") != 0;
    s.invocations = detail::parse_number<std::size_t>(f[2], line_no, "invocations");
    s.cold_starts = detail::parse_number<std::size_t>(f[3], line_no, "cold_starts");
    s.total_service_time_s = detail::parse_number<double>(f[4], line_no, "total_service_time_s");
    s.mean_service_time_s = detail::parse_number<double>(f[5], line_no, "mean_service_time_s");
    s.service_time_s.p95 = detail::parse_number<double>(f[6], line_no, "p95_service_time_s");
    s.total_carbon_g = detail::parse_number<double>(f[7], line_no, "total_carbon_g");
    s.total_service_carbon_g = detail::parse_number<double>(f[8], line_no, "total_service_carbon_g");
    s.total_keepalive_carbon_g = detail::parse_number<double>(f[9], line_no, "total_keepalive_carbon_g");
    s.total_objective = detail::parse_number<double>(f[10], line_no, "total_objective");
    s.evictions = detail::parse_number<std::size_t>(f[11], line_no, "evictions");
    s.transfers = detail::parse_number<std::size_t>(f[12], line_no, "transfers");
    s.keepalive_function_minutes = detail::parse_number<double>(f[13], line_no, "keepalive_function_minutes");
    rows.push_back(std::move(s));
  }
  return rows;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw config_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace detail

// <outdir>/<policy>.records.csv, .summary.json, .cdf.csv. The overhead file
// holds wall-clock timings and differs between runs.
inline void emit_report(const RunResult& result, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  const std::string stem = result.summary.policy;
  {
    auto out = detail::open_output(outdir / (stem + ".records.csv"));
    write_records(out, result.records);
  }
  {
    auto out = detail::open_output(outdir / (stem + ".summary.json"));
    out << to_json(result.summary).dump(2) << '\n';
  }
  {
    auto out = detail::open_output(outdir / (stem + ".cdf.csv"));
    write_cdf(out, result.summary);
  }
  {
    auto out = detail::open_output(outdir / (stem + ".overhead.json"));
    out << to_json(result.overhead).dump(2) << '\n';
  }
}

inline void emit_comparison(const std::vector<RunSummary>& rows, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  auto out = detail::open_output(outdir / "comparison.csv");
  write_comparison(out, rows);
}

}  // namespace ecolife
