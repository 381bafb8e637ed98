#pragma once

// Run configuration: command-line options (with an optional INI/TOML config
// file whose values the flags override), validation, input loading, and the
// run/compare pipeline.
//
// Needs CLI11 on the include path; the core library does not.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecolife/baselines.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/report.hpp"
#include "ecolife/scenario.hpp"
#include "ecolife/sim_engine.hpp"
#include "ecolife/workload.hpp"

namespace ecolife {

struct RunConfig {
  std::string trace;
  std::string ci;
  std::string profiles;
  std::string hw_old;
  std::string hw_new;
  std::string function_stats;  // optional: maps unprofiled trace ids to the catalog
  std::string scenario;        // generated inputs instead of files
  std::string scheduler = "ecolife";
  std::string compare;  // comma-separated kinds, or "all"
  double lambda_s = 0.5;
  double lambda_c = 0.5;
  std::string kat = "0,60,120,300,600";
  std::optional<double> mem_old;  // MiB; scenario or 16 GiB default
  std::optional<double> mem_new;
  std::size_t particles = 15;
  std::size_t iters = 10;
  std::size_t window = 10;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool no_pool_adjust = false;
  bool no_perception = false;
  bool no_dynamic_weights = false;
};

inline std::vector<double> parse_kat(const std::string& text) {
  std::vector<double> kat;
  for (std::string_view field : detail::split_csv(text)) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    kat.push_back(detail::parse_number<double>(field, 0, "keep-alive time"));
  }
  return kat;
}

inline std::vector<PolicyKind> selected_policies(const RunConfig& c) {
  if (c.compare.empty()) return {parse_policy_kind(c.scheduler)};
  if (c.compare == "all") return {kAllPolicies.begin(), kAllPolicies.end()};
  std::vector<PolicyKind> kinds;
  for (std::string_view field : detail::split_csv(c.compare)) kinds.push_back(parse_policy_kind(field));
  return kinds;
}

inline void add_run_options(CLI::App& app, RunConfig& c) {
  app.set_config("--config", "", "INI/TOML file with option values; flags override it");
  app.add_option("--trace", c.trace, "invocation trace CSV (timestamp_ms,function_id)");
  app.add_option("--ci", c.ci, "carbon intensity CSV (minute,g_co2_per_kwh)");
  app.add_option("--profiles", c.profiles, "function profile catalog JSON");
  app.add_option("--hw-old", c.hw_old, "older hardware profile JSON");
  app.add_option("--hw-new", c.hw_new, "newer hardware profile JSON");
  app.add_option("--function-stats", c.function_stats,
                 "CSV function_id,mem_mib,mean_exec_s used to map trace ids without a profile");
  app.add_option("--scenario", c.scenario, "use a generated scenario (poisson-small, ci-step, memory-pressure)");
  app.add_option("--scheduler", c.scheduler, "policy to run")->capture_default_str();
  app.add_option("--compare", c.compare, "comma-separated policies, or 'all', run on the same inputs");
  app.add_option("--lambda-s", c.lambda_s, "service-time weight")->capture_default_str();
  app.add_option("--lambda-c", c.lambda_c, "carbon weight")->capture_default_str();
  app.add_option("--kat", c.kat, "keep-alive grid in seconds")->capture_default_str();
  app.add_option("--mem-old", c.mem_old, "old warm pool capacity (MiB)");
  app.add_option("--mem-new", c.mem_new, "new warm pool capacity (MiB)");
  app.add_option("--particles", c.particles, "PSO particles per function")->capture_default_str();
  app.add_option("--iters", c.iters, "PSO steps per invocation")->capture_default_str();
  app.add_option("--window", c.window, "inter-arrival gaps in the expectation")->capture_default_str();
  app.add_option("--seed", c.seed, "run seed (also seeds generated scenarios)")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_flag("--no-pool-adjust", c.no_pool_adjust, "drop keep-alives that do not fit instead of adjusting");
  app.add_flag("--no-perception", c.no_perception, "disable perception-response redistribution");
  app.add_flag("--no-dynamic-weights", c.no_dynamic_weights, "keep PSO coefficients at their initial values");
}

// Throws config_error on anything a run could not proceed with.
inline void validate(const RunConfig& c) {
  if (c.scenario.empty()) {
    const std::pair<const char*, const std::string*> required[] = {
        {"--trace", &c.trace}, {"--ci", &c.ci}, {"--profiles", &c.profiles},
        {"--hw-old", &c.hw_old}, {"--hw-new", &c.hw_new}};
    for (const auto& [flag, value] : required) {
      if (value->empty()) throw config_error(std::string(flag) + " is required without --scenario");
      if (!std::filesystem::exists(*value)) throw config_error(std::string(flag) + ": no such file '" + *value + "'");
    }
    if (!c.function_stats.empty() && !std::filesystem::exists(c.function_stats)) {
      throw config_error("--function-stats: no such file '" + c.function_stats + "'");
    }
  } else {
    parse_scenario_kind(c.scenario);
  }
  selected_policies(c);
  ObjectiveWeights{c.lambda_s, c.lambda_c}.validate();
  dpso::SearchSpace space;
  try {
    space.kat = parse_kat(c.kat);
  } catch (const parse_error& e) {
    throw config_error(std::string("--kat: ") + e.what());
  }
  space.validate();
  for (const auto& [flag, v] : {std::pair{"--mem-old", c.mem_old}, std::pair{"--mem-new", c.mem_new}}) {
    if (v && !(*v >= 0.0)) throw config_error(std::string(flag) + " must be >= 0");
  }
  if (c.particles == 0) throw config_error("--particles must be >= 1");
  if (c.window == 0) throw config_error("--window must be >= 1");
}

struct ParsedArgs {
  RunConfig config;
  bool help = false;
  std::string help_text;
};

// Options only, no subcommand. Throws config_error for unknown flags, bad
// values, and failed validation.
inline ParsedArgs parse_config(const std::vector<std::string>& args) {
  CLI::App app{"ecolife run"};
  ParsedArgs parsed;
  add_run_options(app, parsed.config);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    parsed.help = true;
    parsed.help_text = app.help();
    return parsed;
  } catch (const CLI::ParseError& e) {
    throw config_error(e.what());
  }
  validate(parsed.config);
  return parsed;
}

// Everything one run reads.
struct RunInputs {
  InvocationTrace trace;
  CarbonIntensitySeries ci;
  ProfileMap profiles;
  HardwarePair hw;
  double mem_old_mib = 16 * 1024.0;
  double mem_new_mib = 16 * 1024.0;
};

inline std::vector<TraceFunctionStats> load_function_stats(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<TraceFunctionStats> stats;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim_cr(raw);
    if (line_no == 1) {
      if (line != "function_id,mem_mib,mean_exec_s") {
        throw parse_error("expected header 'function_id,mem_mib,mean_exec_s'", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 3) throw parse_error("expected 3 columns", line_no);
    stats.push_back({std::string(f[0]), detail::parse_number<double>(f[1], line_no, "mem_mib"),
                     detail::parse_number<double>(f[2], line_no, "mean_exec_s")});
  }
  return stats;
}

inline RunInputs load_inputs(const RunConfig& c) {
  RunInputs in;
  if (!c.scenario.empty()) {
    Scenario s = generate_scenario(parse_scenario_kind(c.scenario), c.seed);
    in.trace = std::move(s.trace);
    in.ci = std::move(s.ci);
    in.profiles = profiles_by_id(s.profiles);
    in.hw = std::move(s.hw);
    in.mem_old_mib = s.mem_old_mib;
    in.mem_new_mib = s.mem_new_mib;
  } else {
    in.trace = load_trace(c.trace);
    in.ci = load_ci(c.ci);
    const ProfileCatalog catalog = load_catalog(c.profiles);
    in.profiles = profiles_by_id(catalog);
    if (!c.function_stats.empty()) {
      for (const auto& st : load_function_stats(c.function_stats)) {
        if (in.profiles.contains(st.function_id)) continue;
        FunctionProfile mapped = match_profile(st, catalog);
        mapped.id = st.function_id;
        in.profiles.emplace(st.function_id, std::move(mapped));
      }
    }
    in.hw = HardwarePair{load_hardware(c.hw_old), load_hardware(c.hw_new)};
  }
  if (c.mem_old) in.mem_old_mib = *c.mem_old;
  if (c.mem_new) in.mem_new_mib = *c.mem_new;
  return in;
}

inline PolicyOptions policy_options(const RunConfig& c) {
  PolicyOptions opt;
  SchedulerConfig& s = opt.scheduler;
  s.weights = {c.lambda_s, c.lambda_c};
  s.space.kat = parse_kat(c.kat);
  s.particles = c.particles;
  s.iterations = c.iters;
  s.window = c.window;
  s.seed = c.seed;
  s.perception_response = !c.no_perception;
  s.dynamic_weights = !c.no_dynamic_weights;
  opt.warm_pool_adjustment = !c.no_pool_adjust;
  return opt;
}

inline EngineConfig engine_config(const RunConfig& c, const RunInputs& in) {
  EngineConfig e;
  e.mem_old_mib = in.mem_old_mib;
  e.mem_new_mib = in.mem_new_mib;
  e.weights = {c.lambda_s, c.lambda_c};
  e.space.kat = parse_kat(c.kat);
  return e;
}

// Runs every selected policy on the same inputs; writes one report per
// policy and a comparison table when more than one ran.
inline std::vector<RunResult> run_all(const RunConfig& c, const RunInputs& in) {
  const PolicyOptions opt = policy_options(c);
  const EngineConfig engine = engine_config(c, in);
  std::vector<RunResult> results;
  for (PolicyKind kind : selected_policies(c)) {
    auto policy = make_policy(kind, opt, in.hw);
    results.push_back(run(in.trace, *policy, in.profiles, in.hw, in.ci, engine));
  }
  return results;
}

inline void write_outputs(const std::vector<RunResult>& results, const std::filesystem::path& outdir) {
  std::vector<RunSummary> rows;
  for (const auto& r : results) {
    emit_report(r, outdir);
    rows.push_back(r.summary);
  }
  if (rows.size() > 1) emit_comparison(rows, outdir);
}

// Writes a generated scenario as loadable input files.
inline void write_scenario(const Scenario& s, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  {
    auto out = detail::open_output(outdir / "trace.csv");
    write_trace(out, s.trace);
  }
  {
    auto out = detail::open_output(outdir / "ci.csv");
    write_ci(out, s.ci);
  }
  {
    auto out = detail::open_output(outdir / "profiles.json");
    out << to_json(s.profiles).dump(2) << '\n';
  }
  {
    auto out = detail::open_output(outdir / "hw_old.json");
    out << to_json(s.hw.old_hw).dump(2) << '\n';
  }
  {
    auto out = detail::open_output(outdir / "hw_new.json");
    out << to_json(s.hw.new_hw).dump(2) << '\n';
  }
  {
    auto out = detail::open_output(outdir / "pools.ini");
    out << "mem-old=" << format_double(s.mem_old_mib) << "\nmem-new=" << format_double(s.mem_new_mib) << '\n';
  }
}

}  // namespace ecolife
