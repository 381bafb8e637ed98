// ecolife run ...       replay a trace (or generated scenario) against one or more policies
// ecolife generate ...  write a generated scenario's input files

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ecolife/config.hpp"

namespace {

void setup_logging() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ECOLIFE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ECOLIFE_LOG='{}' is not a level; using warn", env);
    }
  }
}

int do_run(const ecolife::RunConfig& cfg) {
  ecolife::validate(cfg);
  const ecolife::RunInputs inputs = ecolife::load_inputs(cfg);
  spdlog::info("{} invocations, {} profiles, pools old={} MiB new={} MiB", inputs.trace.size(),
               inputs.profiles.size(), inputs.mem_old_mib, inputs.mem_new_mib);
  const auto results = ecolife::run_all(cfg, inputs);
  ecolife::write_outputs(results, cfg.out);
  for (const auto& r : results) {
    const auto& s = r.summary;
    spdlog::info("{}: service {:.3f} s, carbon {:.4f} g, objective {:.4f}, cold {}, evictions {}", s.policy,
                 s.total_service_time_s, s.total_carbon_g, s.total_objective, s.cold_starts, s.evictions);
    spdlog::debug("{}: decision overhead mean {:.1f} us, max {:.1f} us", s.policy, r.overhead.mean_us,
                  r.overhead.max_us);
  }
  std::cout << "wrote " << results.size() << " report(s) to " << cfg.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Carbon-aware keep-alive scheduling simulator"};
  app.require_subcommand(1);

  ecolife::RunConfig run_cfg;
  CLI::App* run_cmd = app.add_subcommand("run", "replay a trace against scheduling policies");
  ecolife::add_run_options(*run_cmd, run_cfg);

  std::string scenario = "poisson-small";
  std::uint64_t seed = 1;
  std::string outdir = "scenario";
  CLI::App* gen_cmd = app.add_subcommand("generate", "write a generated scenario's input files");
  gen_cmd->add_option("--scenario", scenario, "poisson-small, ci-step, or memory-pressure")->capture_default_str();
  gen_cmd->add_option("--seed", seed, "scenario seed")->capture_default_str();
  gen_cmd->add_option("--out", outdir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*gen_cmd) {
      const auto s = ecolife::generate_scenario(ecolife::parse_scenario_kind(scenario), seed);
      ecolife::write_scenario(s, outdir);
      std::cout << "wrote " << s.name << " (" << s.trace.size() << " invocations) to " << outdir << '\n';
      return 0;
    }
    return do_run(run_cfg);
  } catch (const ecolife::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ecolife::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    // parse, profile, capacity, and size errors: bad input
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
