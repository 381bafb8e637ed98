#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ecolife/ecolife.hpp"

namespace fixture {

// 512 MiB function on the sample hardware pair: 2 s / 3 s cold on new,
// 2.4 s / 3.3 s cold on old.
inline ecolife::FunctionProfile sample_function(const std::string& id = "fn") {
  ecolife::FunctionProfile f;
  f.id = id;
  f.mem_mib = 512;
  f.timing[ecolife::Generation::new_gen] = ecolife::HardwareTiming{2.0, 3.0, 140.0, 30.0, {}, {}};
  f.timing[ecolife::Generation::old_gen] = ecolife::HardwareTiming{2.4, 3.3, 168.0, 45.0, {}, {}};
  return f;
}

inline ecolife::CarbonIntensitySeries constant_ci(double value, std::size_t minutes = 1) {
  ecolife::CarbonIntensitySeries ci;
  ci.values.assign(minutes, value);
  return ci;
}

inline std::filesystem::path tmp_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(ECOLIFE_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void expect_rel(double actual, double expected, double rel = 1e-9) {
  EXPECT_NEAR(actual, expected, rel * std::max(std::abs(actual), std::abs(expected))) << "expected " << expected;
}

}  // namespace fixture
