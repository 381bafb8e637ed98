#pragma once

#include <string>

#include "ecolife/errors.hpp"
#include "ecolife/generation.hpp"

namespace ecolife {

// Relative weight of service time vs. carbon in every score.
struct ObjectiveWeights {
  double lambda_s = 0.5;
  double lambda_c = 0.5;

  void validate() const {
    if (!(lambda_s >= 0.0) || !(lambda_c >= 0.0) || !(lambda_s + lambda_c > 0.0)) {
      throw config_error("objective weights must be >= 0 with a positive sum");
    }
  }
};

// Per-function scale of each objective term.
struct Normalizers {
  double s_max = 1.0;   // s, cold service on the older generation
  double sc_max = 1.0;  // g, largest cold service carbon over the locations
  double kc_max = 1.0;  // g, longest keep-alive on the newer generation
};

// Where and how long a function is kept alive after an invocation.
struct Decision {
  Generation keep_location = Generation::new_gen;
  double keep_duration_s = 0.0;

  bool operator==(const Decision&) const = default;
};

}  // namespace ecolife
