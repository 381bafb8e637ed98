#pragma once

#include <array>
#include <string>
#include <string_view>

#include "ecolife/errors.hpp"

namespace ecolife {

// Hardware generation of a server in a multi-generation pair.
enum class Generation { old_gen = 0, new_gen = 1 };

inline constexpr std::array<Generation, 2> kAllGenerations{Generation::old_gen, Generation::new_gen};

inline constexpr std::size_t index_of(Generation g) { return static_cast<std::size_t>(g); }

inline constexpr Generation other(Generation g) {
  return g == Generation::old_gen ? Generation::new_gen : Generation::old_gen;
}

inline std::string_view to_string(Generation g) { return g == Generation::old_gen ? "old" : "new"; }

inline Generation parse_generation(std::string_view s) {
  if (s == "old") return Generation::old_gen;
  if (s == "new") return Generation::new_gen;
  throw parse_error("unknown hardware generation '" + std::string(s) + "'");
}

// Values indexed by generation, e.g. one pool or one hardware profile per generation.
template <typename T>
struct PerGeneration {
  std::array<T, 2> values{};

  T& operator[](Generation g) { return values[index_of(g)]; }
  const T& operator[](Generation g) const { return values[index_of(g)]; }
};

}  // namespace ecolife
