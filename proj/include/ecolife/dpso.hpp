#pragma once

// Dynamic particle swarm optimization over the two-dimensional
// (keep-alive location x keep-alive time) grid of one function.
//
// Particles move in the continuous box [0, |L|-1] x [0, |KAT|-1]; fitness is
// evaluated at the nearest grid cell. Coefficients follow the observed change
// in the function's inter-arrival time and the grid carbon intensity, and a
// perceived change re-places the worse half of the swarm.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ecolife/errors.hpp"
#include "ecolife/generation.hpp"

namespace ecolife::dpso {

using Position = std::array<double, 2>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SearchSpace {
  std::vector<Generation> locations{Generation::old_gen, Generation::new_gen};
  std::vector<double> kat{0.0, 60.0, 120.0, 300.0, 600.0};  // seconds, ascending, starts at 0

  void validate() const {
    if (locations.empty()) throw config_error("search space needs at least one location");
    for (std::size_t i = 0; i < locations.size(); ++i) {
      for (std::size_t j = i + 1; j < locations.size(); ++j) {
        if (locations[i] == locations[j]) throw config_error("duplicate location in search space");
      }
    }
    if (kat.empty() || kat.front() != 0.0) throw config_error("keep-alive grid must start at 0");
    for (std::size_t i = 1; i < kat.size(); ++i) {
      if (!(kat[i] > kat[i - 1])) throw config_error("keep-alive grid must be strictly ascending");
    }
  }

  Position upper() const {
    return {static_cast<double>(locations.size() - 1), static_cast<double>(kat.size() - 1)};
  }

  std::size_t cells() const { return locations.size() * kat.size(); }

  bool contains(Generation g) const { return std::find(locations.begin(), locations.end(), g) != locations.end(); }
};

// One cell of the discrete search space.
struct GridCell {
  std::size_t location_index = 0;
  std::size_t kat_index = 0;
  Generation location = Generation::old_gen;
  double keepalive_s = 0.0;

  bool operator==(const GridCell&) const = default;
};

// Nearest grid index per axis; exact halves round down.
inline std::size_t nearest_index(double x, std::size_t count) {
  const double r = std::ceil(x - 0.5);
  if (!(r > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(r), count - 1);
}

inline GridCell discretize(const Position& x, const SearchSpace& space) {
  GridCell c;
  c.location_index = nearest_index(x[0], space.locations.size());
  c.kat_index = nearest_index(x[1], space.kat.size());
  c.location = space.locations[c.location_index];
  c.keepalive_s = space.kat[c.kat_index];
  return c;
}

struct WeightBounds {
  double w_min = 0.5;
  double w_max = 1.0;
  double c_min = 0.3;
  double c_max = 1.0;

  void validate() const {
    if (!(0.0 <= w_min && w_min <= w_max)) throw config_error("need 0 <= w_min <= w_max");
    if (!(0.0 <= c_min && c_min <= c_max)) throw config_error("need 0 <= c_min <= c_max");
  }
};

struct Coefficients {
  double w = 0.5;
  double c1 = 1.0;
  double c2 = 1.0;
};

struct Particle {
  Position x{};
  Position v{};
  Position pbest_x{};
  double pbest_fit = kInf;
};

struct Swarm {
  std::vector<Particle> particles;
  Position gbest_x{};
  double gbest_fit = kInf;
  std::size_t gbest_index = 0;  // particle whose pbest is gbest
  Coefficients coeff;
  WeightBounds bounds;
  Position upper{};
  std::mt19937_64 rng;

  // U[0, 1) from the top 53 bits, identical on every platform.
  double uniform01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  Position random_position() {
    const double a = uniform01() * upper[0];
    const double b = uniform01() * upper[1];
    return {a, b};
  }
};

// Change signals for one function since its previous invocation.
struct EnvironmentDelta {
  double delta_f = 0.0;       // |inter-arrival change|, seconds
  double delta_f_max = 0.0;   // running maximum
  double delta_ci = 0.0;      // |CI change|, gCO2/kWh
  double delta_ci_max = 0.0;  // running maximum

  bool changed() const { return delta_f > 0.0 || delta_ci > 0.0; }
};

// Per-function running state behind EnvironmentDelta. The first
// re-invocation reports its whole inter-arrival time as the change.
class EnvironmentTracker {
 public:
  // `gap_s` is empty on the function's first invocation.
  EnvironmentDelta observe(std::optional<double> gap_s, double ci) {
    EnvironmentDelta d;
    if (gap_s) {
      d.delta_f = prev_gap_ ? std::abs(*gap_s - *prev_gap_) : *gap_s;
      prev_gap_ = gap_s;
    }
    if (prev_ci_) d.delta_ci = std::abs(ci - *prev_ci_);
    prev_ci_ = ci;
    f_max_ = std::max(f_max_, d.delta_f);
    ci_max_ = std::max(ci_max_, d.delta_ci);
    d.delta_f_max = f_max_;
    d.delta_ci_max = ci_max_;
    return d;
  }

 private:
  std::optional<double> prev_gap_;
  std::optional<double> prev_ci_;
  double f_max_ = 0.0;
  double ci_max_ = 0.0;
};

inline Swarm init_swarm(const SearchSpace& space, std::size_t n, std::uint64_t seed, const WeightBounds& bounds = {}) {
  if (n == 0) throw domain_error("swarm needs at least one particle");
  space.validate();
  bounds.validate();
  Swarm s;
  s.rng.seed(seed);
  s.bounds = bounds;
  s.coeff = {bounds.w_min, bounds.c_max, bounds.c_max};
  s.upper = space.upper();
  s.particles.resize(n);
  for (auto& p : s.particles) {
    p.x = s.random_position();
    p.pbest_x = p.x;
  }
  s.gbest_x = s.particles.front().x;
  s.gbest_index = 0;
  return s;
}

namespace detail {

inline double ratio(double delta, double max) { return max > 0.0 ? delta / max : 0.0; }

}  // namespace detail

inline Coefficients update_weights(Swarm& swarm, const EnvironmentDelta& env) {
  const double change = detail::ratio(env.delta_f, env.delta_f_max) + detail::ratio(env.delta_ci, env.delta_ci_max);
  const WeightBounds& b = swarm.bounds;
  const double w = std::clamp(b.w_max * change, b.w_min, b.w_max);
  const double c = std::clamp(b.c_max * (1.0 - change), b.c_min, b.c_max);
  swarm.coeff = {w, c, c};
  return swarm.coeff;
}

// On a perceived change, re-places ceil(N/2) particles (worst pbest first,
// higher index first among equals) uniformly in the box with zero velocity and
// forgotten pbest. The gbest holder is never re-placed when N >= 2, and the
// swarm's gbest is kept. Returns whether anything moved.
inline bool perceive_and_redistribute(Swarm& swarm, const EnvironmentDelta& env) {
  if (!env.changed()) return false;
  const std::size_t n = swarm.particles.size();
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (n == 1 || i != swarm.gbest_index) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = swarm.particles[a].pbest_fit;
    const double fb = swarm.particles[b].pbest_fit;
    if (fa != fb) return fa > fb;
    return a > b;
  });
  const std::size_t moved = (n + 1) / 2;
  for (std::size_t k = 0; k < moved; ++k) {
    Particle& p = swarm.particles[order[k]];
    p.x = swarm.random_position();
    p.v = {0.0, 0.0};
    p.pbest_x = p.x;
    p.pbest_fit = kInf;
  }
  return true;
}

namespace detail {

inline void clamp_into(Position& x, const Position& upper) {
  for (std::size_t d = 0; d < 2; ++d) x[d] = std::clamp(x[d], 0.0, upper[d]);
}

}  // namespace detail

// One synchronous-draw, asynchronous-best PSO iteration. `fitness` maps a
// GridCell to a score (lower is better); `draw` yields U(0,1) samples.
template <typename Fitness, typename Draw>
void step(Swarm& swarm, const SearchSpace& space, Fitness&& fitness, Draw&& draw) {
  const Coefficients c = swarm.coeff;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    for (std::size_t d = 0; d < 2; ++d) {
      const double r1 = draw();
      const double r2 = draw();
      p.v[d] = c.w * p.v[d] + c.c1 * r1 * (p.pbest_x[d] - p.x[d]) + c.c2 * r2 * (swarm.gbest_x[d] - p.x[d]);
      p.x[d] += p.v[d];
    }
    detail::clamp_into(p.x, swarm.upper);
    const double fit = fitness(discretize(p.x, space));
    if (fit < p.pbest_fit) {
      p.pbest_fit = fit;
      p.pbest_x = p.x;
    }
    if (fit < swarm.gbest_fit) {
      swarm.gbest_fit = fit;
      swarm.gbest_x = p.x;
      swarm.gbest_index = i;
    }
  }
}

template <typename Fitness>
void step(Swarm& swarm, const SearchSpace& space, Fitness&& fitness) {
  step(swarm, space, std::forward<Fitness>(fitness), [&swarm] { return swarm.uniform01(); });
}

// Re-scores every remembered position under the current fitness. The fitness
// moves with each new gap and CI sample, so old scores are not comparable.
template <typename Fitness>
void refresh_memory(Swarm& swarm, const SearchSpace& space, Fitness&& fitness) {
  const double old_best = swarm.gbest_fit < kInf ? fitness(discretize(swarm.gbest_x, space)) : kInf;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    p.pbest_fit = fitness(discretize(p.pbest_x, space));
    if (!best || p.pbest_fit < swarm.particles[*best].pbest_fit) best = i;
  }
  const Particle& b = swarm.particles[*best];
  if (b.pbest_fit < old_best) {
    swarm.gbest_fit = b.pbest_fit;
    swarm.gbest_x = b.pbest_x;
    swarm.gbest_index = *best;
  } else {
    swarm.gbest_fit = old_best;
  }
}

inline GridCell best_decision(const Swarm& swarm, const SearchSpace& space) {
  return discretize(swarm.gbest_x, space);
}

}  // namespace ecolife::dpso
