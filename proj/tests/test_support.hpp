#pragma once

#include <cmath>
#include <numbers>

#include "lakesim/counter_rng.hpp"
#include "lakesim/torus_grid.hpp"
#include "lakesim/weighted_calculus.hpp"

namespace lakesim::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Independent standard normal per (seed, index).
inline double counter_noise(std::uint64_t seed, std::size_t index) {
  return counter_normal(seed, index, 900);
}

inline double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

inline double max_diff(const VectorField& a, const VectorField& b) { return (a - b).max_abs(); }

inline ScalarField sin_x1(GridSpec g, int k = 1) {
  return ScalarField::sample(g, [k](double x, double) { return std::sin(kTwoPi * k * x); });
}

inline ScalarField cos_x1(GridSpec g, int k = 1) {
  return ScalarField::sample(g, [k](double x, double) { return std::cos(kTwoPi * k * x); });
}

inline ScalarField sin_x2(GridSpec g, int k = 1) {
  return ScalarField::sample(g, [k](double, double y) { return std::sin(kTwoPi * k * y); });
}

/// b = 1 + amp cos(2 pi x1) (or sin when `sine`).
inline Bathymetry harmonic_bath(GridSpec g, double amp, double delta, bool sine = false) {
  auto b = ScalarField::sample(g, [&](double x, double) {
    return 1.0 + amp * (sine ? std::sin(kTwoPi * x) : std::cos(kTwoPi * x));
  });
  return Bathymetry(std::move(b), delta);
}

}  // namespace lakesim::testing
