#pragma once

// Bathymetry-weighted integrals, norms, Lie derivatives and the momentum
// operator M that maps the mean velocity u to the momentum velocity v.

#include <vector>

#include "lakesim/torus_grid.hpp"

namespace lakesim {

enum class BathymetryFamily { constant, single_harmonic, double_harmonic };

/// amplitude * cos(2 pi (k1 x1 + k2 x2) + phase)
struct Harmonic {
  double amplitude = 0.0;
  int k1 = 1;
  int k2 = 0;
  double phase = 0.0;
};

struct BathymetryParams {
  BathymetryFamily family = BathymetryFamily::constant;
  double mean = 1.0;
  Harmonic first;
  Harmonic second;
  double delta = 0.0;
  /// Smallest admissible b_min.
  double floor = 0.05;
};

class Bathymetry {
 public:
  /// Validates b >= floor > 0 pointwise; throws ErrorCode::invalid_argument.
  Bathymetry(ScalarField b, double delta, double floor = 0.05);

  static Bathymetry from_params(GridSpec grid, const BathymetryParams& params);
  static Bathymetry constant(GridSpec grid, double value = 1.0, double delta = 0.0);

  const GridSpec& grid() const noexcept { return b_.grid(); }
  const ScalarField& b() const noexcept { return b_; }
  const ScalarField& inverse() const noexcept { return inv_b_; }
  const VectorField& grad() const noexcept { return grad_b_; }
  double b_min() const noexcept { return b_min_; }
  double b_max() const noexcept { return b_max_; }
  double b_mean() const noexcept { return b_mean_; }
  double delta() const noexcept { return delta_; }
  bool is_constant() const noexcept { return b_min_ == b_max_; }

 private:
  ScalarField b_;
  ScalarField inv_b_;
  VectorField grad_b_;
  double b_min_;
  double b_max_;
  double b_mean_;
  double delta_;
};

/// Sobolev index k >= 2 of the solution space.
class SobolevIndex {
 public:
  explicit SobolevIndex(int k);
  int value() const noexcept { return k_; }

 private:
  int k_;
};

/// <f, g>_b = integral of f g b over the torus (grid mean, unit area).
double weighted_inner(const ScalarField& f, const ScalarField& g, const Bathymetry& bath);
double weighted_inner(const VectorField& f, const VectorField& g, const Bathymetry& bath);

/// (integral |f|^p b)^(1/p); p = infinity gives the unweighted grid maximum.
double weighted_lp_norm(const ScalarField& f, double p, const Bathymetry& bath);

/// sqrt(sum over |alpha| <= order of ||D^alpha f||_{b,2}^2)
double weighted_sobolev_norm(const ScalarField& f, int order, const Bathymetry& bath);
double weighted_sobolev_norm(const VectorField& u, int order, const Bathymetry& bath);

/// max over |alpha| <= order of the grid maximum of |D^alpha f|; for vector
/// fields the maximum runs over both components.
double sup_sobolev_norm(const ScalarField& f, int order);
double sup_sobolev_norm(const VectorField& u, int order);

/// Dealiased xi . grad f.
ScalarField lie_derivative(const VectorField& xi, const ScalarField& f);
/// lie_derivative(xi, lie_derivative(xi, f))
ScalarField lie_derivative_squared(const VectorField& xi, const ScalarField& f);

/// Lie derivative with a precomputed gradient of f (saves transforms when one
/// f is transported by several fields).
ScalarField lie_derivative(const VectorField& xi, const VectorField& grad_f);

/// b^-1 perp_gradient(psi); weighted-divergence free by construction.
VectorField weighted_perp_gradient(const ScalarField& psi, const Bathymetry& bath);

/// M u = u + delta^2 b^-1 [ -1/3 grad(b^3 div u) - 1/2 grad(b^2 u.grad b)
///                          + 1/2 b^2 (div u) grad b + b (u.grad b) grad b ]
/// Products are collocated (pointwise); see the README note on the elliptic
/// operator for why they are not truncated.
VectorField apply_M(const VectorField& u, const Bathymetry& bath);

/// Grid maximum of |div(b u)|.
double weighted_div_residual(const VectorField& u, const Bathymetry& bath);

/// Weighted mean <1, f>_b / <1, 1>_b.
double weighted_mean(const ScalarField& f, const Bathymetry& bath);

}  // namespace lakesim
