#pragma once

// Dense-matrix reference implementations used to cross-check the spectral
// code. Differentiation matrices come from the closed-form periodic
// cardinal-function formulas, never from an FFT, so agreement with the fast
// path is an independent check. Sizes are limited to n <= 32.

#include <Eigen/Dense>

#include "lakesim/salt_noise.hpp"
#include "lakesim/stream_solver.hpp"

namespace lakesim::oracle {

inline constexpr std::size_t kMaxDenseN = 32;

Eigen::VectorXd to_vector(const ScalarField& f);
ScalarField from_vector(GridSpec grid, const Eigen::VectorXd& v);

/// Unit-period first derivative: pi (-1)^(j-l) cot(pi (j-l) / n) off the diagonal.
Eigen::MatrixXd first_derivative_1d(std::size_t n);
/// Unit-period second derivative from the csc^2 formula.
Eigen::MatrixXd second_derivative_1d(std::size_t n);
/// Odd orders are D1 D2^((d-1)/2), even orders D2^(d/2).
Eigen::MatrixXd derivative_1d(std::size_t n, int order);
/// Real projection keeping |k| <= n/3 along one axis.
Eigen::MatrixXd dealias_1d(std::size_t n);

/// A (x) B for the row-major layout index i*n + j (first factor acts on i).
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd derivative_2d(std::size_t n, MultiIndex alpha);
Eigen::MatrixXd dealias_2d(std::size_t n);

/// b^-1 curl M b^-1 perp assembled from the literal four-term M formula.
Eigen::MatrixXd elliptic_explicit(const Bathymetry& bath);
/// Columns obtained by applying the fast operator to each grid unit vector.
Eigen::MatrixXd elliptic_by_columns(const EllipticOperator& op);

struct DenseSolution {
  ScalarField psi;
  VectorField u;
};

/// Dense LU solve on the b-orthogonal complement of the nullspace.
DenseSolution dense_oracle_solve(const Bathymetry& bath, const ScalarField& omega);

double sobolev_norm(const ScalarField& f, int order, const Bathymetry& bath);
ScalarField lie_derivative(const VectorField& xi, const ScalarField& f);
ScalarField ito_correction(const NoiseBasis& basis, const ScalarField& omega);

}  // namespace lakesim::oracle
