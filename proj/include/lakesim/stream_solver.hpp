#pragma once

// Vorticity-to-velocity map u = K omega. The stream function solves
//
//   b^-1 curl( M( b^-1 perp_gradient(psi) ) ) = omega
//
// by preconditioned conjugate gradients, and u = b^-1 perp_gradient(psi).
//
// On the grid the operator annihilates the constant and the three Nyquist
// checkerboard modes (first-derivative symbols vanish there). psi is fixed to
// be b-orthogonal to that space; omega must have zero weighted mean.

#include <array>
#include <cstdint>
#include <optional>

#include "lakesim/weighted_calculus.hpp"

namespace lakesim {

struct SolverReport {
  int iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

struct SolverOptions {
  double tolerance = 1e-10;
  /// 0 selects the default of 10 n.
  int max_iterations = 0;
};

struct StreamSolution {
  ScalarField psi;
  SolverReport report;
};

class EllipticOperator {
 public:
  explicit EllipticOperator(Bathymetry bath);

  const Bathymetry& bathymetry() const noexcept { return bath_; }
  const GridSpec& grid() const noexcept { return bath_.grid(); }

  /// b^-1 curl(M(b^-1 perp_gradient(psi))).
  ScalarField apply(const ScalarField& psi) const;

  /// a(psi, phi) = <b^-1 perp psi, M(b^-1 perp phi)>_b
  double bilinear(const ScalarField& psi, const ScalarField& phi) const;

  /// Removes the b-orthogonal projection onto the discrete nullspace.
  ScalarField project(const ScalarField& f) const;

  /// Throws ErrorCode::compatibility when |<1, omega>_b| exceeds
  /// 1e-8 max(1, ||omega||_{b,2}); throws ErrorCode::not_converged when CG
  /// stalls. `initial_guess` warm-starts the iteration.
  StreamSolution solve(const ScalarField& omega, const SolverOptions& options = {},
                       const ScalarField* initial_guess = nullptr) const;

 private:
  // b-orthonormal basis of the nullspace (constant + Nyquist checkerboards).
  Bathymetry bath_;
  std::array<ScalarField, 4> null_basis_;
};

StreamSolution solve_stream(const EllipticOperator& op, const ScalarField& omega,
                            double tolerance = 1e-10);

VectorField velocity_from_vorticity(const EllipticOperator& op, const ScalarField& omega,
                                    double tolerance = 1e-10);

/// Relative closure residual ||b^-1 curl(M u) - omega||_{b,2} / ||omega||_{b,2}.
double closure_residual(const EllipticOperator& op, const VectorField& u, const ScalarField& omega);

/// Velocity by the classical FFT Biot-Savart law for b = 1, delta = 0.
VectorField biot_savart_fft(const ScalarField& omega);

/// Random smooth field: sum over 1 <= |k|_inf <= max_mode of Gaussian
/// coefficients damped by |k|^-decay, sampled analytically so the same seed
/// gives the same continuous field on every grid.
ScalarField random_band_limited(GridSpec grid, int max_mode, std::uint64_t seed,
                                double decay = 1.0);

/// Random vorticity compatible with the solver (zero weighted mean).
ScalarField random_compatible_vorticity(const Bathymetry& bath, int max_mode, std::uint64_t seed);

/// max over samples of ||K omega||_{b,k,2} / ||omega||_{b,k-1,2}.
double regularity_probe(const EllipticOperator& op, int k, int num_samples,
                        std::uint64_t seed = 17);

/// min over samples of a(psi, psi) / ||psi||_{b,1,2}^2 for zero-mean psi.
double coercivity_probe(const EllipticOperator& op, int num_samples, std::uint64_t seed = 23);

}  // namespace lakesim
