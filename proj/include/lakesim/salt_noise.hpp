#pragma once

// Transport noise: the finite family of weighted-divergence-free fields xi_i,
// a reproducible table of Brownian increments, and the two noise kernels
// (transport increment and Ito correction).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lakesim/weighted_calculus.hpp"

namespace lakesim {

/// Real Fourier mode sin/cos(2 pi k.x) used as a stream function for xi.
struct NoiseMode {
  int k1 = 0;
  int k2 = 0;
  bool sine = true;
};

struct NoiseBasis {
  std::vector<VectorField> fields;
  std::vector<double> amplitudes;
  /// Empty for hand-built bases.
  std::vector<NoiseMode> modes;

  std::size_t size() const noexcept { return fields.size(); }
  bool empty() const noexcept { return fields.empty(); }
};

/// Half-plane modes ordered by |k|^2, then k1, then k2; each mode contributes
/// its sine and then its cosine.
std::vector<NoiseMode> noise_mode_order(std::size_t count);

/// xi_i = a_i b^-1 perp_gradient(zeta_i) with a_i = scale |k_i|^-decay.
NoiseBasis build_noise_basis(const Bathymetry& bath, std::size_t m, double decay, double scale);

struct BasisReport {
  std::vector<double> div_residuals;
  /// Measured constants of the summability conditions on probe fields.
  double lie_constant = 0.0;
  double lie_squared_constant = 0.0;
  /// sum_i ||xi_i||_{k+1,inf}^2
  double xi_sup_sum = 0.0;
  bool passed = true;
  std::string failure;
};

inline constexpr double kBasisDivergenceTolerance = 1e-9;

BasisReport validate_basis(const NoiseBasis& basis, const Bathymetry& bath, SobolevIndex k,
                           int probes = 10, std::uint64_t seed = 31);

/// Seeded table of standard-normal increments scaled by sqrt(dt_fine),
/// stored mode-major: entry (i, s) covers [s dt_fine, (s+1) dt_fine].
class BrownianPath {
 public:
  BrownianPath(std::uint64_t seed, std::size_t modes, double dt_fine, double horizon);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t modes() const noexcept { return modes_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt_fine() const noexcept { return dt_fine_; }
  double horizon() const noexcept { return horizon_; }
  std::span<const double> table() const noexcept { return table_; }

  /// Increments over [step_index dt, (step_index + 1) dt]; dt must be an
  /// integer multiple of dt_fine and the window must lie inside the table.
  std::vector<double> increments(std::size_t step_index, double dt) const;

  /// Little-endian file: "LSW1" magic word, m, dt_fine, horizon, seed, then
  /// the float64 table.
  void save(const std::filesystem::path& path) const;
  static BrownianPath load(const std::filesystem::path& path);

  friend bool operator==(const BrownianPath&, const BrownianPath&) = default;

 private:
  BrownianPath() = default;

  std::uint64_t seed_ = 0;
  std::size_t modes_ = 0;
  std::size_t steps_ = 0;
  double dt_fine_ = 0.0;
  double horizon_ = 0.0;
  std::vector<double> table_;
};

/// 1/2 sum_i L_i(L_i omega)
ScalarField ito_correction(const NoiseBasis& basis, const ScalarField& omega);

/// sum_i dW_i L_i omega
ScalarField transport_increment(const NoiseBasis& basis, const ScalarField& omega,
                                std::span<const double> dW);

}  // namespace lakesim
