#pragma once

// Uniform periodic grid on the unit torus and the spectral calculus built on it.
//
// Fields live in physical space: point (i, j) of an n x n grid sits at
// (i/n, j/n) and is stored row-major at index i*n + j, so the first axis is
// x1 and the second x2. Mode index j carries the wavenumber 2*pi*k(j) with
// k(j) in {-n/2, ..., n/2 - 1}.

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lakesim/error.hpp"

namespace lakesim {

class GridSpec {
 public:
  /// Throws ErrorCode::invalid_argument unless n >= 8 is a power of two.
  explicit GridSpec(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t points() const noexcept { return n_ * n_; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }
  double coordinate(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(n_);
  }
  /// Signed integer wavenumber of mode index j.
  int wavenumber(std::size_t j) const noexcept {
    const auto half = n_ / 2;
    return j < half ? static_cast<int>(j) : static_cast<int>(j) - static_cast<int>(n_);
  }
  /// Largest |k| kept by the 2/3 rule.
  int dealias_cutoff() const noexcept { return static_cast<int>(n_ / 3); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept { return a.n_ == b.n_; }

 private:
  std::size_t n_;
};

class ScalarField {
 public:
  explicit ScalarField(GridSpec grid, double value = 0.0);
  ScalarField(GridSpec grid, std::vector<double> values);

  /// Samples f(x1, x2) at every grid point.
  template <class F>
  static ScalarField sample(GridSpec grid, F&& f) {
    ScalarField out(grid);
    const auto n = grid.n();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.values_[i * n + j] = f(grid.coordinate(i), grid.coordinate(j));
      }
    }
    return out;
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.n() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * grid_.n() + j]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s) noexcept;
  /// this += s * other
  ScalarField& add_scaled(double s, const ScalarField& other);

  double max_abs() const noexcept;
  double mean() const noexcept;
  bool all_finite() const noexcept;

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Throws ErrorCode::grid_mismatch when the two grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b);

struct VectorField {
  VectorField(ScalarField x_component, ScalarField y_component);
  explicit VectorField(GridSpec grid) : x(grid), y(grid) {}

  const GridSpec& grid() const noexcept { return x.grid(); }
  double max_abs() const noexcept;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s) noexcept;

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

  ScalarField x;
  ScalarField y;
};

struct MultiIndex {
  int d1 = 0;
  int d2 = 0;
  int order() const noexcept { return d1 + d2; }
};

/// All multi-indices with |alpha| <= order, ordered by total order.
std::vector<MultiIndex> multi_indices_up_to(int order);

/// Fourier coefficients of a real field in half-complex layout: rows follow
/// k1 (mode index of the first axis), columns carry k2 = 0 .. n/2. Normalized
/// so that the constant field 1 has coefficient 1 at mode (0, 0).
class Spectrum {
 public:
  explicit Spectrum(GridSpec grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t columns() const noexcept { return grid_.n() / 2 + 1; }
  std::span<const std::complex<double>> data() const noexcept { return data_; }
  std::span<std::complex<double>> data() noexcept { return data_; }

  /// Coefficient of mode (k1, k2) for any k in [-n/2, n/2 - 1]^2, using
  /// Hermitian symmetry for the half that is not stored.
  std::complex<double> coefficient(int k1, int k2) const;

  Spectrum derivative(MultiIndex alpha) const;

  /// Multiplies each stored coefficient by symbol(k1, k2).
  template <class F>
  Spectrum& scale_modes(F&& symbol) {
    const auto n = grid_.n();
    const auto cols = columns();
    for (std::size_t r = 0; r < n; ++r) {
      const int k1 = grid_.wavenumber(r);
      for (std::size_t c = 0; c < cols; ++c) {
        const int k2 = c == n / 2 ? -static_cast<int>(n / 2) : static_cast<int>(c);
        data_[r * cols + c] *= symbol(k1, k2);
      }
    }
    return *this;
  }

 private:
  GridSpec grid_;
  std::vector<std::complex<double>> data_;
};

/// Derivative symbol (i 2 pi k)^order for one axis. Odd orders vanish on the
/// Nyquist mode k = -n/2 so derivatives of real fields stay real.
std::complex<double> derivative_symbol(int k, int order, std::size_t n);

/// Throws ErrorCode::non_finite on NaN/Inf input.
Spectrum forward(const ScalarField& f);
ScalarField inverse(const Spectrum& s);

ScalarField derivative(const ScalarField& f, MultiIndex alpha);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
/// (d2 psi, -d1 psi)
VectorField perp_gradient(const ScalarField& psi);
/// d1 v2 - d2 v1
ScalarField curl(const VectorField& v);

/// exp(nu * t * Laplacian) applied exactly in Fourier space.
ScalarField heat_semigroup(const ScalarField& f, double nu, double t);
Spectrum& apply_heat_semigroup(Spectrum& s, double nu, double t);

/// Zeroes every mode with max(|k1|, |k2|) > n/3.
/// Trigonometric interpolant of f sampled on the grid with factor*n points per
/// side; Nyquist modes are dropped.
ScalarField refine(const ScalarField& f, std::size_t factor);

/// Value of the trigonometric interpolant of f at an arbitrary point, with its
/// gradient and Hessian; Nyquist modes are dropped.
struct PointJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d11 = 0.0;
  double d12 = 0.0;
  double d22 = 0.0;
};
PointJet evaluate_interpolant(const Spectrum& s, double x1, double x2);

/// max |f| over the torus for the trigonometric interpolant of f: the best
/// point of a 4x refined sample is polished by Newton steps on the gradient.
double interpolant_sup_norm(const ScalarField& f);

ScalarField dealias(const ScalarField& f);
Spectrum& dealias_in_place(Spectrum& s);

ScalarField multiply(const ScalarField& a, const ScalarField& b);
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

}  // namespace lakesim
