#include "lakesim/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace lakesim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

GridSpec::GridSpec(std::size_t n) : n_(n) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::invalid_argument,
                "n must be a power of two >= 8, got " + std::to_string(n));
  }
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) {
    throw Error(ErrorCode::grid_mismatch, "grid mismatch: n = " + std::to_string(a.n()) +
                                              " vs n = " + std::to_string(b.n()));
  }
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridSpec grid, double value)
    : grid_(grid), values_(grid.points(), value) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points()) {
    throw Error(ErrorCode::invalid_argument, "field has " + std::to_string(values_.size()) +
                                                 " values, grid needs " +
                                                 std::to_string(grid_.points()));
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
  for (auto& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::add_scaled(double s, const ScalarField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(ScalarField x_component, ScalarField y_component)
    : x(std::move(x_component)), y(std::move(y_component)) {
  require_same_grid(x.grid(), y.grid());
}

double VectorField::max_abs() const noexcept { return std::max(x.max_abs(), y.max_abs()); }

VectorField& VectorField::operator+=(const VectorField& other) {
  x += other.x;
  y += other.y;
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  x -= other.x;
  y -= other.y;
  return *this;
}

VectorField& VectorField::operator*=(double s) noexcept {
  x *= s;
  y *= s;
  return *this;
}

std::vector<MultiIndex> multi_indices_up_to(int order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= order; ++total) {
    for (int d1 = total; d1 >= 0; --d1) out.push_back({d1, total - d1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(GridSpec grid) : grid_(grid), data_(grid.n() * (grid.n() / 2 + 1)) {}

std::complex<double> Spectrum::coefficient(int k1, int k2) const {
  const int n = static_cast<int>(grid_.n());
  const int half = n / 2;
  if (k1 < -half || k1 >= half || k2 < -half || k2 >= half) {
    throw Error(ErrorCode::invalid_argument, "mode outside the resolvable range");
  }
  auto row = [n](int k) { return static_cast<std::size_t>((k % n + n) % n); };
  if (k2 >= 0) return data_[row(k1) * columns() + static_cast<std::size_t>(k2)];
  if (k2 == -half) {
    // Stored column n/2 holds the k2 = -n/2 (== +n/2) coefficient for row k1.
    return data_[row(k1) * columns() + static_cast<std::size_t>(half)];
  }
  return std::conj(data_[row(-k1) * columns() + static_cast<std::size_t>(-k2)]);
}

std::complex<double> derivative_symbol(int k, int order, std::size_t n) {
  if (order == 0) return {1.0, 0.0};
  if ((order % 2) == 1 && k == -static_cast<int>(n / 2)) return {0.0, 0.0};
  const std::complex<double> ik(0.0, kTwoPi * static_cast<double>(k));
  std::complex<double> out(1.0, 0.0);
  for (int i = 0; i < order; ++i) out *= ik;
  return out;
}

Spectrum Spectrum::derivative(MultiIndex alpha) const {
  Spectrum out = *this;
  const auto n = grid_.n();
  out.scale_modes([&](int k1, int k2) {
    return derivative_symbol(k1, alpha.d1, n) * derivative_symbol(k2, alpha.d2, n);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Transforms and operators

Spectrum forward(const ScalarField& f) {
  if (!f.all_finite()) throw Error(ErrorCode::non_finite, "spectral transform of non-finite field");
  Spectrum s(f.grid());
  const auto n = f.grid().n();
  detail::fft_r2c(n, f.values().data(), s.data().data());
  const double scale = 1.0 / static_cast<double>(n * n);
  for (auto& c : s.data()) c *= scale;
  return s;
}

ScalarField inverse(const Spectrum& s) {
  std::vector<std::complex<double>> work(s.data().begin(), s.data().end());
  ScalarField out(s.grid());
  detail::fft_c2r(s.grid().n(), work.data(), out.values().data());
  return out;
}

ScalarField derivative(const ScalarField& f, MultiIndex alpha) {
  if (alpha.order() == 0) return f;
  return inverse(forward(f).derivative(alpha));
}

VectorField gradient(const ScalarField& f) {
  const auto s = forward(f);
  return {inverse(s.derivative({1, 0})), inverse(s.derivative({0, 1}))};
}

ScalarField divergence(const VectorField& v) {
  auto sx = forward(v.x).derivative({1, 0});
  const auto sy = forward(v.y).derivative({0, 1});
  for (std::size_t i = 0; i < sx.data().size(); ++i) sx.data()[i] += sy.data()[i];
  return inverse(sx);
}

ScalarField laplacian(const ScalarField& f) {
  const auto n = f.grid().n();
  auto s = forward(f);
  s.scale_modes([n](int k1, int k2) {
    return derivative_symbol(k1, 2, n) + derivative_symbol(k2, 2, n);
  });
  return inverse(s);
}

VectorField perp_gradient(const ScalarField& psi) {
  const auto s = forward(psi);
  auto vy = inverse(s.derivative({1, 0}));
  vy *= -1.0;
  return {inverse(s.derivative({0, 1})), std::move(vy)};
}

ScalarField curl(const VectorField& v) {
  auto s = forward(v.y).derivative({1, 0});
  const auto sx = forward(v.x).derivative({0, 1});
  for (std::size_t i = 0; i < s.data().size(); ++i) s.data()[i] -= sx.data()[i];
  return inverse(s);
}

Spectrum& apply_heat_semigroup(Spectrum& s, double nu, double t) {
  if (!(nu >= 0.0) || !(t >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "heat semigroup needs nu >= 0 and t >= 0");
  }
  const double c = nu * t * kTwoPi * kTwoPi;
  if (c == 0.0) return s;
  s.scale_modes([c](int k1, int k2) {
    return std::exp(-c * static_cast<double>(k1 * k1 + k2 * k2));
  });
  return s;
}

ScalarField heat_semigroup(const ScalarField& f, double nu, double t) {
  if (!(nu >= 0.0) || !(t >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "heat semigroup needs nu >= 0 and t >= 0");
  }
  if (nu * t == 0.0) return f;
  auto s = forward(f);
  apply_heat_semigroup(s, nu, t);
  return inverse(s);
}

Spectrum& dealias_in_place(Spectrum& s) {
  const int cut = s.grid().dealias_cutoff();
  s.scale_modes([cut](int k1, int k2) {
    return (std::abs(k1) > cut || std::abs(k2) > cut) ? 0.0 : 1.0;
  });
  return s;
}

ScalarField refine(const ScalarField& f, std::size_t factor) {
  if (factor == 0) throw Error(ErrorCode::invalid_argument, "refinement factor must be positive");
  const auto coarse = forward(f);
  const auto n = f.grid().n();
  const GridSpec fine_grid(n * factor);
  Spectrum fine(fine_grid);
  const auto half = static_cast<int>(n / 2);
  const auto cols = fine.columns();
  for (std::size_t r = 0; r < fine_grid.n(); ++r) {
    const int k1 = fine_grid.wavenumber(r);
    if (std::abs(k1) >= half) continue;
    for (std::size_t c = 0; c < static_cast<std::size_t>(half); ++c) {
      fine.data()[r * cols + c] = coarse.coefficient(k1, static_cast<int>(c));
    }
  }
  return inverse(fine);
}

PointJet evaluate_interpolant(const Spectrum& s, double x1, double x2) {
  const auto n = s.grid().n();
  const int half = static_cast<int>(n / 2);
  const double w = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> e2(static_cast<std::size_t>(half));
  for (int k2 = 0; k2 < half; ++k2) e2[static_cast<std::size_t>(k2)] = std::polar(1.0, w * k2 * x2);
  PointJet jet;
  const auto cols = s.columns();
  for (std::size_t r = 0; r < n; ++r) {
    const int k1 = s.grid().wavenumber(r);
    if (std::abs(k1) >= half) continue;
    const auto e1 = std::polar(1.0, w * k1 * x1);
    for (int k2 = 0; k2 < half; ++k2) {
      // Columns k2 > 0 stand for the conjugate pair as well.
      const double weight = k2 == 0 ? 1.0 : 2.0;
      const auto term = s.data()[r * cols + static_cast<std::size_t>(k2)] * e1 * e2[static_cast<std::size_t>(k2)];
      const double re = weight * term.real();
      const double im = weight * term.imag();
      const double a = w * k1;
      const double b = w * k2;
      jet.value += re;
      jet.d1 -= a * im;
      jet.d2 -= b * im;
      jet.d11 -= a * a * re;
      jet.d12 -= a * b * re;
      jet.d22 -= b * b * re;
    }
  }
  return jet;
}

double interpolant_sup_norm(const ScalarField& f) {
  constexpr std::size_t kFactor = 4;
  constexpr int kNewtonSteps = 8;
  const auto fine = refine(f, kFactor);
  const auto vals = fine.values();
  std::size_t best = 0;
  for (std::size_t p = 1; p < vals.size(); ++p) {
    if (std::abs(vals[p]) > std::abs(vals[best])) best = p;
  }
  const auto& fg = fine.grid();
  double x1 = fg.coordinate(best / fg.n());
  double x2 = fg.coordinate(best % fg.n());
  const auto s = forward(f);
  double sup = std::abs(vals[best]);
  for (int it = 0; it < kNewtonSteps; ++it) {
    const auto j = evaluate_interpolant(s, x1, x2);
    sup = std::max(sup, std::abs(j.value));
    const double det = j.d11 * j.d22 - j.d12 * j.d12;
    if (det == 0.0) break;
    const double s1 = (j.d22 * j.d1 - j.d12 * j.d2) / det;
    const double s2 = (j.d11 * j.d2 - j.d12 * j.d1) / det;
    // Stay within one refined cell of the start; farther means a saddle or a poor start.
    if (std::hypot(s1, s2) > fg.spacing()) break;
    x1 -= s1;
    x2 -= s2;
  }
  return sup;
}

ScalarField dealias(const ScalarField& f) {
  auto s = forward(f);
  return inverse(dealias_in_place(s));
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  return out;
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
  return dealias(multiply(a, b));
}

}  // namespace lakesim
