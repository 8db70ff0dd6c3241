#include "lakesim/weighted_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace lakesim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField reciprocal(const ScalarField& b) {
  ScalarField out(b.grid());
  auto o = out.values();
  auto v = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = 1.0 / v[i];
  return out;
}

double harmonic_at(const Harmonic& h, double x1, double x2) {
  return h.amplitude * std::cos(kTwoPi * (h.k1 * x1 + h.k2 * x2) + h.phase);
}

}  // namespace

Bathymetry::Bathymetry(ScalarField b, double delta, double floor)
    : b_(std::move(b)),
      inv_b_(reciprocal(b_)),
      grad_b_(gradient(b_)),
      b_min_(std::numeric_limits<double>::infinity()),
      b_max_(-std::numeric_limits<double>::infinity()),
      b_mean_(b_.mean()),
      delta_(delta) {
  if (!(floor > 0.0)) throw Error(ErrorCode::invalid_argument, "bathymetry floor must be positive");
  if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "aspect ratio delta must be >= 0");
  for (double v : b_.values()) {
    b_min_ = std::min(b_min_, v);
    b_max_ = std::max(b_max_, v);
  }
  if (!(b_min_ >= floor)) {
    throw Error(ErrorCode::invalid_argument, "bathymetry minimum " + std::to_string(b_min_) +
                                                 " below floor " + std::to_string(floor));
  }
}

Bathymetry Bathymetry::from_params(GridSpec grid, const BathymetryParams& p) {
  auto b = ScalarField::sample(grid, [&](double x1, double x2) {
    double v = p.mean;
    if (p.family != BathymetryFamily::constant) v += harmonic_at(p.first, x1, x2);
    if (p.family == BathymetryFamily::double_harmonic) v += harmonic_at(p.second, x1, x2);
    return v;
  });
  return Bathymetry(std::move(b), p.delta, p.floor);
}

Bathymetry Bathymetry::constant(GridSpec grid, double value, double delta) {
  return Bathymetry(ScalarField(grid, value), delta, std::min(0.05, value));
}

SobolevIndex::SobolevIndex(int k) : k_(k) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "Sobolev index must be >= 2");
}

double weighted_inner(const ScalarField& f, const ScalarField& g, const Bathymetry& bath) {
  require_same_grid(f.grid(), g.grid());
  require_same_grid(f.grid(), bath.grid());
  auto fv = f.values();
  auto gv = g.values();
  auto bv = bath.b().values();
  double s = 0.0;
  for (std::size_t i = 0; i < fv.size(); ++i) s += fv[i] * gv[i] * bv[i];
  return s / static_cast<double>(fv.size());
}

double weighted_inner(const VectorField& f, const VectorField& g, const Bathymetry& bath) {
  return weighted_inner(f.x, g.x, bath) + weighted_inner(f.y, g.y, bath);
}

double weighted_lp_norm(const ScalarField& f, double p, const Bathymetry& bath) {
  require_same_grid(f.grid(), bath.grid());
  if (std::isinf(p) && p > 0) return f.max_abs();
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_argument, "Lp norm needs p >= 1");
  auto fv = f.values();
  auto bv = bath.b().values();
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < fv.size(); ++i) s += fv[i] * fv[i] * bv[i];
    return std::sqrt(s / static_cast<double>(fv.size()));
  }
  for (std::size_t i = 0; i < fv.size(); ++i) s += std::pow(std::abs(fv[i]), p) * bv[i];
  return std::pow(s / static_cast<double>(fv.size()), 1.0 / p);
}

namespace {

double sobolev_sum_sq(const ScalarField& f, int order, const Bathymetry& bath) {
  if (order < 0) throw Error(ErrorCode::invalid_argument, "Sobolev order must be >= 0");
  require_same_grid(f.grid(), bath.grid());
  const auto s = forward(f);
  double total = 0.0;
  for (const auto& alpha : multi_indices_up_to(order)) {
    const auto d = alpha.order() == 0 ? f : inverse(s.derivative(alpha));
    const double norm = weighted_lp_norm(d, 2.0, bath);
    total += norm * norm;
  }
  return total;
}

double sup_over_derivatives(const ScalarField& f, int order) {
  const auto s = forward(f);
  double m = 0.0;
  for (const auto& alpha : multi_indices_up_to(order)) {
    const auto d = alpha.order() == 0 ? f : inverse(s.derivative(alpha));
    m = std::max(m, d.max_abs());
  }
  return m;
}

}  // namespace

double weighted_sobolev_norm(const ScalarField& f, int order, const Bathymetry& bath) {
  return std::sqrt(sobolev_sum_sq(f, order, bath));
}

double weighted_sobolev_norm(const VectorField& u, int order, const Bathymetry& bath) {
  return std::sqrt(sobolev_sum_sq(u.x, order, bath) + sobolev_sum_sq(u.y, order, bath));
}

double sup_sobolev_norm(const ScalarField& f, int order) { return sup_over_derivatives(f, order); }

double sup_sobolev_norm(const VectorField& u, int order) {
  return std::max(sup_over_derivatives(u.x, order), sup_over_derivatives(u.y, order));
}

ScalarField lie_derivative(const VectorField& xi, const VectorField& grad_f) {
  require_same_grid(xi.grid(), grad_f.grid());
  ScalarField out(xi.grid());
  auto o = out.values();
  auto x1 = xi.x.values();
  auto x2 = xi.y.values();
  auto g1 = grad_f.x.values();
  auto g2 = grad_f.y.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x1[i] * g1[i] + x2[i] * g2[i];
  return dealias(out);
}

ScalarField lie_derivative(const VectorField& xi, const ScalarField& f) {
  require_same_grid(xi.grid(), f.grid());
  return lie_derivative(xi, gradient(f));
}

ScalarField lie_derivative_squared(const VectorField& xi, const ScalarField& f) {
  return lie_derivative(xi, lie_derivative(xi, f));
}

VectorField weighted_perp_gradient(const ScalarField& psi, const Bathymetry& bath) {
  require_same_grid(psi.grid(), bath.grid());
  auto u = perp_gradient(psi);
  return {multiply(u.x, bath.inverse()), multiply(u.y, bath.inverse())};
}

VectorField apply_M(const VectorField& u, const Bathymetry& bath) {
  require_same_grid(u.grid(), bath.grid());
  const double d2 = bath.delta() * bath.delta();
  if (d2 == 0.0) return u;

  const auto div_u = divergence(u);
  const auto n2 = u.grid().points();
  auto b = bath.b().values();
  auto gb1 = bath.grad().x.values();
  auto gb2 = bath.grad().y.values();
  auto u1 = u.x.values();
  auto u2 = u.y.values();
  auto du = div_u.values();

  // Potential whose gradient carries the first two bracket terms.
  ScalarField potential(u.grid());
  auto pot = potential.values();
  std::vector<double> u_dot_gb(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    u_dot_gb[i] = u1[i] * gb1[i] + u2[i] * gb2[i];
    pot[i] = -b[i] * b[i] * (b[i] * du[i] / 3.0 + 0.5 * u_dot_gb[i]);
  }
  const auto grad_pot = gradient(potential);
  auto gp1 = grad_pot.x.values();
  auto gp2 = grad_pot.y.values();

  VectorField v = u;
  auto v1 = v.x.values();
  auto v2 = v.y.values();
  for (std::size_t i = 0; i < n2; ++i) {
    const double coeff = 0.5 * b[i] * du[i] + u_dot_gb[i];
    v1[i] += d2 * (gp1[i] / b[i] + coeff * gb1[i]);
    v2[i] += d2 * (gp2[i] / b[i] + coeff * gb2[i]);
  }
  return v;
}

double weighted_div_residual(const VectorField& u, const Bathymetry& bath) {
  require_same_grid(u.grid(), bath.grid());
  VectorField bu{multiply(u.x, bath.b()), multiply(u.y, bath.b())};
  return divergence(bu).max_abs();
}

double weighted_mean(const ScalarField& f, const Bathymetry& bath) {
  return weighted_inner(f, ScalarField(f.grid(), 1.0), bath) / bath.b_mean();
}

}  // namespace lakesim
