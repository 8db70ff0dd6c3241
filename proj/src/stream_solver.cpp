#include "lakesim/stream_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lakesim/counter_rng.hpp"

namespace lakesim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Symbol of -(D1^2 + D2^2) with the Nyquist-zeroed first-derivative symbols.
double collocated_laplacian_symbol(int k1, int k2, std::size_t n) {
  const int nyq = -static_cast<int>(n / 2);
  const double a = k1 == nyq ? 0.0 : static_cast<double>(k1);
  const double c = k2 == nyq ? 0.0 : static_cast<double>(k2);
  return kTwoPi * kTwoPi * (a * a + c * c);
}

double mean_dot(const ScalarField& a, const ScalarField& b) {
  auto av = a.values();
  auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s / static_cast<double>(av.size());
}

ScalarField checkerboard(GridSpec grid, bool along_x1, bool along_x2) {
  ScalarField f(grid);
  const auto n = grid.n();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      int parity = 0;
      if (along_x1) parity += static_cast<int>(i);
      if (along_x2) parity += static_cast<int>(j);
      f(i, j) = (parity % 2 == 0) ? 1.0 : -1.0;
    }
  }
  return f;
}

}  // namespace

EllipticOperator::EllipticOperator(Bathymetry bath)
    : bath_(std::move(bath)),
      null_basis_{ScalarField(bath_.grid(), 1.0), checkerboard(bath_.grid(), true, false),
                  checkerboard(bath_.grid(), false, true), checkerboard(bath_.grid(), true, true)} {
  for (std::size_t m = 0; m < null_basis_.size(); ++m) {
    for (std::size_t l = 0; l < m; ++l) {
      null_basis_[m].add_scaled(-weighted_inner(null_basis_[m], null_basis_[l], bath_),
                                null_basis_[l]);
    }
    null_basis_[m] *= 1.0 / weighted_lp_norm(null_basis_[m], 2.0, bath_);
  }
}

ScalarField EllipticOperator::apply(const ScalarField& psi) const {
  const auto v = apply_M(weighted_perp_gradient(psi, bath_), bath_);
  return multiply(curl(v), bath_.inverse());
}

double EllipticOperator::bilinear(const ScalarField& psi, const ScalarField& phi) const {
  const auto u = weighted_perp_gradient(psi, bath_);
  const auto w = weighted_perp_gradient(phi, bath_);
  return weighted_inner(u, apply_M(w, bath_), bath_);
}

ScalarField EllipticOperator::project(const ScalarField& f) const {
  ScalarField out = f;
  for (const auto& q : null_basis_) out.add_scaled(-weighted_inner(f, q, bath_), q);
  return out;
}

StreamSolution EllipticOperator::solve(const ScalarField& omega, const SolverOptions& options,
                                       const ScalarField* initial_guess) const {
  require_same_grid(omega.grid(), grid());
  const auto n = grid().n();
  const double omega_norm_raw = weighted_lp_norm(omega, 2.0, bath_);
  const double mass = weighted_inner(omega, ScalarField(grid(), 1.0), bath_);
  if (!(std::abs(mass) <= 1e-8 * std::max(1.0, omega_norm_raw))) {
    std::ostringstream msg;
    msg << "vorticity violates compatibility: <1, omega>_b = " << mass;
    throw Error(ErrorCode::compatibility, msg.str());
  }

  const auto rhs_omega = project(omega);
  const double omega_norm = weighted_lp_norm(rhs_omega, 2.0, bath_);
  StreamSolution out{ScalarField(grid()), {}};
  if (omega_norm == 0.0) {
    out.report.converged = true;
    return out;
  }

  const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  const auto& b = bath_.b();
  const double b_bar = bath_.b_mean();

  // Symmetric system G psi = b omega with G = diag(b) A.
  auto gram_apply = [&](const ScalarField& psi) {
    return curl(apply_M(weighted_perp_gradient(psi, bath_), bath_));
  };
  auto residual_norm = [&](const ScalarField& r) {
    auto rv = r.values();
    auto bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < rv.size(); ++i) s += rv[i] * rv[i] / bv[i];
    return std::sqrt(s / static_cast<double>(rv.size())) / omega_norm;
  };
  auto precondition = [&](const ScalarField& r) {
    auto s = forward(r);
    s.scale_modes([&](int k1, int k2) {
      const double sym = collocated_laplacian_symbol(k1, k2, n);
      return sym == 0.0 ? 0.0 : 1.0 / (b_bar * sym);
    });
    return inverse(s);
  };

  ScalarField x = initial_guess ? *initial_guess : ScalarField(grid());
  if (initial_guess) require_same_grid(initial_guess->grid(), grid());
  ScalarField r = multiply(b, rhs_omega);
  if (initial_guess) r -= gram_apply(x);

  double rel = residual_norm(r);
  int it = 0;
  if (rel > options.tolerance) {
    ScalarField z = precondition(r);
    ScalarField p = z;
    double rz = mean_dot(r, z);
    while (it < max_iter) {
      const auto gp = gram_apply(p);
      const double pgp = mean_dot(p, gp);
      if (!(pgp > 0.0)) break;
      const double alpha = rz / pgp;
      x.add_scaled(alpha, p);
      r.add_scaled(-alpha, gp);
      ++it;
      rel = residual_norm(r);
      if (rel <= options.tolerance) break;
      z = precondition(r);
      const double rz_next = mean_dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      p *= beta;
      p += z;
    }
  }

  out.report.iterations = it;
  out.report.final_relative_residual = rel;
  out.report.converged = rel <= options.tolerance;
  if (!out.report.converged) {
    std::ostringstream msg;
    msg << "stream solve did not converge: relative residual " << rel << " after " << it
        << " iterations";
    throw Error(ErrorCode::not_converged, msg.str());
  }
  out.psi = project(x);
  return out;
}

StreamSolution solve_stream(const EllipticOperator& op, const ScalarField& omega, double tolerance) {
  return op.solve(omega, SolverOptions{tolerance, 0});
}

VectorField velocity_from_vorticity(const EllipticOperator& op, const ScalarField& omega,
                                    double tolerance) {
  const auto sol = solve_stream(op, omega, tolerance);
  return weighted_perp_gradient(sol.psi, op.bathymetry());
}

double closure_residual(const EllipticOperator& op, const VectorField& u, const ScalarField& omega) {
  const auto& bath = op.bathymetry();
  auto diff = multiply(curl(apply_M(u, bath)), bath.inverse());
  diff -= omega;
  const double denom = weighted_lp_norm(omega, 2.0, bath);
  const double num = weighted_lp_norm(diff, 2.0, bath);
  return denom == 0.0 ? num : num / denom;
}

VectorField biot_savart_fft(const ScalarField& omega) {
  const auto n = omega.grid().n();
  auto s = forward(omega);
  s.scale_modes([n](int k1, int k2) {
    const double sym = collocated_laplacian_symbol(k1, k2, n);
    return sym == 0.0 ? 0.0 : 1.0 / sym;
  });
  return perp_gradient(inverse(s));
}

ScalarField random_band_limited(GridSpec grid, int max_mode, std::uint64_t seed, double decay) {
  struct Mode {
    int k1, k2;
    double a, c;
  };
  std::vector<Mode> modes;
  std::uint64_t index = 0;
  for (int k1 = 0; k1 <= max_mode; ++k1) {
    for (int k2 = -max_mode; k2 <= max_mode; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const double damp = std::pow(std::hypot(k1, k2), -decay);
      modes.push_back({k1, k2, damp * counter_normal(seed, index, 101),
                       damp * counter_normal(seed, index, 102)});
      ++index;
    }
  }
  return ScalarField::sample(grid, [&](double x1, double x2) {
    double v = 0.0;
    for (const auto& m : modes) {
      const double phase = kTwoPi * (m.k1 * x1 + m.k2 * x2);
      v += m.a * std::cos(phase) + m.c * std::sin(phase);
    }
    return v;
  });
}

ScalarField random_compatible_vorticity(const Bathymetry& bath, int max_mode, std::uint64_t seed) {
  auto f = random_band_limited(bath.grid(), max_mode, seed);
  const double m = weighted_mean(f, bath);
  for (auto& v : f.values()) v -= m;
  return f;
}

double regularity_probe(const EllipticOperator& op, int k, int num_samples, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "regularity probe needs k >= 1");
  const auto& bath = op.bathymetry();
  double worst = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    const auto omega = random_compatible_vorticity(bath, 4, seed + static_cast<std::uint64_t>(s));
    const auto u = velocity_from_vorticity(op, omega);
    worst = std::max(worst, weighted_sobolev_norm(u, k, bath) / weighted_sobolev_norm(omega, k - 1, bath));
  }
  return worst;
}

double coercivity_probe(const EllipticOperator& op, int num_samples, std::uint64_t seed) {
  const auto& bath = op.bathymetry();
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_samples; ++s) {
    const auto psi = op.project(random_band_limited(bath.grid(), 4, seed + static_cast<std::uint64_t>(s)));
    const double h1 = weighted_sobolev_norm(psi, 1, bath);
    best = std::min(best, op.bilinear(psi, psi) / (h1 * h1));
  }
  return best;
}

}  // namespace lakesim
