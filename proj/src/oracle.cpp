#include "lakesim/oracle.hpp"

#include <cmath>
#include <numbers>

namespace lakesim::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dense_size(std::size_t n) {
  if (n > kMaxDenseN) throw Error(ErrorCode::invalid_argument, "dense oracle limited to n <= 32");
}

Eigen::VectorXd diag_of(const ScalarField& f) { return to_vector(f); }

}  // namespace

Eigen::VectorXd to_vector(const ScalarField& f) {
  const auto v = f.values();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ScalarField from_vector(GridSpec grid, const Eigen::VectorXd& v) {
  return ScalarField(grid, std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::MatrixXd first_derivative_1d(std::size_t n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      if (j == l) continue;
      const auto m = static_cast<long>(j) - static_cast<long>(l);
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      d(j, l) = kPi * sign / std::tan(kPi * static_cast<double>(m) / static_cast<double>(n));
    }
  }
  return d;
}

Eigen::MatrixXd second_derivative_1d(std::size_t n) {
  // On [0, 2 pi] with h = 2 pi / n, rescaled by (2 pi)^2.
  const double h = 2.0 * kPi / static_cast<double>(n);
  const double scale = 4.0 * kPi * kPi;
  Eigen::MatrixXd d(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      if (j == l) {
        d(j, l) = scale * (-kPi * kPi / (3.0 * h * h) - 1.0 / 6.0);
        continue;
      }
      const auto m = static_cast<long>(j) - static_cast<long>(l);
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double s = std::sin(static_cast<double>(m) * h / 2.0);
      d(j, l) = scale * (-0.5 * sign / (s * s));
    }
  }
  return d;
}

Eigen::MatrixXd derivative_1d(std::size_t n, int order) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(n, n);
  if (order % 2 == 1) out = first_derivative_1d(n);
  const Eigen::MatrixXd d2 = second_derivative_1d(n);
  for (int p = 0; p < order / 2; ++p) out = d2 * out;
  return out;
}

Eigen::MatrixXd dealias_1d(std::size_t n) {
  const int cutoff = static_cast<int>(n / 3);
  Eigen::MatrixXd p(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      double s = 0.0;
      for (int k = -cutoff; k <= cutoff; ++k) {
        s += std::cos(2.0 * kPi * k * (static_cast<double>(j) - static_cast<double>(l)) /
                      static_cast<double>(n));
      }
      p(j, l) = s / static_cast<double>(n);
    }
  }
  return p;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd derivative_2d(std::size_t n, MultiIndex alpha) {
  return kron(derivative_1d(n, alpha.d1), derivative_1d(n, alpha.d2));
}

Eigen::MatrixXd dealias_2d(std::size_t n) {
  const auto p = dealias_1d(n);
  return kron(p, p);
}

Eigen::MatrixXd elliptic_explicit(const Bathymetry& bath) {
  const auto n = bath.grid().n();
  require_dense_size(n);
  const Eigen::MatrixXd dx = derivative_2d(n, {1, 0});
  const Eigen::MatrixXd dy = derivative_2d(n, {0, 1});
  const Eigen::VectorXd b = diag_of(bath.b());
  const Eigen::VectorXd inv_b = b.cwiseInverse();
  const Eigen::VectorXd bx = dx * b;
  const Eigen::VectorXd by = dy * b;
  const double d2 = bath.delta() * bath.delta();

  // u = b^-1 (d2 psi, -d1 psi) as matrices acting on psi.
  const Eigen::MatrixXd ux = inv_b.asDiagonal() * dy;
  const Eigen::MatrixXd uy = -(inv_b.asDiagonal() * dx);

  const Eigen::MatrixXd divu = dx * ux + dy * uy;
  const Eigen::MatrixXd udotgb = bx.asDiagonal() * ux + by.asDiagonal() * uy;
  const Eigen::VectorXd b2 = b.cwiseProduct(b);
  const Eigen::VectorXd b3 = b2.cwiseProduct(b);

  const Eigen::MatrixXd t1 = b3.asDiagonal() * divu;    // b^3 div u
  const Eigen::MatrixXd t2 = b2.asDiagonal() * udotgb;  // b^2 u.grad b
  const Eigen::MatrixXd t3 = b2.asDiagonal() * divu;    // b^2 div u
  const Eigen::MatrixXd t4 = b.asDiagonal() * udotgb;   // b u.grad b

  const Eigen::MatrixXd vx =
      ux + d2 * inv_b.asDiagonal() *
               (-(1.0 / 3.0) * dx * t1 - 0.5 * dx * t2 + 0.5 * bx.asDiagonal() * t3 +
                bx.asDiagonal() * t4);
  const Eigen::MatrixXd vy =
      uy + d2 * inv_b.asDiagonal() *
               (-(1.0 / 3.0) * dy * t1 - 0.5 * dy * t2 + 0.5 * by.asDiagonal() * t3 +
                by.asDiagonal() * t4);
  return inv_b.asDiagonal() * (dx * vy - dy * vx);
}

Eigen::MatrixXd elliptic_by_columns(const EllipticOperator& op) {
  const auto grid = op.grid();
  require_dense_size(grid.n());
  const auto size = static_cast<Eigen::Index>(grid.points());
  Eigen::MatrixXd a(size, size);
  for (Eigen::Index c = 0; c < size; ++c) {
    ScalarField e(grid);
    e.values()[static_cast<std::size_t>(c)] = 1.0;
    a.col(c) = to_vector(op.apply(e));
  }
  return a;
}

DenseSolution dense_oracle_solve(const Bathymetry& bath, const ScalarField& omega) {
  const auto grid = bath.grid();
  const auto n = grid.n();
  require_dense_size(n);
  const auto size = static_cast<Eigen::Index>(grid.points());
  const Eigen::VectorXd b = diag_of(bath.b());
  const double area = static_cast<double>(size);

  // Nullspace: constant and the three checkerboards, b-orthonormalized.
  Eigen::MatrixXd null(size, 4);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto idx = static_cast<Eigen::Index>(i * n + j);
      const double si = (i % 2 == 0) ? 1.0 : -1.0;
      const double sj = (j % 2 == 0) ? 1.0 : -1.0;
      null(idx, 0) = 1.0;
      null(idx, 1) = si;
      null(idx, 2) = sj;
      null(idx, 3) = si * sj;
    }
  }
  auto inner = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    return f.cwiseProduct(g).cwiseProduct(b).sum() / area;
  };
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd v = null.col(c);
    for (int p = 0; p < c; ++p) v -= inner(null.col(p), v) * null.col(p);
    null.col(c) = v / std::sqrt(inner(v, v));
  }

  Eigen::VectorXd w = to_vector(omega);
  if (std::abs(inner(null.col(0), w)) > 1e-8 * std::max(1.0, std::sqrt(inner(w, w)))) {
    throw Error(ErrorCode::compatibility, "omega has nonzero weighted mean");
  }
  for (int c = 0; c < 4; ++c) w -= inner(null.col(c), w) * null.col(c);

  const Eigen::MatrixXd a = elliptic_explicit(bath);
  Eigen::MatrixXd g = b.asDiagonal() * a;
  const Eigen::MatrixXd bn = b.asDiagonal() * null;
  const double shift = g.diagonal().cwiseAbs().maxCoeff();
  g += shift * bn * bn.transpose();
  const Eigen::VectorXd rhs = b.cwiseProduct(w);
  Eigen::VectorXd psi = g.partialPivLu().solve(rhs);
  for (int c = 0; c < 4; ++c) psi -= inner(null.col(c), psi) * null.col(c);

  const Eigen::VectorXd inv_b = b.cwiseInverse();
  const Eigen::VectorXd ux = inv_b.cwiseProduct(derivative_2d(n, {0, 1}) * psi);
  const Eigen::VectorXd uy = -inv_b.cwiseProduct(derivative_2d(n, {1, 0}) * psi);
  return DenseSolution{from_vector(grid, psi),
                       VectorField(from_vector(grid, ux), from_vector(grid, uy))};
}

double sobolev_norm(const ScalarField& f, int order, const Bathymetry& bath) {
  const auto n = f.grid().n();
  require_dense_size(n);
  const Eigen::VectorXd b = diag_of(bath.b());
  const Eigen::VectorXd v = to_vector(f);
  double total = 0.0;
  for (int d1 = 0; d1 <= order; ++d1) {
    for (int d2 = 0; d1 + d2 <= order; ++d2) {
      const Eigen::VectorXd d = derivative_2d(n, {d1, d2}) * v;
      total += d.cwiseProduct(d).cwiseProduct(b).sum() / static_cast<double>(v.size());
    }
  }
  return std::sqrt(total);
}

ScalarField lie_derivative(const VectorField& xi, const ScalarField& f) {
  const auto n = f.grid().n();
  require_dense_size(n);
  const Eigen::VectorXd v = to_vector(f);
  const Eigen::VectorXd raw = to_vector(xi.x).cwiseProduct(derivative_2d(n, {1, 0}) * v) +
                              to_vector(xi.y).cwiseProduct(derivative_2d(n, {0, 1}) * v);
  return from_vector(f.grid(), dealias_2d(n) * raw);
}

ScalarField ito_correction(const NoiseBasis& basis, const ScalarField& omega) {
  ScalarField out(omega.grid());
  for (const auto& xi : basis.fields) {
    out.add_scaled(0.5, oracle::lie_derivative(xi, oracle::lie_derivative(xi, omega)));
  }
  return out;
}

}  // namespace lakesim::oracle
