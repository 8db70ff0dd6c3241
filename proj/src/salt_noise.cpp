#include "lakesim/salt_noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "binary_io.hpp"
#include "lakesim/counter_rng.hpp"
#include "lakesim/stream_solver.hpp"

namespace lakesim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::vector<NoiseMode> noise_mode_order(std::size_t count) {
  std::vector<NoiseMode> wavevectors;
  int radius = 1;
  // Grow the search box until it holds enough modes whose |k| cannot be
  // undercut by modes outside it.
  while (true) {
    wavevectors.clear();
    for (int k1 = 0; k1 <= radius; ++k1) {
      for (int k2 = -radius; k2 <= radius; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        if (k1 * k1 + k2 * k2 > radius * radius) continue;
        wavevectors.push_back({k1, k2, true});
      }
    }
    if (2 * wavevectors.size() >= count) break;
    ++radius;
  }
  std::sort(wavevectors.begin(), wavevectors.end(), [](const NoiseMode& a, const NoiseMode& b) {
    const int na = a.k1 * a.k1 + a.k2 * a.k2;
    const int nb = b.k1 * b.k1 + b.k2 * b.k2;
    if (na != nb) return na < nb;
    if (a.k1 != b.k1) return a.k1 < b.k1;
    return a.k2 < b.k2;
  });
  std::vector<NoiseMode> out;
  for (const auto& w : wavevectors) {
    if (out.size() == count) break;
    out.push_back({w.k1, w.k2, true});
    if (out.size() == count) break;
    out.push_back({w.k1, w.k2, false});
  }
  return out;
}

NoiseBasis build_noise_basis(const Bathymetry& bath, std::size_t m, double decay, double scale) {
  if (!(decay > 0.0)) throw Error(ErrorCode::invalid_argument, "noise decay exponent must be > 0");
  NoiseBasis basis;
  basis.modes = noise_mode_order(m);
  const auto grid = bath.grid();
  for (const auto& mode : basis.modes) {
    const double norm_k = std::hypot(mode.k1, mode.k2);
    const double a = scale * std::pow(norm_k, -decay);
    // grad zeta = 2 pi k * (cos theta | -sin theta)
    auto dzeta = [&](double x1, double x2) {
      const double theta = kTwoPi * (mode.k1 * x1 + mode.k2 * x2);
      return mode.sine ? std::cos(theta) : -std::sin(theta);
    };
    auto x = ScalarField::sample(grid, [&](double x1, double x2) {
      return a * kTwoPi * mode.k2 * dzeta(x1, x2);
    });
    auto y = ScalarField::sample(grid, [&](double x1, double x2) {
      return -a * kTwoPi * mode.k1 * dzeta(x1, x2);
    });
    basis.fields.emplace_back(multiply(x, bath.inverse()), multiply(y, bath.inverse()));
    basis.amplitudes.push_back(a);
  }
  return basis;
}

BasisReport validate_basis(const NoiseBasis& basis, const Bathymetry& bath, SobolevIndex k,
                           int probes, std::uint64_t seed) {
  BasisReport report;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double r = weighted_div_residual(basis.fields[i], bath);
    report.div_residuals.push_back(r);
    if (!(r <= kBasisDivergenceTolerance) && report.passed) {
      report.passed = false;
      std::ostringstream msg;
      msg << "xi_" << (i + 1) << " violates div(b xi) = 0: residual " << r;
      report.failure = msg.str();
    }
    const double s = sup_sobolev_norm(basis.fields[i], k.value() + 1);
    report.xi_sup_sum += s * s;
  }
  if (basis.empty()) return report;
  for (int p = 0; p < probes; ++p) {
    const auto f = random_band_limited(bath.grid(), 3, seed + static_cast<std::uint64_t>(p));
    double lie = 0.0;
    double lie2 = 0.0;
    for (const auto& xi : basis.fields) {
      const auto l1 = lie_derivative(xi, f);
      const auto l2 = lie_derivative(xi, l1);
      const double a = weighted_lp_norm(l1, 2.0, bath);
      const double c = weighted_lp_norm(l2, 2.0, bath);
      lie += a * a;
      lie2 += c * c;
    }
    const double h1 = weighted_sobolev_norm(f, 1, bath);
    const double h2 = weighted_sobolev_norm(f, 2, bath);
    report.lie_constant = std::max(report.lie_constant, lie / (h1 * h1));
    report.lie_squared_constant = std::max(report.lie_squared_constant, lie2 / (h2 * h2));
  }
  return report;
}

// ---------------------------------------------------------------------------
// BrownianPath

BrownianPath::BrownianPath(std::uint64_t seed, std::size_t modes, double dt_fine, double horizon)
    : seed_(seed), modes_(modes), dt_fine_(dt_fine), horizon_(horizon) {
  if (!(dt_fine > 0.0) || !(horizon >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "Brownian path needs dt_fine > 0 and horizon >= 0");
  }
  const double ratio = horizon / dt_fine;
  const double nearest = std::round(ratio);
  steps_ = static_cast<std::size_t>(std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)
                                        ? nearest
                                        : std::ceil(ratio));
  table_.resize(modes_ * steps_);
  const double scale = std::sqrt(dt_fine_);
  for (std::size_t i = 0; i < modes_; ++i) {
    for (std::size_t s = 0; s < steps_; ++s) {
      table_[i * steps_ + s] = scale * counter_normal(seed_, s, static_cast<std::uint32_t>(i));
    }
  }
}

std::vector<double> BrownianPath::increments(std::size_t step_index, double dt) const {
  const double ratio = dt / dt_fine_;
  const double nearest = std::round(ratio);
  if (!(nearest >= 1.0) || std::abs(ratio - nearest) > 1e-9 * nearest) {
    throw Error(ErrorCode::invalid_argument, "dt is not an integer multiple of dt_fine");
  }
  const auto r = static_cast<std::size_t>(nearest);
  const std::size_t begin = step_index * r;
  if (begin + r > steps_) throw Error(ErrorCode::invalid_argument, "increment window outside horizon");
  std::vector<double> out(modes_, 0.0);
  for (std::size_t i = 0; i < modes_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < r; ++j) s += table_[i * steps_ + begin + j];
    out[i] = s;
  }
  return out;
}

void BrownianPath::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  detail::write_magic(out, "LSW1");
  detail::write_u64(out, modes_);
  detail::write_f64(out, dt_fine_);
  detail::write_f64(out, horizon_);
  detail::write_u64(out, seed_);
  for (double v : table_) detail::write_f64(out, v);
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

BrownianPath BrownianPath::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  detail::expect_magic(in, "LSW1");
  BrownianPath p;
  p.modes_ = detail::read_u64(in, "mode count");
  p.dt_fine_ = detail::read_f64(in, "dt_fine");
  p.horizon_ = detail::read_f64(in, "horizon");
  p.seed_ = detail::read_u64(in, "seed");
  if (!(p.dt_fine_ > 0.0) || !(p.horizon_ >= 0.0)) {
    throw Error(ErrorCode::format_error, "invalid Brownian header");
  }
  const double ratio = p.horizon_ / p.dt_fine_;
  const double nearest = std::round(ratio);
  p.steps_ = static_cast<std::size_t>(std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)
                                          ? nearest
                                          : std::ceil(ratio));
  p.table_.resize(p.modes_ * p.steps_);
  for (auto& v : p.table_) v = detail::read_f64(in, "increment table");
  return p;
}

// ---------------------------------------------------------------------------
// Noise kernels

ScalarField ito_correction(const NoiseBasis& basis, const ScalarField& omega) {
  ScalarField out(omega.grid());
  if (basis.empty()) return out;
  const auto grad = gradient(omega);
  for (const auto& xi : basis.fields) {
    out.add_scaled(0.5, lie_derivative(xi, lie_derivative(xi, grad)));
  }
  return out;
}

ScalarField transport_increment(const NoiseBasis& basis, const ScalarField& omega,
                                std::span<const double> dW) {
  if (dW.size() != basis.size()) {
    throw Error(ErrorCode::invalid_argument, "increment vector has " + std::to_string(dW.size()) +
                                                 " entries, basis has " +
                                                 std::to_string(basis.size()));
  }
  ScalarField out(omega.grid());
  if (basis.empty()) return out;
  const auto grad = gradient(omega);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (dW[i] == 0.0) continue;
    out.add_scaled(dW[i], lie_derivative(basis.fields[i], grad));
  }
  return out;
}

}  // namespace lakesim
