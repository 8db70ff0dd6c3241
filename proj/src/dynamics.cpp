#include "lakesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lakesim {

double cutoff_fR(double x, double R) {
  if (!(x >= 0.0)) throw Error(ErrorCode::invalid_argument, "cutoff argument must be >= 0");
  if (x <= R) return 1.0;
  if (x >= R + 1.0) return 0.0;
  const double s = x - R;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

StoppingMonitor::StoppingMonitor(double R, double c_sobolev, SobolevIndex k)
    : threshold_(R / c_sobolev), k_(k) {
  if (!(R > 0.0) || !(c_sobolev > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "stopping monitor needs R > 0 and C > 0");
  }
}

bool StoppingMonitor::record(double t, double norm_km1, double cutoff) {
  if (triggered_at_) return true;
  if (norm_km1 >= threshold_) {
    triggered_at_ = t;
    return true;
  }
  if (cutoff != 1.0) certified_ = false;
  return false;
}

SimState make_state(const Model& model, ScalarField omega, double t, const ScalarField* psi_guess) {
  // The heat factor moves <1, omega>_b when b varies; K sees only the part
  // that is a weighted curl.
  ScalarField source = omega;
  source -= ScalarField(omega.grid(), weighted_mean(omega, model.bath()));
  auto sol = model.op.solve(source, model.solver, psi_guess);
  auto u = weighted_perp_gradient(sol.psi, model.bath());
  return SimState{t, std::move(omega), std::move(sol.psi), std::move(u)};
}

double cutoff_argument(const Model& model, const ScalarField& omega, const VectorField& u) {
  const int k = model.truncation.k.value();
  return model.truncation.cutoff_norm == CutoffNorm::velocity_k_norm
             ? weighted_sobolev_norm(u, k, model.bath())
             : weighted_sobolev_norm(omega, k - 1, model.bath());
}

ScalarField drift_truncated(const Model& model, const ScalarField& omega, const VectorField& u_adv,
                            double cutoff, double nu) {
  const auto grad = gradient(omega);
  ScalarField out = ito_correction(model.noise, omega);
  if (cutoff != 0.0) out.add_scaled(-cutoff, lie_derivative(u_adv, grad));
  if (nu != 0.0) out.add_scaled(nu, laplacian(omega));
  return out;
}

double cfl_limit(const VectorField& u) {
  return 0.5 * u.grid().spacing() / std::max(u.max_abs(), 1.0);
}

namespace {

void require_step(const VectorField& u_adv, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "time step must be positive");
  const double limit = cfl_limit(u_adv);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << dt << " exceeds " << limit;
    throw Error(ErrorCode::cfl_violation, msg.str());
  }
}

ScalarField noise_sum(const NoiseBasis& noise, const VectorField& grad, std::span<const double> dW) {
  ScalarField out(grad.grid());
  for (std::size_t i = 0; i < noise.size(); ++i) {
    if (dW[i] != 0.0) out.add_scaled(dW[i], lie_derivative(noise.fields[i], grad));
  }
  return out;
}

ScalarField apply_viscosity(ScalarField omega, double nu, double dt) {
  if (nu == 0.0) return omega;
  return heat_semigroup(omega, nu, dt);
}

}  // namespace

ScalarField advance_vorticity(const Model& model, const ScalarField& omega,
                              const VectorField& u_adv, double cutoff, double nu, double dt,
                              std::span<const double> dW, Integrator integrator) {
  require_step(u_adv, dt);
  if (dW.size() < model.noise.size()) {
    throw Error(ErrorCode::invalid_argument, "fewer Brownian increments than noise fields");
  }
  const auto grad = gradient(omega);
  ScalarField next = omega;
  if (cutoff != 0.0) next.add_scaled(-dt * cutoff, lie_derivative(u_adv, grad));

  if (integrator == Integrator::ito_em) {
    for (std::size_t i = 0; i < model.noise.size(); ++i) {
      const auto& xi = model.noise.fields[i];
      const auto first = lie_derivative(xi, grad);
      if (dW[i] != 0.0) next.add_scaled(-dW[i], first);
      next.add_scaled(0.5 * dt, lie_derivative(xi, first));
    }
  } else if (!model.noise.empty()) {
    const auto g0 = noise_sum(model.noise, grad, dW);
    const auto predictor = omega - g0;
    const auto g1 = noise_sum(model.noise, gradient(predictor), dW);
    next.add_scaled(-0.5, g0);
    next.add_scaled(-0.5, g1);
  }
  return apply_viscosity(std::move(next), nu, dt);
}

namespace {

SimState step_with(const Model& model, const SimState& state, double dt,
                   std::span<const double> dW, Integrator integrator,
                   const ScalarField* psi_guess = nullptr) {
  const double cutoff = cutoff_fR(cutoff_argument(model, state.omega, state.u), model.truncation.R);
  auto next = advance_vorticity(model, state.omega, state.u, cutoff, model.nu, dt, dW, integrator);
  return make_state(model, std::move(next), state.t + dt, psi_guess ? psi_guess : &state.psi);
}

// Linear extrapolation of the stream function warm-starts the next solve.
ScalarField extrapolate(const ScalarField& current, const std::optional<ScalarField>& previous) {
  if (!previous) return current;
  ScalarField guess = 2.0 * current;
  guess -= *previous;
  return guess;
}

}  // namespace

SimState step_ito_em(const Model& model, const SimState& state, double dt,
                     std::span<const double> dW) {
  return step_with(model, state, dt, dW, Integrator::ito_em);
}

SimState step_stratonovich_heun(const Model& model, const SimState& state, double dt,
                                std::span<const double> dW) {
  return step_with(model, state, dt, dW, Integrator::strat_heun);
}

DiagnosticsRow diagnose(const Model& model, double t, const ScalarField& omega,
                        const VectorField& u, double cutoff, bool stopped) {
  const auto& bath = model.bath();
  DiagnosticsRow row;
  row.t = t;
  row.l2b = weighted_lp_norm(omega, 2.0, bath);
  row.linf = omega.max_abs();
  row.hk = weighted_sobolev_norm(omega, model.truncation.k.value(), bath);
  row.divres = weighted_div_residual(u, bath);
  row.cutoff = cutoff;
  row.stopped = stopped;
  return row;
}

std::size_t step_count(double T, double dt) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "need T >= 0 and dt > 0");
  const double ratio = T / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::invalid_argument, "T is not an integer multiple of dt");
  }
  return static_cast<std::size_t>(nearest);
}

namespace {

void require_compatible(const Model& model, const ScalarField& omega0) {
  const auto& bath = model.bath();
  const double mean = weighted_inner(ScalarField(omega0.grid(), 1.0), omega0, bath);
  if (std::abs(mean) > 1e-8 * std::max(1.0, weighted_lp_norm(omega0, 2.0, bath))) {
    std::ostringstream msg;
    msg << "initial vorticity violates compatibility: <1, omega>_b = " << mean;
    throw Error(ErrorCode::compatibility, msg.str());
  }
}

std::span<const double> leading(const std::vector<double>& v, std::size_t m) {
  return std::span<const double>(v.data(), std::min(m, v.size()));
}

std::vector<double> path_increments(const BrownianPath& path, const NoiseBasis& noise,
                                    std::size_t step, double dt) {
  if (noise.empty()) return {};
  if (path.modes() < noise.size()) {
    throw Error(ErrorCode::invalid_argument, "Brownian path has fewer modes than the noise basis");
  }
  return path.increments(step, dt);
}

}  // namespace

RunResult run_path(const Model& model, const BrownianPath& path, ScalarField omega0,
                   const RunOptions& options) {
  const std::size_t steps = step_count(options.T, options.dt);
  const int k = model.truncation.k.value();
  require_compatible(model, omega0);
  RunResult result{{}, {}, make_state(model, std::move(omega0)),
                   StoppingMonitor(model.truncation.R, options.c_sobolev, model.truncation.k)};
  auto& state = result.final_state;

  auto observe = [&]() {
    const double cutoff = cutoff_fR(cutoff_argument(model, state.omega, state.u), model.truncation.R);
    const double norm_km1 = weighted_sobolev_norm(state.omega, k - 1, model.bath());
    const bool stopped = result.monitor.record(state.t, norm_km1, cutoff);
    result.rows.push_back(diagnose(model, state.t, state.omega, state.u, cutoff, stopped));
    if (options.keep_states) result.states.push_back(state.omega);
  };

  observe();
  std::optional<ScalarField> previous_psi;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto dW = path_increments(path, model.noise, s, options.dt);
    const auto guess = extrapolate(state.psi, previous_psi);
    previous_psi = state.psi;
    state = step_with(model, state, options.dt, leading(dW, model.noise.size()), options.integrator, &guess);
    // Exact multiples keep time stamps strictly increasing and reproducible.
    state.t = static_cast<double>(s + 1) * options.dt;
    observe();
  }
  return result;
}

std::vector<CascadeLevel> run_viscous_cascade(const Model& model, const BrownianPath& path,
                                              const ScalarField& omega0,
                                              const CascadeOptions& options) {
  if (options.levels < 1) throw Error(ErrorCode::invalid_argument, "cascade needs >= 1 level");
  const std::size_t steps = step_count(options.T, options.dt);
  const auto& bath = model.bath();
  const int k = model.truncation.k.value();
  require_compatible(model, omega0);

  std::vector<std::vector<double>> increments;
  increments.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) increments.push_back(path_increments(path, model.noise, s, options.dt));

  // Advecting velocity and cutoff for the current level at every time level.
  const auto initial = make_state(model, omega0);
  std::vector<VectorField> advect(steps + 1, initial.u);
  std::vector<double> cutoffs(steps + 1,
                              cutoff_fR(cutoff_argument(model, initial.omega, initial.u), model.truncation.R));

  std::vector<CascadeLevel> levels;
  for (std::size_t level = 1; level <= options.levels; ++level) {
    CascadeLevel out;
    out.level = level;
    out.nu = 1.0 / static_cast<double>(level);
    const bool self_advect = level == 1 && !options.freeze_level_zero;

    std::vector<VectorField> own_u;
    std::vector<double> own_cut;
    own_u.reserve(steps + 1);
    own_cut.reserve(steps + 1);

    SimState state = initial;
    std::optional<ScalarField> previous_psi;
    for (std::size_t s = 0; s <= steps; ++s) {
      if (s > 0) {
        const auto& u_adv = self_advect ? own_u.back() : advect[s - 1];
        const double cut = self_advect ? own_cut.back() : cutoffs[s - 1];
        auto next = advance_vorticity(model, state.omega, u_adv, cut, out.nu, options.dt,
                                      leading(increments[s - 1], model.noise.size()),
                                      options.integrator);
        const auto guess = extrapolate(state.psi, previous_psi);
        previous_psi = state.psi;
        state = make_state(model, std::move(next), static_cast<double>(s) * options.dt, &guess);
      }
      const double cut_own = cutoff_fR(cutoff_argument(model, state.omega, state.u), model.truncation.R);
      own_cut.push_back(cut_own);
      own_u.push_back(state.u);
      const double used_cut = self_advect ? cut_own : cutoffs[s];
      const double norm_km1 = weighted_sobolev_norm(state.omega, k - 1, bath);
      const bool stopped = norm_km1 >= model.truncation.R / options.c_sobolev;
      out.rows.push_back(diagnose(model, state.t, state.omega, state.u, used_cut,
                                  stopped || (!out.rows.empty() && out.rows.back().stopped)));
      if (options.keep_states) out.states.push_back(state.omega);
    }
    advect = std::move(own_u);
    cutoffs = std::move(own_cut);
    levels.push_back(std::move(out));
  }
  return levels;
}

double estimate_sobolev_constant(const EllipticOperator& op, SobolevIndex k, int samples,
                                 std::uint64_t seed) {
  const auto& bath = op.bathymetry();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto omega = random_compatible_vorticity(bath, 4, seed + static_cast<std::uint64_t>(s));
    const auto u = velocity_from_vorticity(op, omega);
    const auto gx = gradient(u.x);
    const auto gy = gradient(u.y);
    const double grad_inf = std::max(gx.max_abs(), gy.max_abs());
    best = std::max(best, grad_inf / weighted_sobolev_norm(omega, k.value(), bath));
  }
  return best;
}

}  // namespace lakesim
