#pragma once

// Time integration of the truncated vorticity equation
//
//   d omega + f_R u.grad omega dt + sum_i L_i omega o dW^i = nu Lap omega dt
//
// in Ito (Euler-Maruyama plus correction) or Stratonovich (Heun) form, the
// stopping-time monitor, and the viscous cascade with frozen advecting
// velocities shared across one Brownian path.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lakesim/salt_noise.hpp"
#include "lakesim/stream_solver.hpp"

namespace lakesim {

enum class CutoffNorm { velocity_k_norm, vorticity_km1_norm };
enum class Integrator { ito_em, strat_heun };

struct TruncationConfig {
  double R = 1e6;
  CutoffNorm cutoff_norm = CutoffNorm::velocity_k_norm;
  SobolevIndex k{2};
};

/// 1 on [0, R], 0 on [R+1, inf), quintic smoothstep 1 - s^3 (10 - 15 s + 6 s^2)
/// with s = x - R in between.
double cutoff_fR(double x, double R);

class StoppingMonitor {
 public:
  StoppingMonitor(double R, double c_sobolev, SobolevIndex k);

  double threshold() const noexcept { return threshold_; }
  SobolevIndex sobolev_index() const noexcept { return k_; }

  /// Records one time level. `norm_km1` is ||omega||_{b,k-1,2}; `cutoff` the
  /// f_R value used at that level. Returns the triggered flag.
  bool record(double t, double norm_km1, double cutoff);

  std::optional<double> triggered_at() const noexcept { return triggered_at_; }
  bool triggered() const noexcept { return triggered_at_.has_value(); }
  /// True when f_R evaluated to 1 at every level before the trigger.
  bool certified() const noexcept { return certified_; }

 private:
  double threshold_;
  SobolevIndex k_;
  std::optional<double> triggered_at_;
  bool certified_ = true;
};

struct Model {
  EllipticOperator op;
  NoiseBasis noise;
  TruncationConfig truncation;
  double nu = 0.0;
  SolverOptions solver;

  const Bathymetry& bath() const noexcept { return op.bathymetry(); }
};

struct SimState {
  double t = 0.0;
  ScalarField omega;
  ScalarField psi;
  VectorField u;
};

/// Solves for the velocity of omega minus its weighted mean (warm-started from
/// `psi_guess`).
SimState make_state(const Model& model, ScalarField omega, double t = 0.0,
                    const ScalarField* psi_guess = nullptr);

/// Argument of f_R: ||u||_{b,k,2} or ||omega||_{b,k-1,2} per the config.
double cutoff_argument(const Model& model, const ScalarField& omega, const VectorField& u);

/// nu Lap omega - f_R u.grad omega + 1/2 sum_i L_i^2 omega
ScalarField drift_truncated(const Model& model, const ScalarField& omega, const VectorField& u_adv,
                            double cutoff, double nu);

/// 0.5 dx / max(||u||_inf, 1)
double cfl_limit(const VectorField& u);

/// One step of either integrator with an externally supplied advecting
/// velocity and cutoff value; viscosity enters through the exact heat factor.
ScalarField advance_vorticity(const Model& model, const ScalarField& omega,
                              const VectorField& u_adv, double cutoff, double nu, double dt,
                              std::span<const double> dW, Integrator integrator);

SimState step_ito_em(const Model& model, const SimState& state, double dt,
                     std::span<const double> dW);
SimState step_stratonovich_heun(const Model& model, const SimState& state, double dt,
                                std::span<const double> dW);

struct DiagnosticsRow {
  double t = 0.0;
  double l2b = 0.0;
  double linf = 0.0;
  double hk = 0.0;
  double divres = 0.0;
  double cutoff = 1.0;
  bool stopped = false;
};

struct RunOptions {
  double T = 0.0;
  double dt = 1e-3;
  Integrator integrator = Integrator::ito_em;
  double c_sobolev = 1.0;
  bool keep_states = false;
};

struct RunResult {
  std::vector<DiagnosticsRow> rows;
  /// omega at every step when RunOptions::keep_states is set.
  std::vector<ScalarField> states;
  SimState final_state;
  StoppingMonitor monitor;
};

/// Number of steps of size dt in [0, T]; throws unless T is a multiple of dt.
std::size_t step_count(double T, double dt);

RunResult run_path(const Model& model, const BrownianPath& path, ScalarField omega0,
                   const RunOptions& options);

struct CascadeOptions {
  std::size_t levels = 3;
  double T = 0.0;
  double dt = 1e-3;
  Integrator integrator = Integrator::ito_em;
  double c_sobolev = 1.0;
  /// Level 1 advects with K omega0 held fixed in time; otherwise with its own
  /// evolving velocity.
  bool freeze_level_zero = true;
  bool keep_states = false;
};

struct CascadeLevel {
  std::size_t level = 1;
  double nu = 1.0;
  std::vector<DiagnosticsRow> rows;
  std::vector<ScalarField> states;
};

std::vector<CascadeLevel> run_viscous_cascade(const Model& model, const BrownianPath& path,
                                              const ScalarField& omega0,
                                              const CascadeOptions& options);

/// max over probe vorticities of ||grad u||_inf / ||omega||_{b,k,2}.
double estimate_sobolev_constant(const EllipticOperator& op, SobolevIndex k, int samples = 100,
                                 std::uint64_t seed = 41);

DiagnosticsRow diagnose(const Model& model, double t, const ScalarField& omega,
                        const VectorField& u, double cutoff, bool stopped);

}  // namespace lakesim
