#pragma once

// Run configuration, file formats, and the invariant and experiment suites
// built on top of the dynamics module.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lakesim/dynamics.hpp"

namespace lakesim {

enum class InitialFamily { random, taylor_green, single_mode, cellular, shear };

/// Flat key = value configuration. Required keys: n, T, dt, seed.
struct RunConfig {
  std::size_t n = 32;
  double T = 0.0;
  double dt = 1e-3;
  /// Finest Brownian step; 0 means dt.
  double dt_fine = 0.0;
  std::uint64_t seed = 0;
  int k = 2;
  double delta = 0.0;
  double nu = 0.0;

  BathymetryFamily bathymetry = BathymetryFamily::constant;
  double bath_mean = 1.0;
  double bath_amp1 = 0.0;
  int bath_kx1 = 1;
  int bath_ky1 = 0;
  double bath_phase1 = 0.0;
  double bath_amp2 = 0.0;
  int bath_kx2 = 0;
  int bath_ky2 = 1;
  double bath_phase2 = 0.0;
  double bath_floor = 0.05;

  std::size_t noise_m = 0;
  double noise_p = 2.0;
  double noise_scale = 0.1;
  /// Appends the constant field (c, 0) to the basis; used to exercise the
  /// failure paths of the validators.
  double noise_extra_constant_x = 0.0;

  double R = 1e6;
  double C = 1.0;
  CutoffNorm cutoff_norm = CutoffNorm::velocity_k_norm;
  Integrator integrator = Integrator::ito_em;
  std::size_t cascade_levels = 3;
  bool freeze_level_zero = true;
  std::size_t paths = 32;
  double epsilon = 1e-3;

  InitialFamily ic = InitialFamily::random;
  double ic_amplitude = 1.0;
  int ic_modes = 4;
  std::uint64_t ic_seed = 1;

  double tolerance = 1e-10;
  std::string out;
  std::string initial_snapshot;
  std::string brownian_file;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ErrorCode::config_error naming the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Applies one key = value override with the same validation as parsing.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
/// Every key, doubles printed with 17 significant digits.
std::string serialize_config(const RunConfig& config);
/// Key reference with defaults.
std::string config_help();

Bathymetry make_bathymetry(const RunConfig& config, std::size_t n);
NoiseBasis make_noise(const RunConfig& config, const Bathymetry& bath);
Model make_model(const RunConfig& config);
ScalarField make_initial_vorticity(const RunConfig& config, const Bathymetry& bath);
double effective_dt_fine(const RunConfig& config);
/// Loads brownian_file when set, otherwise draws a table for `seed`.
BrownianPath make_brownian_path(const RunConfig& config, std::size_t modes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Files

struct Snapshot {
  double t = 0.0;
  std::vector<ScalarField> fields;
};

/// "LSF1" magic word, n, t, field count, then the float64 payload.
void write_snapshot(const std::filesystem::path& path, double t, const std::vector<ScalarField>& fields);
Snapshot read_snapshot(const std::filesystem::path& path);

inline constexpr std::string_view kCsvHeader = "# lake-salt-sim v1";
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows);

// ---------------------------------------------------------------------------
// Suites

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* find(std::string_view name) const;
  std::string to_json() const;
};

SuiteReport run_invariant_suite(const RunConfig& config);

/// max_t | ||omega_t||_inf - ||omega_0||_inf | / ||omega_0||_inf over stored states.
double sup_norm_drift(const std::vector<ScalarField>& states);

struct PathRun {
  RunResult result;
  double sobolev_constant_estimate = 0.0;
};

PathRun run_single_path(const RunConfig& config);

struct ConvergenceReport {
  std::vector<double> nu;
  /// gaps[i] = sup_t ||omega^(i+1) - omega^(i+2)||_{b,2}
  std::vector<double> gaps;
  bool trend_ok = true;
};

ConvergenceReport experiment_viscous_convergence(const RunConfig& config);

struct MomentReport {
  /// Sample mean and standard error of sup_t ||omega^(n)||_{b,k,2}^4 per level.
  std::vector<double> mean;
  std::vector<double> stderr_;
  double max_over_min = 0.0;
  bool passed = false;
};

MomentReport experiment_moment_stability(const RunConfig& config);

struct ContinuityReport {
  std::vector<double> times;
  /// Per-time Monte Carlo mean and standard error of
  /// e^{-C B_t} ||omega_t - tilde omega_t||^2_{b,k-1,2} / ||omega_0 - tilde omega_0||^2_{b,k-1,2}
  std::vector<double> mean;
  std::vector<double> stderr_;
  double statistic = 0.0;
  double statistic_stderr = 0.0;
  /// Statistic recomputed with C scaled by 0.5 and 1.5.
  double statistic_half_c = 0.0;
  double statistic_one_and_half_c = 0.0;
  /// Smallest C for which the bound holds at every recorded time.
  double critical_c = 0.0;
  std::size_t paths = 0;
  bool degenerate = false;
  bool passed = false;
};

inline constexpr double kContinuityAllowance = 0.05;

ContinuityReport experiment_ic_continuity(const RunConfig& config, double epsilon);

/// Worker count for Monte Carlo loops: LAKESIM_THREADS when set, otherwise
/// the hardware concurrency.
std::size_t thread_budget();

}  // namespace lakesim
