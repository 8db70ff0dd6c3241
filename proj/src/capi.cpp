#include "lakesim/lakesim.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lakesim/experiments.hpp"

struct lakesim_config {
  lakesim::RunConfig config;
  std::string text;
};

struct lakesim_report {
  bool passed = true;
  std::string output;
  std::string summary;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

lakesim_status to_status(lakesim::ErrorCode code) {
  switch (code) {
    case lakesim::ErrorCode::invalid_argument: return LAKESIM_INVALID_ARGUMENT;
    case lakesim::ErrorCode::grid_mismatch: return LAKESIM_GRID_MISMATCH;
    case lakesim::ErrorCode::non_finite: return LAKESIM_NON_FINITE;
    case lakesim::ErrorCode::compatibility: return LAKESIM_COMPATIBILITY;
    case lakesim::ErrorCode::not_converged: return LAKESIM_NOT_CONVERGED;
    case lakesim::ErrorCode::cfl_violation: return LAKESIM_CFL_VIOLATION;
    case lakesim::ErrorCode::io_error: return LAKESIM_IO_ERROR;
    case lakesim::ErrorCode::format_error: return LAKESIM_FORMAT_ERROR;
    case lakesim::ErrorCode::config_error: return LAKESIM_CONFIG_ERROR;
    case lakesim::ErrorCode::check_failed: return LAKESIM_CHECK_FAILED;
  }
  return LAKESIM_INTERNAL_ERROR;
}

template <class F>
lakesim_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return LAKESIM_OK;
  } catch (const lakesim::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return LAKESIM_INTERNAL_ERROR;
}

lakesim_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return LAKESIM_INVALID_ARGUMENT;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::filesystem::path output_dir(const lakesim::RunConfig& config) {
  std::filesystem::path dir(config.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw lakesim::Error(lakesim::ErrorCode::io_error, "cannot create output directory " + config.out);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw lakesim::Error(lakesim::ErrorCode::io_error, "cannot write " + path.string());
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void finish(const lakesim::RunConfig& config, lakesim_report& report, const char* output_name) {
  if (config.out.empty()) return;
  const auto dir = output_dir(config);
  write_text(dir / output_name, report.output);
  write_text(dir / "summary.json", report.summary + "\n");
  write_text(dir / "config.cfg", lakesim::serialize_config(config));
}

template <class F>
lakesim_status command(const lakesim_config* config, lakesim_report** out, F&& body) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto report = std::make_unique<lakesim_report>();
    body(config->config, *report);
    *out = report.release();
  });
}

}  // namespace

extern "C" {

const char* lakesim_version(void) { return "1.0.0"; }

const char* lakesim_status_name(lakesim_status status) {
  switch (status) {
    case LAKESIM_OK: return "ok";
    case LAKESIM_INVALID_ARGUMENT: return "invalid_argument";
    case LAKESIM_GRID_MISMATCH: return "grid_mismatch";
    case LAKESIM_NON_FINITE: return "non_finite";
    case LAKESIM_COMPATIBILITY: return "compatibility";
    case LAKESIM_NOT_CONVERGED: return "not_converged";
    case LAKESIM_CFL_VIOLATION: return "cfl_violation";
    case LAKESIM_IO_ERROR: return "io_error";
    case LAKESIM_FORMAT_ERROR: return "format_error";
    case LAKESIM_CONFIG_ERROR: return "config_error";
    case LAKESIM_CHECK_FAILED: return "check_failed";
    case LAKESIM_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

const char* lakesim_last_error(void) { return last_error.c_str(); }

lakesim_status lakesim_config_parse(const char* text, lakesim_config** out) {
  if (text == nullptr) return null_argument("text");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new lakesim_config{lakesim::parse_config(text), {}}; });
}

lakesim_status lakesim_config_load(const char* path, lakesim_config** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new lakesim_config{lakesim::load_config(path), {}}; });
}

lakesim_status lakesim_config_set(lakesim_config* config, const char* key, const char* value) {
  if (config == nullptr) return null_argument("config");
  if (key == nullptr || value == nullptr) return null_argument("key/value");
  return guarded([&] { lakesim::set_config_value(config->config, key, value); });
}

const char* lakesim_config_text(lakesim_config* config) {
  if (config == nullptr) return "";
  config->text = lakesim::serialize_config(config->config);
  return config->text.c_str();
}

const char* lakesim_config_help(void) {
  static const std::string help = lakesim::config_help();
  return help.c_str();
}

void lakesim_config_free(lakesim_config* config) { delete config; }

lakesim_status lakesim_run(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    using namespace lakesim;
    const auto model = make_model(cfg);
    const auto omega0 = make_initial_vorticity(cfg, model.bath());
    const auto path = make_brownian_path(cfg, model.noise.size(), cfg.seed);
    const auto run = run_path(model, path, omega0, RunOptions{cfg.T, cfg.dt, cfg.integrator, cfg.C, false});
    const double c_est = estimate_sobolev_constant(model.op, SobolevIndex(cfg.k));

    std::ostringstream csv;
    write_diagnostics_csv(csv, run.rows);
    report.output = csv.str();
    bool finite = true;
    for (const auto& r : run.rows) {
      finite = finite && std::isfinite(r.t) && std::isfinite(r.l2b) && std::isfinite(r.linf) && std::isfinite(r.hk) &&
               std::isfinite(r.divres) && std::isfinite(r.cutoff);
    }
    report.passed = finite;
    json s;
    s["command"] = "run";
    s["rows"] = run.rows.size();
    s["sobolev_constant_estimate"] = c_est;
    s["stopping_threshold"] = run.monitor.threshold();
    s["stopped_at"] = run.monitor.triggered_at() ? json(*run.monitor.triggered_at()) : json(nullptr);
    s["certified_untruncated"] = run.monitor.certified();
    report.summary = s.dump();

    if (!cfg.out.empty()) {
      const auto dir = output_dir(cfg);
      write_snapshot(dir / "initial.lsf", 0.0, {omega0});
      const auto& st = run.final_state;
      write_snapshot(dir / "final.lsf", st.t, {st.omega, st.psi, st.u.x, st.u.y});
      path.save(dir / "brownian.lsw");
      finish(cfg, report, "diagnostics.csv");
    }
  });
}

lakesim_status lakesim_invariants(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    const auto suite = lakesim::run_invariant_suite(cfg);
    report.passed = suite.passed();
    report.output = suite.to_json() + "\n";
    json s;
    s["command"] = "invariants";
    s["passed"] = report.passed;
    json failed = json::array();
    for (const auto& c : suite.checks) {
      if (!c.passed) failed.push_back(c.name);
    }
    s["failed"] = failed;
    report.summary = s.dump();
    finish(cfg, report, "invariants.json");
  });
}

lakesim_status lakesim_cascade(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    const auto conv = lakesim::experiment_viscous_convergence(cfg);
    std::string csv = std::string(lakesim::kCsvHeader) + "\nlevel,nu,gap\n";
    for (std::size_t i = 0; i < conv.gaps.size(); ++i) {
      csv += std::to_string(i + 1) + "," + csv_number(conv.nu[i]) + "," + csv_number(conv.gaps[i]) + "\n";
    }
    report.output = csv;
    report.passed = conv.trend_ok;
    json s;
    s["command"] = "cascade";
    s["levels"] = cfg.cascade_levels;
    s["trend_ok"] = conv.trend_ok;
    report.summary = s.dump();
    finish(cfg, report, "cascade.csv");
  });
}

lakesim_status lakesim_moments(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    const auto mom = lakesim::experiment_moment_stability(cfg);
    std::string csv = std::string(lakesim::kCsvHeader) + "\nlevel,nu,mean_sup_hk4,stderr\n";
    for (std::size_t i = 0; i < mom.mean.size(); ++i) {
      csv += std::to_string(i + 1) + "," + csv_number(1.0 / static_cast<double>(i + 1)) + "," +
             csv_number(mom.mean[i]) + "," + csv_number(mom.stderr_[i]) + "\n";
    }
    report.output = csv;
    report.passed = mom.passed;
    json s;
    s["command"] = "moments";
    s["paths"] = cfg.paths;
    s["max_over_min"] = finite_or_null(mom.max_over_min);
    s["passed"] = mom.passed;
    report.summary = s.dump();
    finish(cfg, report, "moments.csv");
  });
}

lakesim_status lakesim_continuity(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    const auto r = lakesim::experiment_ic_continuity(cfg, cfg.epsilon);
    std::string csv = std::string(lakesim::kCsvHeader) + "\nt,mean,stderr\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      csv += csv_number(r.times[i]) + "," + csv_number(r.mean[i]) + "," + csv_number(r.stderr_[i]) + "\n";
    }
    report.output = csv;
    report.passed = r.passed;
    json s;
    s["command"] = "continuity";
    s["C"] = cfg.C;
    s["epsilon"] = cfg.epsilon;
    s["paths"] = r.paths;
    s["degenerate"] = r.degenerate;
    s["statistic"] = finite_or_null(r.statistic);
    s["stderr"] = finite_or_null(r.statistic_stderr);
    s["bound"] = 1.0 + 2.0 * r.statistic_stderr + lakesim::kContinuityAllowance;
    s["statistic_half_C"] = finite_or_null(r.statistic_half_c);
    s["statistic_one_and_half_C"] = finite_or_null(r.statistic_one_and_half_c);
    s["critical_C"] = r.critical_c;
    s["passed"] = r.passed;
    report.summary = s.dump();
    finish(cfg, report, "continuity.csv");
  });
}

lakesim_status lakesim_validate_noise(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    const auto bath = lakesim::make_bathymetry(cfg, cfg.n);
    const auto basis = lakesim::make_noise(cfg, bath);
    const auto v = lakesim::validate_basis(basis, bath, lakesim::SobolevIndex(cfg.k));
    report.passed = v.passed;
    json doc;
    doc["fields"] = basis.size();
    doc["div_residuals"] = v.div_residuals;
    doc["tolerance"] = lakesim::kBasisDivergenceTolerance;
    doc["lie_constant"] = v.lie_constant;
    doc["lie_squared_constant"] = v.lie_squared_constant;
    doc["xi_sup_sum"] = v.xi_sup_sum;
    doc["passed"] = v.passed;
    if (!v.passed) doc["failure"] = v.failure;
    report.output = doc.dump(2) + "\n";
    json s;
    s["command"] = "validate-noise";
    s["passed"] = v.passed;
    if (!v.passed) s["failure"] = v.failure;
    report.summary = s.dump();
    finish(cfg, report, "noise.json");
  });
}

lakesim_status lakesim_solve_stream(const lakesim_config* config, lakesim_report** out) {
  return command(config, out, [](const lakesim::RunConfig& cfg, lakesim_report& report) {
    using namespace lakesim;
    const EllipticOperator op(make_bathymetry(cfg, cfg.n));
    const auto omega = make_initial_vorticity(cfg, op.bathymetry());
    const auto sol = solve_stream(op, omega, cfg.tolerance);
    const auto u = weighted_perp_gradient(sol.psi, op.bathymetry());
    report.passed = sol.report.converged;
    json doc;
    doc["iterations"] = sol.report.iterations;
    doc["final_relative_residual"] = sol.report.final_relative_residual;
    doc["converged"] = sol.report.converged;
    doc["div_residual"] = weighted_div_residual(u, op.bathymetry());
    doc["closure_residual"] = finite_or_null(closure_residual(op, u, omega));
    doc["velocity_max"] = u.max_abs();
    report.output = doc.dump(2) + "\n";
    json s;
    s["command"] = "solve-stream";
    s["converged"] = sol.report.converged;
    report.summary = s.dump();
    if (!cfg.out.empty()) {
      write_snapshot(output_dir(cfg) / "stream.lsf", 0.0, {omega, sol.psi, u.x, u.y});
      finish(cfg, report, "stream.json");
    }
  });
}

int lakesim_report_passed(const lakesim_report* report) { return report != nullptr && report->passed ? 1 : 0; }

const char* lakesim_report_output(const lakesim_report* report) {
  return report != nullptr ? report->output.c_str() : "";
}

const char* lakesim_report_summary(const lakesim_report* report) {
  return report != nullptr ? report->summary.c_str() : "";
}

void lakesim_report_free(lakesim_report* report) { delete report; }

lakesim_status lakesim_brownian_write(uint64_t seed, size_t modes, double dt_fine, double horizon, const char* path) {
  if (path == nullptr) return null_argument("path");
  return guarded([&] { lakesim::BrownianPath(seed, modes, dt_fine, horizon).save(path); });
}

lakesim_status lakesim_brownian_files_equal(const char* path_a, const char* path_b, int* equal) {
  if (path_a == nullptr || path_b == nullptr) return null_argument("path");
  if (equal == nullptr) return null_argument("equal");
  return guarded([&] {
    *equal = lakesim::BrownianPath::load(path_a) == lakesim::BrownianPath::load(path_b) ? 1 : 0;
  });
}

lakesim_status lakesim_snapshot_write(const char* path, size_t n, double t, size_t count, const double* data) {
  if (path == nullptr) return null_argument("path");
  if (data == nullptr) return null_argument("data");
  return guarded([&] {
    const lakesim::GridSpec grid(n);
    std::vector<lakesim::ScalarField> fields;
    for (std::size_t f = 0; f < count; ++f) {
      const double* begin = data + f * grid.points();
      fields.emplace_back(grid, std::vector<double>(begin, begin + grid.points()));
    }
    lakesim::write_snapshot(path, t, fields);
  });
}

lakesim_status lakesim_snapshot_info(const char* path, size_t* n, double* t, size_t* count) {
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    const auto snap = lakesim::read_snapshot(path);
    if (n) *n = snap.fields.front().grid().n();
    if (t) *t = snap.t;
    if (count) *count = snap.fields.size();
  });
}

lakesim_status lakesim_snapshot_read(const char* path, double* data, size_t capacity) {
  if (path == nullptr) return null_argument("path");
  if (data == nullptr) return null_argument("data");
  return guarded([&] {
    const auto snap = lakesim::read_snapshot(path);
    const std::size_t points = snap.fields.front().grid().points();
    if (capacity < points * snap.fields.size()) {
      throw lakesim::Error(lakesim::ErrorCode::invalid_argument, "snapshot buffer too small");
    }
    for (std::size_t f = 0; f < snap.fields.size(); ++f) {
      const auto v = snap.fields[f].values();
      std::copy(v.begin(), v.end(), data + f * points);
    }
  });
}

}  // extern "C"
