#include "lakesim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "binary_io.hpp"
#include "lakesim/oracle.hpp"
#include "parallel.hpp"

namespace lakesim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void config_fail(std::string_view key, const std::string& what) {
  throw Error(ErrorCode::config_error, "config key '" + std::string(key) + "': " + what);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) config_fail(key, "expected a finite number, got '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) config_fail(key, "expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) config_fail(key, "expected an integer, got '" + std::string(text) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  config_fail(key, "expected true or false, got '" + std::string(text) + "'");
}

template <class Enum>
struct EnumName {
  Enum value;
  std::string_view name;
};

constexpr EnumName<BathymetryFamily> kBathNames[] = {{BathymetryFamily::constant, "constant"},
                                                     {BathymetryFamily::single_harmonic, "single_harmonic"},
                                                     {BathymetryFamily::double_harmonic, "double_harmonic"}};
constexpr EnumName<CutoffNorm> kCutoffNames[] = {{CutoffNorm::velocity_k_norm, "velocity_k"},
                                                 {CutoffNorm::vorticity_km1_norm, "vorticity_km1"}};
constexpr EnumName<Integrator> kIntegratorNames[] = {{Integrator::ito_em, "ito_em"},
                                                     {Integrator::strat_heun, "strat_heun"}};
constexpr EnumName<InitialFamily> kInitialNames[] = {{InitialFamily::random, "random"},
                                                     {InitialFamily::taylor_green, "taylor_green"},
                                                     {InitialFamily::single_mode, "single_mode"},
                                                     {InitialFamily::cellular, "cellular"},
                                                     {InitialFamily::shear, "shear"}};

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view key, std::string_view text, const EnumName<Enum> (&names)[N]) {
  std::string options;
  for (const auto& e : names) {
    if (e.name == text) return e.value;
    options += (options.empty() ? "" : "|") + std::string(e.name);
  }
  config_fail(key, "expected one of " + options + ", got '" + std::string(text) + "'");
}

template <class Enum, std::size_t N>
std::string enum_name(Enum v, const EnumName<Enum> (&names)[N]) {
  for (const auto& e : names) {
    if (e.value == v) return std::string(e.name);
  }
  return "?";
}

void require(bool ok, std::string_view key, const std::string& what) {
  if (!ok) config_fail(key, what);
}

struct Key {
  std::string_view name;
  std::string_view help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Field-level ranges; relations between keys are checked in validate().
const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    auto real = [&t](std::string_view name, std::string_view help, double RunConfig::*field,
                     std::function<bool(double)> ok, std::string range) {
      t.push_back({name, help,
                   [=](RunConfig& c, std::string_view v) {
                     const double x = parse_double(name, v);
                     require(ok(x), name, "must be " + range);
                     c.*field = x;
                   },
                   [=](const RunConfig& c) { return format_double(c.*field); }});
    };
    auto integer = [&t](std::string_view name, std::string_view help, int RunConfig::*field, int lo, int hi) {
      t.push_back({name, help,
                   [=](RunConfig& c, std::string_view v) {
                     const int x = parse_int(name, v);
                     require(x >= lo && x <= hi, name,
                             "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                     c.*field = x;
                   },
                   [=](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    auto count = [&t](std::string_view name, std::string_view help, std::size_t RunConfig::*field,
                      std::uint64_t lo, std::uint64_t hi) {
      t.push_back({name, help,
                   [=](RunConfig& c, std::string_view v) {
                     const auto x = parse_unsigned(name, v);
                     require(x >= lo && x <= hi, name,
                             "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                     c.*field = static_cast<std::size_t>(x);
                   },
                   [=](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    auto seed = [&t](std::string_view name, std::string_view help, std::uint64_t RunConfig::*field) {
      t.push_back({name, help, [=](RunConfig& c, std::string_view v) { c.*field = parse_unsigned(name, v); },
                   [=](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    auto text = [&t](std::string_view name, std::string_view help, std::string RunConfig::*field) {
      t.push_back({name, help,
                   [=](RunConfig& c, std::string_view v) {
                     require(v.find_first_of("#\n") == std::string_view::npos, name, "must not contain '#' or newlines");
                     c.*field = std::string(v);
                   },
                   [=](const RunConfig& c) { return c.*field; }});
    };
    auto positive = [](double x) { return x > 0.0; };
    auto nonneg = [](double x) { return x >= 0.0; };
    auto any = [](double) { return true; };

    t.push_back({"n", "grid points per side, power of two in [8, 1024] (required)",
                 [](RunConfig& c, std::string_view v) {
                   const auto x = parse_unsigned("n", v);
                   require(x >= 8 && x <= 1024 && (x & (x - 1)) == 0, "n", "must be a power of two in [8, 1024]");
                   c.n = static_cast<std::size_t>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.n); }});
    real("T", "final time, a multiple of dt (required)", &RunConfig::T, nonneg, ">= 0");
    real("dt", "time step (required)", &RunConfig::dt, positive, "> 0");
    real("dt_fine", "Brownian table step dividing dt; 0 means dt", &RunConfig::dt_fine, nonneg, ">= 0");
    seed("seed", "Brownian seed (required)", &RunConfig::seed);
    integer("k", "Sobolev index", &RunConfig::k, 2, 6);
    real("delta", "aspect ratio", &RunConfig::delta, nonneg, ">= 0");
    real("nu", "viscosity for run and continuity", &RunConfig::nu, nonneg, ">= 0");
    t.push_back({"bathymetry", "constant|single_harmonic|double_harmonic",
                 [](RunConfig& c, std::string_view v) { c.bathymetry = parse_enum("bathymetry", v, kBathNames); },
                 [](const RunConfig& c) { return enum_name(c.bathymetry, kBathNames); }});
    real("bath_mean", "mean depth", &RunConfig::bath_mean, positive, "> 0");
    real("bath_amp1", "first harmonic amplitude", &RunConfig::bath_amp1, any, "finite");
    integer("bath_kx1", "first harmonic x1 wavenumber", &RunConfig::bath_kx1, -16, 16);
    integer("bath_ky1", "first harmonic x2 wavenumber", &RunConfig::bath_ky1, -16, 16);
    real("bath_phase1", "first harmonic phase", &RunConfig::bath_phase1, any, "finite");
    real("bath_amp2", "second harmonic amplitude", &RunConfig::bath_amp2, any, "finite");
    integer("bath_kx2", "second harmonic x1 wavenumber", &RunConfig::bath_kx2, -16, 16);
    integer("bath_ky2", "second harmonic x2 wavenumber", &RunConfig::bath_ky2, -16, 16);
    real("bath_phase2", "second harmonic phase", &RunConfig::bath_phase2, any, "finite");
    real("bath_floor", "smallest admissible b_min", &RunConfig::bath_floor, positive, "> 0");
    count("noise_m", "number of noise fields", &RunConfig::noise_m, 0, 256);
    real("noise_p", "amplitude decay exponent", &RunConfig::noise_p, positive, "> 0");
    real("noise_scale", "amplitude scale", &RunConfig::noise_scale, nonneg, ">= 0");
    real("noise_extra_constant_x", "append the constant field (c, 0) when c != 0", &RunConfig::noise_extra_constant_x,
         any, "finite");
    real("R", "truncation radius", &RunConfig::R, positive, "> 0");
    real("C", "Sobolev constant of the stopping time and the continuity weight", &RunConfig::C, positive, "> 0");
    t.push_back({"cutoff_norm", "velocity_k|vorticity_km1",
                 [](RunConfig& c, std::string_view v) { c.cutoff_norm = parse_enum("cutoff_norm", v, kCutoffNames); },
                 [](const RunConfig& c) { return enum_name(c.cutoff_norm, kCutoffNames); }});
    t.push_back({"integrator", "ito_em|strat_heun",
                 [](RunConfig& c, std::string_view v) { c.integrator = parse_enum("integrator", v, kIntegratorNames); },
                 [](const RunConfig& c) { return enum_name(c.integrator, kIntegratorNames); }});
    count("cascade_levels", "viscous cascade levels n_max", &RunConfig::cascade_levels, 1, 64);
    t.push_back({"freeze_level_zero", "level 1 advects with K omega0 held fixed",
                 [](RunConfig& c, std::string_view v) { c.freeze_level_zero = parse_bool("freeze_level_zero", v); },
                 [](const RunConfig& c) { return std::string(c.freeze_level_zero ? "true" : "false"); }});
    count("paths", "Monte Carlo paths", &RunConfig::paths, 1, 100000);
    real("epsilon", "initial perturbation size for continuity", &RunConfig::epsilon, nonneg, ">= 0");
    t.push_back({"ic", "random|taylor_green|single_mode|cellular|shear",
                 [](RunConfig& c, std::string_view v) { c.ic = parse_enum("ic", v, kInitialNames); },
                 [](const RunConfig& c) { return enum_name(c.ic, kInitialNames); }});
    real("ic_amplitude", "initial vorticity amplitude", &RunConfig::ic_amplitude, any, "finite");
    integer("ic_modes", "largest wavenumber of the initial vorticity", &RunConfig::ic_modes, 1, 64);
    seed("ic_seed", "seed of the random initial vorticity and perturbation", &RunConfig::ic_seed);
    real("tolerance", "stream solver relative residual", &RunConfig::tolerance, positive, "> 0");
    text("out", "output directory; empty writes to stdout", &RunConfig::out);
    text("initial_snapshot", "snapshot whose first field replaces the initial vorticity",
         &RunConfig::initial_snapshot);
    text("brownian_file", "Brownian table file replacing the seeded table", &RunConfig::brownian_file);
    return t;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

bool is_multiple(double big, double small) {
  const double ratio = big / small;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

void validate(const RunConfig& c) {
  require(is_multiple(c.T, c.dt), "T", "must be an integer multiple of dt");
  if (c.dt_fine > 0.0) {
    require(c.dt_fine <= c.dt && is_multiple(c.dt, c.dt_fine), "dt_fine", "must divide dt");
  }
  double b_min = c.bath_mean;
  if (c.bathymetry != BathymetryFamily::constant) b_min -= std::abs(c.bath_amp1);
  if (c.bathymetry == BathymetryFamily::double_harmonic) b_min -= std::abs(c.bath_amp2);
  require(b_min >= c.bath_floor, "bath_floor",
          "analytic b_min = " + format_double(b_min) + " lies below the floor");
  const int cap = static_cast<int>(c.n / 3);
  if (c.bathymetry != BathymetryFamily::constant) {
    require(std::max(std::abs(c.bath_kx1), std::abs(c.bath_ky1)) <= cap, "bath_kx1",
            "harmonic must be resolved (|k| <= n/3)");
  }
  if (c.bathymetry == BathymetryFamily::double_harmonic) {
    require(std::max(std::abs(c.bath_kx2), std::abs(c.bath_ky2)) <= cap, "bath_kx2",
            "harmonic must be resolved (|k| <= n/3)");
  }
  require(c.ic_modes <= cap, "ic_modes", "must be <= n/3");
}

}  // namespace

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const Key* k = find_key(key);
  if (k == nullptr) config_fail(key, "unknown key");
  RunConfig next = config;
  k->set(next, trim(value));
  validate(next);
  config = std::move(next);
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config_error, "config line '" + body + "' is not of the form key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const Key* k = find_key(key);
    if (k == nullptr) config_fail(key, "unknown key");
    if (!seen.insert(key).second) config_fail(key, "given more than once");
    k->set(config, value);
  }
  for (std::string_view required : {"n", "T", "dt", "seed"}) {
    if (seen.find(required) == seen.end()) config_fail(required, "missing required key");
  }
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) {
    out += std::string(k.name) + " = " + k.get(config) + "\n";
  }
  return out;
}

std::string config_help() {
  const RunConfig defaults;
  std::string out = "Config keys (key = value, # comments):\n";
  for (const auto& k : keys()) {
    out += "  " + std::string(k.name) + " (default " + k.get(defaults) + "): " + std::string(k.help) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders

Bathymetry make_bathymetry(const RunConfig& config, std::size_t n) {
  BathymetryParams p;
  p.family = config.bathymetry;
  p.mean = config.bath_mean;
  p.first = {config.bath_amp1, config.bath_kx1, config.bath_ky1, config.bath_phase1};
  p.second = {config.bath_amp2, config.bath_kx2, config.bath_ky2, config.bath_phase2};
  p.delta = config.delta;
  p.floor = config.bath_floor;
  return Bathymetry::from_params(GridSpec(n), p);
}

NoiseBasis make_noise(const RunConfig& config, const Bathymetry& bath) {
  auto basis = build_noise_basis(bath, config.noise_m, config.noise_p, config.noise_scale);
  if (config.noise_extra_constant_x != 0.0) {
    const auto& g = bath.grid();
    basis.fields.push_back(VectorField{ScalarField(g, config.noise_extra_constant_x), ScalarField(g)});
    basis.amplitudes.push_back(std::abs(config.noise_extra_constant_x));
  }
  return basis;
}

Model make_model(const RunConfig& config) {
  auto bath = make_bathymetry(config, config.n);
  auto noise = make_noise(config, bath);
  Model model{EllipticOperator(std::move(bath)), std::move(noise),
              TruncationConfig{config.R, config.cutoff_norm, SobolevIndex(config.k)}, config.nu,
              SolverOptions{config.tolerance, 0}};
  return model;
}

ScalarField make_initial_vorticity(const RunConfig& config, const Bathymetry& bath) {
  const auto& g = bath.grid();
  if (!config.initial_snapshot.empty()) {
    auto snap = read_snapshot(config.initial_snapshot);
    if (snap.fields.empty()) throw Error(ErrorCode::format_error, "snapshot holds no fields");
    if (!(snap.fields.front().grid() == g)) {
      throw Error(ErrorCode::grid_mismatch, "snapshot grid differs from config n");
    }
    return std::move(snap.fields.front());
  }
  const double a = config.ic_amplitude;
  const double k = static_cast<double>(config.ic_modes);
  ScalarField omega(g);
  switch (config.ic) {
    case InitialFamily::random:
      omega = a * random_band_limited(g, config.ic_modes, config.ic_seed);
      break;
    case InitialFamily::taylor_green:
      omega = ScalarField::sample(g, [&](double x1, double x2) {
        return a * (std::sin(kTwoPi * k * x1) + std::sin(kTwoPi * k * x2));
      });
      break;
    case InitialFamily::single_mode:
      omega = ScalarField::sample(g, [&](double x1, double) { return a * std::sin(kTwoPi * k * x1); });
      break;
    case InitialFamily::cellular:
      omega = ScalarField::sample(g, [&](double x1, double x2) {
        return a * std::sin(kTwoPi * k * x1) * std::sin(kTwoPi * k * x2);
      });
      break;
    case InitialFamily::shear:
      omega = ScalarField::sample(g, [&](double x1, double) {
        return a * (std::sin(kTwoPi * x1) + 0.5 * std::cos(2.0 * kTwoPi * x1));
      });
      break;
  }
  omega -= ScalarField(g, weighted_mean(omega, bath));
  return omega;
}

double effective_dt_fine(const RunConfig& config) { return config.dt_fine > 0.0 ? config.dt_fine : config.dt; }

BrownianPath make_brownian_path(const RunConfig& config, std::size_t modes, std::uint64_t seed) {
  if (!config.brownian_file.empty()) {
    auto path = BrownianPath::load(config.brownian_file);
    if (path.modes() < modes) {
      throw Error(ErrorCode::invalid_argument, "Brownian file has fewer modes than the noise basis");
    }
    return path;
  }
  return BrownianPath(seed, modes, effective_dt_fine(config), config.T);
}

// ---------------------------------------------------------------------------
// Files

void write_snapshot(const std::filesystem::path& path, double t, const std::vector<ScalarField>& fields) {
  if (fields.empty()) throw Error(ErrorCode::invalid_argument, "snapshot needs at least one field");
  const auto grid = fields.front().grid();
  for (const auto& f : fields) require_same_grid(grid, f.grid());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write snapshot " + path.string());
  detail::write_magic(out, "LSF1");
  detail::write_u64(out, grid.n());
  detail::write_f64(out, t);
  detail::write_u64(out, fields.size());
  for (const auto& f : fields) {
    for (double v : f.values()) detail::write_f64(out, v);
  }
  if (!out) throw Error(ErrorCode::io_error, "failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open snapshot " + path.string());
  detail::expect_magic(in, "LSF1");
  const auto n = detail::read_u64(in, "snapshot n");
  const double t = detail::read_f64(in, "snapshot t");
  const auto count = detail::read_u64(in, "snapshot field count");
  if (n < 8 || n > 4096 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::format_error, "snapshot header has invalid n = " + std::to_string(n));
  }
  if (count == 0 || count > 1024) {
    throw Error(ErrorCode::format_error, "snapshot header has invalid field count " + std::to_string(count));
  }
  const GridSpec grid(static_cast<std::size_t>(n));
  Snapshot snap{t, {}};
  for (std::uint64_t f = 0; f < count; ++f) {
    std::vector<double> values(grid.points());
    for (auto& v : values) v = detail::read_f64(in, "snapshot payload");
    snap.fields.emplace_back(grid, std::move(values));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::format_error, "snapshot has trailing bytes after the payload");
  }
  return snap;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << kCsvHeader << "\n" << "t,l2b,linf,hk,divres,cutoff,stopped\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.l2b, r.linf, r.hk, r.divres,
                  r.cutoff, r.stopped ? 1 : 0);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Suites

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* SuiteReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string SuiteReport::to_json() const {
  nlohmann::json doc;
  doc["passed"] = passed();
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j;
    j["name"] = c.name;
    j["measured"] = std::isfinite(c.measured) ? nlohmann::json(c.measured) : nlohmann::json(nullptr);
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    if (!c.detail.empty()) j["detail"] = c.detail;
    doc["checks"].push_back(std::move(j));
  }
  return doc.dump(2);
}

namespace {

void add_check(SuiteReport& report, std::string name, double measured, double tolerance,
               std::string detail = {}) {
  const bool ok = std::isfinite(measured) && measured <= tolerance;
  report.checks.push_back({std::move(name), measured, tolerance, ok, std::move(detail)});
}

std::string field_name(std::size_t i) { return "xi_" + std::to_string(i + 1); }

constexpr int kIdentityProbes = 20;

void basis_checks(SuiteReport& report, const Model& model) {
  const auto& bath = model.bath();
  const auto& fields = model.noise.fields;
  double div_worst = 0.0;
  double adj_worst = 0.0;
  double dis_worst = 0.0;
  std::size_t div_at = 0;
  std::size_t adj_at = 0;
  std::size_t dis_at = 0;
  std::vector<ScalarField> probes;
  for (int p = 0; p < kIdentityProbes; ++p) {
    probes.push_back(random_band_limited(bath.grid(), 4, 500 + static_cast<std::uint64_t>(p)));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& xi = fields[i];
    const double div = weighted_div_residual(xi, bath);
    if (div > div_worst) div_worst = div, div_at = i;
    for (int p = 0; p < kIdentityProbes; ++p) {
      const auto& f = probes[static_cast<std::size_t>(p)];
      const auto& g = probes[static_cast<std::size_t>((p + 1) % kIdentityProbes)];
      const auto lf = lie_derivative(xi, f);
      const auto lg = lie_derivative(xi, g);
      const double adj = std::abs(weighted_inner(g, lf, bath) + weighted_inner(lg, f, bath)) /
                         (weighted_sobolev_norm(f, 1, bath) * weighted_sobolev_norm(g, 1, bath));
      if (adj > adj_worst) adj_worst = adj, adj_at = i;
      const double h2 = weighted_sobolev_norm(f, 2, bath);
      const double dis = std::abs(weighted_inner(f, lie_derivative(xi, lf), bath) + weighted_inner(lf, lf, bath)) /
                         (h2 * h2);
      if (dis > dis_worst) dis_worst = dis, dis_at = i;
    }
  }
  const bool empty = fields.empty();
  add_check(report, "basis_divergence", div_worst, kBasisDivergenceTolerance, empty ? "empty basis" : "worst " + field_name(div_at));
  add_check(report, "adjointness", adj_worst, 1e-9, empty ? "empty basis" : "worst " + field_name(adj_at));
  add_check(report, "dissipation", dis_worst, 1e-9, empty ? "empty basis" : "worst " + field_name(dis_at));
}

void operator_checks(SuiteReport& report, const Model& model) {
  const auto& bath = model.bath();
  const auto& op = model.op;
  double div_worst = 0.0;
  double closure_worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto omega = random_compatible_vorticity(bath, 4, 600 + s);
    const auto sol = op.solve(omega, model.solver);
    const auto u = weighted_perp_gradient(sol.psi, bath);
    div_worst = std::max(div_worst, weighted_div_residual(u, bath));
    closure_worst = std::max(closure_worst, closure_residual(op, u, omega));
  }
  add_check(report, "incompressibility_construction", div_worst, 1e-9);
  add_check(report, "closure", closure_worst, 10.0 * model.solver.tolerance);

  double sym = 0.0;
  double pos = 0.0;
  double proj = 0.0;
  const double d2 = bath.delta() * bath.delta();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto u = weighted_perp_gradient(random_band_limited(bath.grid(), 4, 700 + s), bath);
    const auto v = weighted_perp_gradient(random_band_limited(bath.grid(), 4, 800 + s), bath);
    const auto mu = apply_M(u, bath);
    const auto mv = apply_M(v, bath);
    const double scale = std::sqrt(weighted_inner(u, u, bath) * weighted_inner(v, v, bath));
    sym = std::max(sym, std::abs(weighted_inner(mu, v, bath) - weighted_inner(u, mv, bath)) / scale);
    const double uu = weighted_inner(u, u, bath);
    pos = std::max(pos, std::max(0.0, uu - weighted_inner(mu, u, bath)) / uu);
    const auto& gb = bath.grad();
    const auto ub = multiply(u.x, gb.x) + multiply(u.y, gb.y);
    const auto vb = multiply(v.x, gb.x) + multiply(v.y, gb.y);
    const double expected = weighted_inner(u, v, bath) + d2 / 3.0 * weighted_inner(ub, vb, bath);
    proj = std::max(proj, std::abs(weighted_inner(mu, v, bath) - expected) / scale);
  }
  add_check(report, "m_symmetry", sym, 1e-9);
  add_check(report, "m_positivity", pos, 1e-9);
  add_check(report, "m_projected_form", proj, 1e-9);
}

void oracle_check(SuiteReport& report, const RunConfig& config) {
  const auto bath = make_bathymetry(config, 16);
  const EllipticOperator op(bath);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto omega = random_compatible_vorticity(bath, 5, 900 + s);
    const auto fast = op.solve(omega, SolverOptions{1e-12, 0});
    const auto dense = oracle::dense_oracle_solve(bath, omega);
    worst = std::max(worst, weighted_lp_norm(fast.psi - dense.psi, 2.0, bath) / weighted_lp_norm(dense.psi, 2.0, bath));
  }
  add_check(report, "dense_oracle_n16", worst, 1e-8);
}

double relative_drift(const std::vector<DiagnosticsRow>& rows, double DiagnosticsRow::*field) {
  const double base = rows.front().*field;
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.*field - base));
  return base > 0.0 ? worst / base : worst;
}

}  // namespace

double sup_norm_drift(const std::vector<ScalarField>& states) {
  if (states.empty()) return 0.0;
  const double base = interpolant_sup_norm(states.front());
  double worst = 0.0;
  for (const auto& w : states) worst = std::max(worst, std::abs(interpolant_sup_norm(w) - base));
  return base > 0.0 ? worst / base : worst;
}

namespace {

void dynamics_checks(SuiteReport& report, const RunConfig& config, const Model& model) {
  const auto omega0 = make_initial_vorticity(config, model.bath());
  const auto path = make_brownian_path(config, model.noise.size(), config.seed);
  RunOptions opts{config.T, config.dt, config.integrator, config.C, false};

  const auto run = run_path(model, path, omega0, opts);
  double div_worst = 0.0;
  for (const auto& r : run.rows) div_worst = std::max(div_worst, r.divres);
  add_check(report, "incompressibility_trajectory", div_worst, 1e-8);

  Model inviscid = model;
  inviscid.nu = 0.0;
  inviscid.noise = NoiseBasis{};
  RunOptions keep = opts;
  keep.keep_states = true;
  const auto euler = run_path(inviscid, path, omega0, keep);
  add_check(report, "transport_inviscid_l2b", relative_drift(euler.rows, &DiagnosticsRow::l2b), 1e-3);
  add_check(report, "transport_inviscid_linf", sup_norm_drift(euler.states), 1e-3,
            "sup norm of the trigonometric interpolant");

  Model viscous = model;
  viscous.nu = config.nu > 0.0 ? config.nu : 0.1;
  RunOptions heun = opts;
  heun.integrator = Integrator::strat_heun;
  const auto damped = run_path(viscous, path, omega0, heun);
  double growth = 0.0;
  const double base = damped.rows.front().l2b;
  for (const auto& r : damped.rows) growth = std::max(growth, r.l2b / base - 1.0);
  add_check(report, "transport_viscous_bound", growth, 1e-6, "max_t ||omega_t||_{b,2} / ||omega_0||_{b,2} - 1");
}

void euler_reduction_check(SuiteReport& report, const Model& model) {
  const auto& bath = model.bath();
  double worst_u = 0.0;
  double worst_m = 0.0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto omega = random_compatible_vorticity(bath, 6, 950 + s);
    const auto sol = model.op.solve(omega, SolverOptions{1e-12, 0});
    const auto u = weighted_perp_gradient(sol.psi, bath);
    const auto ref = biot_savart_fft(omega);
    worst_u = std::max(worst_u, (u - ref).max_abs() / ref.max_abs());
    worst_m = std::max(worst_m, (apply_M(u, bath) - u).max_abs());
  }
  add_check(report, "euler_reduction_velocity", worst_u, 1e-10);
  add_check(report, "euler_reduction_m_identity", worst_m, 0.0);
}

}  // namespace

SuiteReport run_invariant_suite(const RunConfig& config) {
  SuiteReport report;
  const auto model = make_model(config);
  basis_checks(report, model);
  operator_checks(report, model);
  oracle_check(report, config);
  dynamics_checks(report, config, model);
  if (model.bath().is_constant() && model.bath().delta() == 0.0) euler_reduction_check(report, model);
  return report;
}

PathRun run_single_path(const RunConfig& config) {
  const auto model = make_model(config);
  const auto omega0 = make_initial_vorticity(config, model.bath());
  const auto path = make_brownian_path(config, model.noise.size(), config.seed);
  return PathRun{run_path(model, path, omega0, RunOptions{config.T, config.dt, config.integrator, config.C, false}),
                 estimate_sobolev_constant(model.op, SobolevIndex(config.k))};
}

std::size_t thread_budget() {
  if (const char* env = std::getenv("LAKESIM_THREADS")) {
    const std::string_view text(env);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && ptr == text.data() + text.size() && v > 0) return v;
    throw Error(ErrorCode::config_error, "LAKESIM_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

CascadeOptions cascade_options(const RunConfig& config, bool keep_states) {
  return CascadeOptions{config.cascade_levels, config.T, config.dt, config.integrator, config.C,
                        config.freeze_level_zero, keep_states};
}

Model cascade_model(const RunConfig& config) {
  auto model = make_model(config);
  model.nu = 0.0;
  return model;
}

}  // namespace

ConvergenceReport experiment_viscous_convergence(const RunConfig& config) {
  if (config.cascade_levels < 3) config_fail("cascade_levels", "the convergence study needs at least 3 levels");
  const auto model = cascade_model(config);
  const auto omega0 = make_initial_vorticity(config, model.bath());
  const auto path = make_brownian_path(config, model.noise.size(), config.seed);
  const auto levels = run_viscous_cascade(model, path, omega0, cascade_options(config, true));
  ConvergenceReport report;
  for (const auto& l : levels) report.nu.push_back(l.nu);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    double gap = 0.0;
    for (std::size_t s = 0; s < levels[i].states.size(); ++s) {
      gap = std::max(gap, weighted_lp_norm(levels[i].states[s] - levels[i + 1].states[s], 2.0, model.bath()));
    }
    report.gaps.push_back(gap);
  }
  // Trend from the second gap on: g_{n+1} <= 1.1 g_n for n >= 2.
  for (std::size_t i = 2; i < report.gaps.size(); ++i) {
    if (!(report.gaps[i] <= 1.1 * report.gaps[i - 1])) report.trend_ok = false;
  }
  return report;
}

namespace {

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double count = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= count;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(var / (count - 1.0) / count) : 0.0;
}

}  // namespace

MomentReport experiment_moment_stability(const RunConfig& config) {
  const auto model = cascade_model(config);
  const auto omega0 = make_initial_vorticity(config, model.bath());
  const std::size_t levels = config.cascade_levels;
  std::vector<std::vector<double>> sup4(config.paths, std::vector<double>(levels));
  detail::parallel_for(config.paths, thread_budget(), [&](std::size_t p) {
    const BrownianPath path(config.seed + p, model.noise.size(), effective_dt_fine(config), config.T);
    const auto run = run_viscous_cascade(model, path, omega0, cascade_options(config, false));
    for (std::size_t l = 0; l < levels; ++l) {
      double sup = 0.0;
      for (const auto& r : run[l].rows) sup = std::max(sup, r.hk);
      sup4[p][l] = std::pow(sup, 4);
    }
  });
  MomentReport report;
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> xs;
    for (std::size_t p = 0; p < config.paths; ++p) xs.push_back(sup4[p][l]);
    double m = 0.0;
    double se = 0.0;
    mean_and_stderr(xs, m, se);
    report.mean.push_back(m);
    report.stderr_.push_back(se);
  }
  const auto [lo, hi] = std::minmax_element(report.mean.begin(), report.mean.end());
  report.max_over_min = *hi / *lo;
  report.passed = report.max_over_min <= 1.25;
  return report;
}

namespace {

struct PairTrace {
  std::vector<double> b_integral;
  std::vector<double> distance;
};

// Worst time: the one closest to violating mean <= 1 + 2 SE + allowance.
void summarize(const std::vector<PairTrace>& traces, double c, std::vector<double>& mean,
               std::vector<double>& se, double& statistic, double& statistic_se, bool& passed) {
  const std::size_t times = traces.front().distance.size();
  mean.assign(times, 0.0);
  se.assign(times, 0.0);
  passed = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < times; ++t) {
    std::vector<double> xs;
    for (const auto& tr : traces) xs.push_back(std::exp(-c * tr.b_integral[t]) * tr.distance[t]);
    mean_and_stderr(xs, mean[t], se[t]);
    const double margin = mean[t] - (1.0 + 2.0 * se[t] + kContinuityAllowance);
    if (!(margin <= 0.0)) passed = false;
    if (margin > worst_margin) {
      worst_margin = margin;
      statistic = mean[t];
      statistic_se = se[t];
    }
  }
}

}  // namespace

ContinuityReport experiment_ic_continuity(const RunConfig& config, double epsilon) {
  if (!(epsilon >= 0.0)) config_fail("epsilon", "must be >= 0");
  auto model = make_model(config);
  const auto& bath = model.bath();
  const int k = config.k;
  const auto omega0 = make_initial_vorticity(config, bath);
  auto direction = random_compatible_vorticity(bath, std::min(config.ic_modes, static_cast<int>(config.n / 3)),
                                               config.ic_seed + 7919);
  direction *= 1.0 / weighted_sobolev_norm(direction, k - 1, bath);
  const auto omega0_tilde = omega0 + epsilon * direction;

  ContinuityReport report;
  const bool deterministic = model.noise.empty();
  if (!deterministic && config.paths < 16) config_fail("paths", "stochastic continuity needs at least 16 paths");
  report.paths = deterministic ? 1 : config.paths;
  const RunOptions opts{config.T, config.dt, config.integrator, config.C, true};

  if (epsilon == 0.0) {
    report.degenerate = true;
    const auto path = BrownianPath(config.seed, model.noise.size(), effective_dt_fine(config), config.T);
    const auto a = run_path(model, path, omega0, opts);
    const auto b = run_path(model, path, omega0_tilde, opts);
    double worst = 0.0;
    for (std::size_t s = 0; s < a.states.size(); ++s) {
      worst = std::max(worst, (a.states[s] - b.states[s]).max_abs());
    }
    for (const auto& r : a.rows) report.times.push_back(r.t);
    report.mean.assign(report.times.size(), 0.0);
    report.stderr_.assign(report.times.size(), 0.0);
    report.passed = worst <= 1e-12;
    return report;
  }

  const double d0 = std::pow(weighted_sobolev_norm(omega0 - omega0_tilde, k - 1, bath), 2);
  std::vector<PairTrace> traces(report.paths);
  std::vector<double> times;
  detail::parallel_for(report.paths, thread_budget(), [&](std::size_t p) {
    const BrownianPath path(config.seed + p, model.noise.size(), effective_dt_fine(config), config.T);
    const auto a = run_path(model, path, omega0, opts);
    const auto b = run_path(model, path, omega0_tilde, opts);
    PairTrace tr;
    double integral = 0.0;
    for (std::size_t s = 0; s < a.rows.size(); ++s) {
      if (s > 0) integral += 0.5 * (a.rows[s].t - a.rows[s - 1].t) * (a.rows[s].hk + a.rows[s - 1].hk);
      tr.b_integral.push_back(integral);
      tr.distance.push_back(std::pow(weighted_sobolev_norm(a.states[s] - b.states[s], k - 1, bath), 2) / d0);
    }
    traces[p] = std::move(tr);
    if (p == 0) {
      for (const auto& r : a.rows) times.push_back(r.t);
    }
  });
  report.times = std::move(times);
  summarize(traces, config.C, report.mean, report.stderr_, report.statistic, report.statistic_stderr, report.passed);
  std::vector<double> m;
  std::vector<double> se;
  double stat_se = 0.0;
  bool ok = false;
  summarize(traces, 0.5 * config.C, m, se, report.statistic_half_c, stat_se, ok);
  summarize(traces, 1.5 * config.C, m, se, report.statistic_one_and_half_c, stat_se, ok);

  double stat = 0.0;
  auto holds = [&](double c) {
    summarize(traces, c, m, se, stat, stat_se, ok);
    return ok;
  };
  if (!holds(0.0)) {
    double lo = 0.0;
    double hi = std::max(config.C, 1e-6);
    while (!holds(hi) && hi < 1e6) lo = hi, hi *= 2.0;
    for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (holds(mid) ? hi : lo) = mid;
    }
    report.critical_c = hi;
  }
  return report;
}

}  // namespace lakesim
