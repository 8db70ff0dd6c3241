#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "lakesim/experiments.hpp"
#include "test_support.hpp"

namespace lakesim {
namespace {

using testing::kTwoPi;

const std::filesystem::path kDataDir = LAKESIM_TEST_DATA_DIR;

constexpr const char* kMinimal = "n = 16\nT = 0.01\ndt = 1e-3\nseed = 3\n";

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lakesim_test_experiments";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Message of the config error thrown by `body`; fails the test otherwise.
template <class F>
std::string config_error_of(F&& body) {
  try {
    body();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return {};
}

RunConfig standard() { return load_config(kDataDir / "default.cfg"); }

std::string csv_of(const RunResult& run) {
  std::ostringstream out;
  write_diagnostics_csv(out, run.rows);
  return out.str();
}

TEST(ParseConfig, MinimalConfigFillsDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.n, 16u);
  EXPECT_DOUBLE_EQ(c.T, 0.01);
  EXPECT_EQ(c.seed, 3u);
  RunConfig expected;
  expected.n = 16;
  expected.T = 0.01;
  expected.dt = 1e-3;
  expected.seed = 3;
  EXPECT_EQ(c, expected);
}

TEST(ParseConfig, CommentsAndBlankLinesIgnored) {
  const auto c = parse_config("# header\n\n  n = 16   # trailing\nT = 0\ndt = 1e-3\nseed = 1\n");
  EXPECT_EQ(c.n, 16u);
  EXPECT_EQ(c.T, 0.0);
}

TEST(ParseConfig, NonPowerOfTwoNamesN) {
  const auto msg = config_error_of([] { parse_config("n = 100\nT = 0\ndt = 1e-3\nseed = 1\n"); });
  EXPECT_NE(msg.find("'n'"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownDuplicateAndMissingKeysAreNamed) {
  auto msg = config_error_of([] { parse_config(std::string(kMinimal) + "viscosity = 1\n"); });
  EXPECT_NE(msg.find("'viscosity'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config(std::string(kMinimal) + "seed = 4\n"); });
  EXPECT_NE(msg.find("'seed'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config("n = 16\nT = 0\ndt = 1e-3\n"); });
  EXPECT_NE(msg.find("'seed'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config(std::string(kMinimal) + "delta\n"); });
  EXPECT_NE(msg.find("delta"), std::string::npos) << msg;
}

TEST(ParseConfig, OutOfRangeValuesAreNamed) {
  auto msg = config_error_of([] { parse_config(std::string(kMinimal) + "k = 9\n"); });
  EXPECT_NE(msg.find("'k'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config("n = 16\nT = 0.0105\ndt = 1e-3\nseed = 1\n"); });
  EXPECT_NE(msg.find("'T'"), std::string::npos) << msg;
  msg = config_error_of([] {
    parse_config(std::string(kMinimal) + "bathymetry = single_harmonic\nbath_amp1 = 0.99\n");
  });
  EXPECT_NE(msg.find("'bath_floor'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config(std::string(kMinimal) + "integrator = rk4\n"); });
  EXPECT_NE(msg.find("'integrator'"), std::string::npos) << msg;
  msg = config_error_of([] { parse_config(std::string(kMinimal) + "dt = -1\n"); });
  EXPECT_NE(msg.find("'dt'"), std::string::npos) << msg;
}

TEST(ParseConfig, GoldenFileRoundTrips) {
  const auto c = standard();
  EXPECT_EQ(c.n, 32u);
  EXPECT_EQ(c.bathymetry, BathymetryFamily::single_harmonic);
  EXPECT_EQ(c.integrator, Integrator::strat_heun);
  const auto text = serialize_config(c);
  const auto again = parse_config(text);
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_config(again), text);
}

TEST(ParseConfig, SetValueValidatesLikeParsing) {
  auto c = parse_config(kMinimal);
  set_config_value(c, "delta", "0.25");
  EXPECT_EQ(c.delta, 0.25);
  const auto msg = config_error_of([&] { set_config_value(c, "n", "12"); });
  EXPECT_NE(msg.find("'n'"), std::string::npos);
  EXPECT_EQ(c.n, 16u);
}

TEST(ParseConfig, HelpListsEveryKeyWithDefault) {
  const auto help = config_help();
  for (const char* key : {"n ", "T ", "dt ", "seed ", "bathymetry ", "noise_m ", "cascade_levels ", "epsilon "}) {
    EXPECT_NE(help.find(std::string("  ") + key + "(default"), std::string::npos) << key;
  }
}

TEST(Snapshot, RoundTripIsBitwise) {
  GridSpec g(16);
  const auto a = random_band_limited(g, 5, 1);
  auto b = random_band_limited(g, 7, 2);
  b(3, 4) = -0.0;
  b(5, 6) = 1e-310;
  const auto path = scratch("round.lsf");
  write_snapshot(path, 0.375, {a, b});
  const auto snap = read_snapshot(path);
  EXPECT_EQ(snap.t, 0.375);
  ASSERT_EQ(snap.fields.size(), 2u);
  for (std::size_t f = 0; f < 2; ++f) {
    const auto& src = f == 0 ? a : b;
    ASSERT_EQ(snap.fields[f].grid(), g);
    EXPECT_EQ(std::memcmp(snap.fields[f].values().data(), src.values().data(), g.points() * sizeof(double)), 0);
  }
}

TEST(Snapshot, CorruptedMagicAndTruncationAreNamed) {
  GridSpec g(8);
  const auto path = scratch("bad.lsf");
  write_snapshot(path, 0.0, {random_band_limited(g, 2, 1)});
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
  };
  auto expect_format_error = [&](const std::string& needle) {
    try {
      read_snapshot(path);
      ADD_FAILURE() << "no error for " << needle;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::format_error);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto bad = bytes;
  bad[0] = 'X';
  write(bad);
  expect_format_error("magic");
  write(bytes.substr(0, bytes.size() - 8));
  expect_format_error("truncated");
  write(bytes + "extra");
  expect_format_error("trailing");
  EXPECT_THROW(read_snapshot(scratch("missing.lsf")), Error);
}

TEST(Diagnostics, CsvHeaderRowsFiniteAndOrdered) {
  const auto run = run_single_path(standard()).result;
  const auto csv = csv_of(run);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  std::getline(in, line);
  EXPECT_EQ(line, "t,l2b,linf,hk,divres,cutoff,stopped");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, run.rows.size());
  EXPECT_EQ(rows, 101u);
  bool stopped = false;
  for (std::size_t i = 0; i < run.rows.size(); ++i) {
    const auto& r = run.rows[i];
    for (double v : {r.t, r.l2b, r.linf, r.hk, r.divres, r.cutoff}) EXPECT_TRUE(std::isfinite(v));
    if (i > 0) EXPECT_GT(r.t, run.rows[i - 1].t);
    if (stopped) EXPECT_TRUE(r.stopped);
    stopped = r.stopped;
  }
}

TEST(Diagnostics, ZeroHorizonEmitsInitialRowOnly) {
  auto c = standard();
  c.T = 0.0;
  const auto run = run_single_path(c).result;
  ASSERT_EQ(run.rows.size(), 1u);
  EXPECT_EQ(run.rows.front().t, 0.0);
}

TEST(Determinism, IdenticalConfigAndSeedGiveIdenticalCsv) {
  auto c = standard();
  c.T = 0.01;
  EXPECT_EQ(csv_of(run_single_path(c).result), csv_of(run_single_path(c).result));
  auto other = c;
  other.seed += 1;
  EXPECT_NE(csv_of(run_single_path(c).result), csv_of(run_single_path(other).result));
}

TEST(Determinism, SnapshotAndBrownianFileReplayBitwise) {
  auto c = standard();
  c.T = 0.01;
  const auto model = make_model(c);
  const auto omega0 = make_initial_vorticity(c, model.bath());
  const auto path = make_brownian_path(c, model.noise.size(), c.seed);
  const auto snap = scratch("replay_initial.lsf");
  const auto table = scratch("replay.lsw");
  write_snapshot(snap, 0.0, {omega0});
  path.save(table);

  auto replay = c;
  replay.seed = 999;
  replay.ic = InitialFamily::shear;
  replay.initial_snapshot = snap.string();
  replay.brownian_file = table.string();
  const auto a = run_single_path(c).result;
  const auto b = run_single_path(replay).result;
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_EQ(std::memcmp(a.final_state.omega.values().data(), b.final_state.omega.values().data(),
                        a.final_state.omega.grid().points() * sizeof(double)),
            0);
}

TEST(InvariantSuite, StandardCasePasses) {
  const auto report = run_invariant_suite(standard());
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " measured " << c.measured;
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.find("euler_reduction_velocity"), nullptr);
  const auto json = report.to_json();
  EXPECT_NE(json.find("\"adjointness\""), std::string::npos);
  EXPECT_NE(json.find("\"tolerance\""), std::string::npos);
}

TEST(InvariantSuite, InjectedConstantFieldFailsAdjointnessByName) {
  auto c = standard();
  c.T = 0.005;
  c.noise_extra_constant_x = 0.05;
  const auto report = run_invariant_suite(c);
  EXPECT_FALSE(report.passed());
  const auto* adj = report.find("adjointness");
  ASSERT_NE(adj, nullptr);
  EXPECT_FALSE(adj->passed);
  EXPECT_NE(adj->detail.find("xi_" + std::to_string(c.noise_m + 1)), std::string::npos) << adj->detail;
  const auto* div = report.find("basis_divergence");
  ASSERT_NE(div, nullptr);
  EXPECT_FALSE(div->passed);
}

TEST(InvariantSuite, FlatBottomAddsEulerReduction) {
  auto c = standard();
  c.bathymetry = BathymetryFamily::constant;
  c.bath_amp1 = 0.0;
  c.delta = 0.0;
  c.T = 0.01;
  const auto report = run_invariant_suite(c);
  const auto* vel = report.find("euler_reduction_velocity");
  const auto* m = report.find("euler_reduction_m_identity");
  ASSERT_NE(vel, nullptr);
  ASSERT_NE(m, nullptr);
  EXPECT_TRUE(vel->passed) << vel->measured;
  EXPECT_TRUE(m->passed) << m->measured;
  EXPECT_TRUE(report.passed());
}

TEST(Cascade, TinyRunEmitsTwoGaps) {
  auto c = standard();
  c.cascade_levels = 3;
  const auto r = experiment_viscous_convergence(c);
  ASSERT_EQ(r.gaps.size(), 2u);
  ASSERT_EQ(r.nu.size(), 3u);
  for (double g : r.gaps) EXPECT_TRUE(std::isfinite(g));
}

TEST(Cascade, SingleLevelIsRejected) {
  auto c = standard();
  c.cascade_levels = 1;
  const auto msg = config_error_of([&] { experiment_viscous_convergence(c); });
  EXPECT_NE(msg.find("'cascade_levels'"), std::string::npos) << msg;
}

TEST(Cascade, EmptyNoiseSingleModeMatchesHeatDecay) {
  auto c = parse_config("n = 32\nT = 0.05\ndt = 5e-4\nseed = 1\nic = single_mode\nic_modes = 1\ncascade_levels = 5\n");
  const auto r = experiment_viscous_convergence(c);
  ASSERT_EQ(r.gaps.size(), 4u);
  const double rate = kTwoPi * kTwoPi;
  const double norm = std::sqrt(0.5);
  for (std::size_t i = 0; i < r.gaps.size(); ++i) {
    double expected = 0.0;
    for (std::size_t s = 0; s <= 100; ++s) {
      const double t = static_cast<double>(s) * c.dt;
      expected = std::max(expected, norm * std::abs(std::exp(-rate * r.nu[i] * t) - std::exp(-rate * r.nu[i + 1] * t)));
    }
    EXPECT_NEAR(r.gaps[i], expected, 1e-6) << "level " << i + 1;
  }
  EXPECT_TRUE(r.trend_ok);
}

TEST(Continuity, ZeroEpsilonIsDegenerate) {
  auto c = standard();
  c.paths = 16;
  c.T = 0.01;
  const auto r = experiment_ic_continuity(c, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.passed);
}

TEST(Continuity, DeterministicPairWithinGronwallBound) {
  auto c = standard();
  c.noise_m = 0;
  const auto r = experiment_ic_continuity(c, 1e-3);
  EXPECT_EQ(r.paths, 1u);
  EXPECT_FALSE(r.degenerate);
  EXPECT_LE(r.statistic, 1.05);
  EXPECT_TRUE(r.passed);
}

TEST(Continuity, StochasticRunNeedsSixteenPaths) {
  auto c = standard();
  c.paths = 8;
  const auto msg = config_error_of([&] { experiment_ic_continuity(c, 1e-3); });
  EXPECT_NE(msg.find("'paths'"), std::string::npos) << msg;
}

TEST(ThreadBudget, HonoursEnvironment) {
  ::setenv("LAKESIM_THREADS", "3", 1);
  EXPECT_EQ(thread_budget(), 3u);
  ::setenv("LAKESIM_THREADS", "zero", 1);
  EXPECT_THROW(thread_budget(), Error);
  ::unsetenv("LAKESIM_THREADS");
  EXPECT_GE(thread_budget(), 1u);
}

}  // namespace
}  // namespace lakesim
