// Command-line front end over the C interface.
//
//   lakesim <subcommand> --config FILE [--seed N] [--out DIR] [--set key=value]...
//
// Exit status: 0 success, 1 failed check or runtime error, 2 usage or config error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lakesim/lakesim.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

using Command = lakesim_status (*)(const lakesim_config*, lakesim_report**);

struct Options {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> overrides;
  bool moments = false;
};

int report_error(lakesim_status status) {
  std::cerr << "lakesim: " << lakesim_status_name(status) << ": " << lakesim_last_error() << "\n";
  return status == LAKESIM_CONFIG_ERROR ? kExitUsage : kExitFailure;
}

// Value of `key` in the canonical config text.
std::string config_value(const std::string& text, const std::string& key) {
  const std::string prefix = key + " = ";
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return {};
}

int execute(const Options& opts, Command command) {
  lakesim_config* config = nullptr;
  lakesim_status status = lakesim_config_load(opts.config_path.c_str(), &config);
  if (status != LAKESIM_OK) return report_error(status);

  auto set = [&](const std::string& key, const std::string& value) {
    return lakesim_config_set(config, key.c_str(), value.c_str());
  };
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "lakesim: --set expects key=value, got '" << kv << "'\n";
      lakesim_config_free(config);
      return kExitUsage;
    }
    status = set(kv.substr(0, eq), kv.substr(eq + 1));
    if (status != LAKESIM_OK) break;
  }
  if (status == LAKESIM_OK && opts.seed_given) status = set("seed", std::to_string(opts.seed));
  if (status == LAKESIM_OK && !opts.out.empty()) status = set("out", opts.out);
  if (status != LAKESIM_OK) {
    lakesim_config_free(config);
    return report_error(status);
  }

  const bool to_stdout = config_value(lakesim_config_text(config), "out").empty();
  lakesim_report* report = nullptr;
  status = command(config, &report);
  lakesim_config_free(config);
  if (status != LAKESIM_OK) return report_error(status);

  if (to_stdout) std::fputs(lakesim_report_output(report), stdout);
  std::cerr << lakesim_report_summary(report) << "\n";
  const int code = lakesim_report_passed(report) ? 0 : kExitFailure;
  lakesim_report_free(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic great lake vorticity simulator"};
  app.require_subcommand(1);
  app.footer(lakesim_config_help());

  Options opts;
  Command chosen = nullptr;

  struct Entry {
    const char* name;
    const char* help;
    Command command;
  };
  const Entry entries[] = {
      {"run", "integrate one path and emit the diagnostics CSV", lakesim_run},
      {"invariants", "run the invariant suite and emit a JSON report", lakesim_invariants},
      {"cascade", "viscous cascade gaps g_n (with --moments: fourth-moment table)", lakesim_cascade},
      {"continuity", "continuity in initial conditions statistic", lakesim_continuity},
      {"validate-noise", "validate the noise basis", lakesim_validate_noise},
      {"solve-stream", "solve for the stream function of the initial vorticity", lakesim_solve_stream},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", opts.config_path, "config file (key = value)")->required();
    sub->add_option("--seed", opts.seed, "override the Brownian seed")->each([&](const std::string&) {
      opts.seed_given = true;
    });
    sub->add_option("--out", opts.out, "output directory; stdout when omitted");
    sub->add_option("--set", opts.overrides, "override a config key (key=value), repeatable");
    if (std::string(e.name) == "cascade") {
      sub->add_flag("--moments", opts.moments, "fourth moments over `paths` seeds instead of gaps");
    }
    const Command command = e.command;
    sub->callback([&chosen, command] { chosen = command; });
  }

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    std::cerr << "lakesim: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lakesim: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (chosen == lakesim_cascade && opts.moments) chosen = lakesim_moments;
  return execute(opts, chosen);
}
