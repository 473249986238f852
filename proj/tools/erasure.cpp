// erasure <command> --config <path> [--seed N] [--out DIR] [--workers K] [--cap-dim D]
//
// Exit status: 0 when every assertion holds, 1 when one fails, 2 for usage or
// config errors, 3 when a run cannot complete.
#include "erasure/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Catalytic erasure experiments and acceptance checks"};
  std::string command;
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::size_t> cap_dim;
  app.add_option("command", command, "entropy, convex-split, protocol, multiparty, block, rate, converse or suite")
      ->required();
  app.add_option("--config", config_path, "key = value config file (optional for suite)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out, std::string("output directory (default: config 'out', then $") + erasure::kOutDirEnv +
                                   ", then erasure-out)");
  app.add_option("--workers", workers, "parallel suite workers")->check(CLI::Range(1, 64));
  app.add_option("--cap-dim", cap_dim, "dense simulation cap")->check(CLI::Range(1, 16384));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  const auto cmd = erasure::parse_command(command);
  if (!cmd) {
    std::cerr << "unknown command '" << command << "'\n" << app.help();
    return kExitUsage;
  }
  std::map<std::string, std::string> overrides;
  if (seed) overrides["seed"] = std::to_string(*seed);
  if (workers) overrides["workers"] = std::to_string(*workers);
  if (cap_dim) overrides["cap_dim"] = std::to_string(*cap_dim);

  erasure::ExperimentConfig config;
  try {
    if (config_path.empty()) {
      if (*cmd != erasure::Command::Suite) {
        std::cerr << "command " << command << " needs --config\n";
        return kExitUsage;
      }
      overrides["command"] = command;
      config = erasure::parse_config("", overrides);
    } else {
      config = erasure::load_config(config_path, overrides);
      if (config.command != *cmd) {
        std::cerr << "config is for command '" << erasure::to_string(config.command) << "', not '" << command << "'\n";
        return kExitUsage;
      }
    }
  } catch (const erasure::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const erasure::Error& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const auto report = erasure::run_command(config);
    const auto dir = erasure::resolve_out_dir(out, config);
    erasure::write_report(report, dir);
    for (const auto& r : report.runs) {
      std::printf("%s  %s  %s\n", r.ok() ? "PASS" : "FAIL", r.id.c_str(), r.title.c_str());
      for (const auto& a : r.assertions) {
        if (!a.ok) std::printf("      failed: %s (value %.12g, bound %.12g)\n", a.name.c_str(), a.value, a.bound);
      }
    }
    std::printf("%s: %d assertions passed, %d failed, max violation %.3g; report in %s\n", command.c_str(),
                report.passed(), report.failed(), report.max_violation(), dir.string().c_str());
    return report.ok() ? 0 : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
