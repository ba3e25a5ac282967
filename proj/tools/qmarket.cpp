// qmarket <command> --scenario <path> [--seed N] [--out <path>]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qmarket/cli.hpp"

namespace {

int usage_failure(const std::string& msg) {
  std::cerr << "qmarket: " << msg << "\n";
  return qmarket::cli::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qmarket::cli;

  CLI::App app{"Quantum binomial market engine: no-arbitrage checks, price bounds, hedges."};
  std::string command;
  std::string scenario_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  app.add_option("command", command,
                 "check-arbitrage | price | interval | replicate | decompose | disk | crr")
      ->required();
  app.add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
  app.add_option("--seed", seed, "Overrides solver.seed");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.set_version_flag("--version", std::string(QMARKET_VERSION_STRING));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const auto cmd = parse_command(command);
  if (!cmd) return usage_failure("unknown command \"" + command + "\"");

  std::ifstream in(scenario_path);
  if (!in) return usage_failure("cannot read scenario " + scenario_path);
  std::stringstream text;
  text << in.rdbuf();

  Scenario scenario;
  try {
    scenario = parse_scenario(text.str());
    if (seed) scenario.solver.seed = *seed;
    if (auto cap = max_iterations_from_env()) scenario.solver.max_iterations = *cap;
  } catch (const std::exception& e) {
    return usage_failure(e.what());
  }

  const RunOutput result = run(*cmd, scenario);
  if (out_path.empty()) {
    std::cout << result.report;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << result.report)) return usage_failure("cannot write " + out_path);
  }
  if (!result.message.empty()) std::cerr << "qmarket: " << result.message << "\n";
  return result.exit_code;
}
