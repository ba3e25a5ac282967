#pragma once

// Scenario files and reports for the qmarket driver.
//
// Scenarios are JSON documents; the grammar is documented in README.md.
// Payoffs and value processes in a scenario are in currency units at their
// own date; the driver discounts them by the bank account before calling the
// engine and reports time-0 prices in currency units.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmarket/binomial_models.hpp"
#include "qmarket/market_model.hpp"
#include "qmarket/slice_solver.hpp"

namespace qmarket::cli {

inline constexpr const char* kReportSchema = "qmarket.report/1";
inline constexpr const char* kScenarioSchema = "qmarket.scenario/1";

/// Malformed scenario text or a field that fails validation. The message
/// carries a line/column or a field path.
class ScenarioError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Command/scenario mismatch or bad command-line arguments.
class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct AlgebraSpec {
  std::string kind;                  // scalars | full | diagonal | blocks | basis
  std::vector<int> blocks;           // kind == blocks
  bool full_blocks = true;
  std::vector<Matrix> basis;         // kind == basis
};

struct ExplicitMarketSpec {
  int dim = 0;
  std::vector<double> bank;
  std::vector<AlgebraSpec> filtration;
  std::vector<std::vector<Matrix>> assets;  // [asset][t]
};

struct ClaimSpec {
  enum class Kind { kCall, kSpectral, kMatrix };
  std::string name;
  Kind kind = Kind::kCall;
  int asset = 0;
  double strike = 0.0;
  std::string function;  // call | put | digital | asset
  Matrix matrix;
};

struct SolverSettings {
  int max_iterations = SolverOptions{}.max_iterations;
  double gap_tolerance = SolverOptions{}.gap_tolerance;
  std::uint64_t seed = 0;
  int samples = 100;
};

struct Scenario {
  enum class MarketKind { kQubit, kNPeriod, kExplicit };
  MarketKind kind = MarketKind::kQubit;
  QubitMarketSpec qubit;
  NPeriodSpec nperiod;
  ExplicitMarketSpec explicit_market;
  std::vector<ClaimSpec> claims;  // sorted by name
  SolverSettings solver;
  std::vector<Matrix> value_process;  // optional, currency units, V_0 .. V_T

  std::string market_kind() const;
  /// The undiscounted market.
  MarketModel market() const;
  /// Payoff operator of a claim at T, in currency units.
  HermitianOperator payoff(const ClaimSpec& claim, const MarketModel& market) const;
  SolverOptions solver_options() const;
};

/// Parses and validates; throws ScenarioError.
Scenario parse_scenario(const std::string& text);

/// Canonical form: sorted keys, claims sorted by name, matrices as [re, im] pairs.
std::string serialize_scenario(const Scenario& scenario);

enum class Command { kCheckArbitrage, kPrice, kInterval, kReplicate, kDecompose, kDisk, kCrr };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command command);

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitIndeterminate = 3,
  kExitConsistency = 4,
};

struct RunOutput {
  std::string report;  // JSON text, newline terminated
  int exit_code = kExitOk;
  std::string message;  // diagnostic for stderr; empty on success
};

/// Runs a command and never throws: failures become an error report with the
/// matching exit code.
RunOutput run(Command command, const Scenario& scenario);

/// Reads QMARKET_MAX_ITERS; throws UsageError when set but not a positive integer.
std::optional<int> max_iterations_from_env();

}  // namespace qmarket::cli
