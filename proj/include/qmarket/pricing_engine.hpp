#pragma once

// Replication, arbitrage-free price intervals, completeness, and the optional
// decomposition V = V_0 + H#S - C of universal supermartingales.
//
// All claims and processes are expressed in discounted units and all markets
// must be discounted (bank account identically 1).

#include <optional>
#include <vector>

#include "qmarket/arbitrage_engine.hpp"
#include "qmarket/market_model.hpp"
#include "qmarket/quantum_probability.hpp"
#include "qmarket/slice_solver.hpp"

namespace qmarket {

/// Raised when a pricing routine is called on a market with arbitrage.
class ArbitrageError : public Error {
 public:
  ArbitrageError(const std::string& what, FeasibilityResult certificate)
      : Error(what), certificate_(std::move(certificate)) {}
  const FeasibilityResult& certificate() const noexcept { return certificate_; }

 private:
  FeasibilityResult certificate_;
};

/// Raised when a process admits no one-period super-replication.
class SuperReplicationError : public Error {
 public:
  SuperReplicationError(const std::string& what, int period, double best_lambda)
      : Error(what), period_(period), best_lambda_(best_lambda) {}
  int period() const noexcept { return period_; }
  double best_lambda() const noexcept { return best_lambda_; }

 private:
  int period_;
  double best_lambda_;
};

struct Replication {
  bool attainable = false;
  double alpha = 0.0;
  TradingStrategy strategy{0, 0};
  double residual = 0.0;  // ||A - alpha I - (H#S)_T||_F
};

struct PriceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool attainable = false;
  bool interval_open = true;
  std::optional<DensityState> lower_witness;
  std::optional<DensityState> upper_witness;
  double lower_certificate = 0.0;  // certified bounds bracketing the optima
  double upper_certificate = 0.0;
  int iterations = 0;
};

struct PriceReport {
  PriceInterval interval;
  Replication replication;
  bool unique = false;
  double price = 0.0;  // the singleton price when unique
};

struct Completeness {
  bool complete = false;
  int replicable_dimension = 0;  // dim_R(span{I} + K)
  int claim_dimension = 0;       // dim_R O(A_T)
};

struct OptionalDecompositionResult {
  double v0 = 0.0;
  TradingStrategy strategy{0, 0};
  std::vector<HermitianOperator> consumption;  // C_0 .. C_T
  std::vector<double> period_lambda;           // best lambda_min per period
};

inline constexpr double kReplicationTol = 1e-8;

Replication replicate(const HermitianOperator& claim, const MarketModel& market);

PriceInterval price_bounds(const HermitianOperator& claim, const MarketModel& market,
                           const SolverOptions& options = {});

/// Price bounds cross-checked against replication.
PriceReport arbitrage_free_prices(const HermitianOperator& claim, const MarketModel& market,
                                  const SolverOptions& options = {});

Completeness is_complete(const MarketModel& market);

/// For every t and every basis pair of A_{t-1}, the Gram matrix
/// tr(rho A_p* (V_t - V_{t-1}) A_q) must be <= tol.
bool supermartingale_check(std::span<const HermitianOperator> process, const DensityState& rho,
                           const MarketModel& market, double tol = 1e-8);

OptionalDecompositionResult optional_decomposition(std::span<const HermitianOperator> process,
                                                   const MarketModel& market,
                                                   const SolverOptions& options = {});

}  // namespace qmarket
