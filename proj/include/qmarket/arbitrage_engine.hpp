#pragma once

// No-arbitrage decision: a market is arbitrage-free iff it admits a faithful
// martingale state. Feasibility is decided by maximizing the minimum
// eigenvalue of rho over the affine set cut out by the martingale constraints;
// when that optimum is not positive the engine searches K for a positive
// nonzero claim and returns it as the arbitrage certificate.

#include <optional>
#include <string>
#include <vector>

#include "qmarket/market_model.hpp"
#include "qmarket/quantum_probability.hpp"
#include "qmarket/slice_solver.hpp"

namespace qmarket {

struct ConstraintProvenance {
  int period;
  int asset;
  int p;
  int q;
  bool imaginary;
};

/// Unit-norm Hermitian G_m with rho a martingale state iff tr(rho G_m) = 0 for all m.
struct MartingaleConstraintSet {
  int dim = 0;
  std::vector<HermitianOperator> constraints;
  std::vector<ConstraintProvenance> provenance;

  std::size_t size() const noexcept { return constraints.size(); }
};

enum class FeasibilityStatus { kFaithfulStateFound, kNoFaithfulState, kIndeterminate };

std::string to_string(FeasibilityStatus status);

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::kIndeterminate;
  std::optional<DensityState> witness_state;
  double lambda_star = 0.0;   // best minimum eigenvalue found; -inf when the slice is empty
  double upper_bound = 0.0;   // certified upper bound on the optimum
  std::optional<HermitianOperator> arbitrage_claim;
  double claim_min_eigenvalue = 0.0;
  int iterations = 0;
};

inline constexpr double kFeasibilityThreshold = 1e-9;
inline constexpr double kClaimTolerance = 1e-8;

/// Martingale constraints of a discounted market (the attainable basis, normalised).
MartingaleConstraintSet build_constraints(const MarketModel& market);

/// max lambda_min(rho - shift) s.t. tr rho = 1, tr(rho G_m) = 0.
FeasibilityResult max_min_eig_over_slice(const MartingaleConstraintSet& constraints,
                                         const std::optional<HermitianOperator>& objective_shift,
                                         const SolverOptions& options = {});

/// Discounts, builds the constraints, and classifies the market.
FeasibilityResult check_no_arbitrage(const MarketModel& market, const SolverOptions& options = {});

/// |tr(rho G_m)| <= tol for every constraint of the discounted market.
bool is_martingale_state(const DensityState& rho, const MarketModel& market, double tol = 1e-8);

}  // namespace qmarket
