#include "qmarket/arbitrage_engine.hpp"

#include <cmath>
#include <limits>

namespace qmarket {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<DensityState> as_state(const HermitianOperator& x) {
  try {
    return DensityState(x);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string to_string(FeasibilityStatus status) {
  switch (status) {
    case FeasibilityStatus::kFaithfulStateFound:
      return "FAITHFUL_STATE_FOUND";
    case FeasibilityStatus::kNoFaithfulState:
      return "NO_FAITHFUL_STATE";
    case FeasibilityStatus::kIndeterminate:
      return "INDETERMINATE";
  }
  return "UNKNOWN";
}

MartingaleConstraintSet build_constraints(const MarketModel& market) {
  const AttainableSpace space = attainable_space_basis(market);
  MartingaleConstraintSet out;
  out.dim = market.dim();
  for (const auto& g : space.generators) {
    out.constraints.push_back((1.0 / g.claim.frobenius_norm()) * g.claim);
    out.provenance.push_back({g.period, g.asset, g.p, g.q, g.imaginary});
  }
  return out;
}

FeasibilityResult max_min_eig_over_slice(const MartingaleConstraintSet& constraints,
                                         const std::optional<HermitianOperator>& objective_shift,
                                         const SolverOptions& options) {
  FeasibilityResult result;
  auto slice = AffineSlice::unit_trace_orthogonal_to(constraints.dim, constraints.constraints);
  if (!slice) {
    result.status = FeasibilityStatus::kNoFaithfulState;
    result.lambda_star = -kInf;
    result.upper_bound = -kInf;
    return result;
  }
  HermitianOperator shift = objective_shift.value_or(HermitianOperator::zero(constraints.dim));
  const AffineSlice shifted = AffineSlice::build(slice->point() - shift, slice->directions(), {}, {})
                                  .value();
  const MinEigenvalueSolution sol = maximize_min_eigenvalue(shifted, options);
  result.lambda_star = sol.lambda;
  result.upper_bound = sol.upper_bound;
  result.iterations = sol.iterations;
  result.witness_state = as_state(sol.argmax + shift);
  if (sol.lambda > kFeasibilityThreshold) {
    result.status = FeasibilityStatus::kFaithfulStateFound;
  } else if (sol.upper_bound < -kFeasibilityThreshold) {
    result.status = FeasibilityStatus::kNoFaithfulState;
  } else {
    result.status = FeasibilityStatus::kIndeterminate;
  }
  return result;
}

FeasibilityResult check_no_arbitrage(const MarketModel& market, const SolverOptions& options) {
  const MarketModel disc = discount(market);
  const MartingaleConstraintSet cons = build_constraints(disc);

  bool trace_vanishes = true;
  for (const auto& g : cons.constraints) {
    if (std::abs(g.trace()) > 1e-9) trace_vanishes = false;
  }
  if (trace_vanishes) {
    // I/d meets every constraint, and a traceless positive claim is zero.
    FeasibilityResult r;
    const int d = disc.dim();
    r.status = FeasibilityStatus::kFaithfulStateFound;
    r.witness_state = DensityState::maximally_mixed(d);
    auto slice = AffineSlice::unit_trace_orthogonal_to(d, cons.constraints);
    if (slice) {
      const MinEigenvalueSolution sol = maximize_min_eigenvalue(*slice, options);
      r.lambda_star = sol.lambda;
      r.upper_bound = sol.upper_bound;
      r.iterations = sol.iterations;
      if (auto w = as_state(sol.argmax)) r.witness_state = w;
    }
    return r;
  }

  FeasibilityResult result = max_min_eig_over_slice(cons, std::nullopt, options);
  if (result.lambda_star > kFeasibilityThreshold) {
    result.status = FeasibilityStatus::kFaithfulStateFound;
    return result;
  }

  // Look for K in span(K) with tr K = 1 and K >= 0.
  if (auto claim_slice = AffineSlice::unit_trace_in_span(disc.dim(), cons.constraints)) {
    const MinEigenvalueSolution sol = maximize_min_eigenvalue(*claim_slice, options);
    result.iterations += sol.iterations;
    result.claim_min_eigenvalue = sol.lambda;
    if (sol.lambda >= -kClaimTolerance) result.arbitrage_claim = sol.argmax;
  }

  if (result.lambda_star >= -kFeasibilityThreshold) {
    result.status = FeasibilityStatus::kIndeterminate;
  } else if (result.upper_bound < -kFeasibilityThreshold || result.arbitrage_claim) {
    result.status = FeasibilityStatus::kNoFaithfulState;
  } else {
    result.status = FeasibilityStatus::kIndeterminate;
  }
  if (result.status == FeasibilityStatus::kNoFaithfulState) result.witness_state.reset();
  return result;
}

bool is_martingale_state(const DensityState& rho, const MarketModel& market, double tol) {
  require_same_dim(rho.dim(), market.dim(), "is_martingale_state");
  const MartingaleConstraintSet cons = build_constraints(discount(market));
  for (const auto& g : cons.constraints) {
    if (std::abs(hs_inner(rho.op(), g)) > tol) return false;
  }
  return true;
}

}  // namespace qmarket
