#include "qmarket/pricing_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "real_span.hpp"

namespace qmarket {
namespace {

void require_discounted(const MarketModel& market, const char* what) {
  if (!market.is_discounted()) {
    throw ValidationError(std::string(what) + " requires a discounted market");
  }
}

void require_claim(const HermitianOperator& claim, const MarketModel& market) {
  require_same_dim(claim.dim(), market.dim(), "claim");
  if (!market.filtration().at(market.periods()).contains(claim.matrix())) {
    throw ValidationError("claim is not adapted to A_T");
  }
}

void require_process(std::span<const HermitianOperator> v, const MarketModel& market) {
  if (static_cast<int>(v.size()) != market.periods() + 1) {
    throw ValidationError("process needs " + std::to_string(market.periods() + 1) + " values");
  }
  for (int t = 0; t <= market.periods(); ++t) {
    require_same_dim(v[t].dim(), market.dim(), "process");
    if (!market.filtration().at(t).contains(v[t].matrix())) {
      throw ValidationError("process value V_" + std::to_string(t) + " is not adapted to A_" +
                            std::to_string(t));
    }
  }
}

std::optional<DensityState> as_state(const HermitianOperator& x) {
  try {
    return DensityState(x);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

FeasibilityResult require_arbitrage_free(const MarketModel& market, const SolverOptions& options) {
  FeasibilityResult feas = check_no_arbitrage(market, options);
  if (feas.status != FeasibilityStatus::kFaithfulStateFound || !feas.witness_state) {
    throw ArbitrageError("market is not arbitrage-free (" + to_string(feas.status) + ")", feas);
  }
  return feas;
}

// Least-squares coefficients of x over the columns of `basis`.
Eigen::VectorXd solve_coordinates(const Eigen::MatrixXd& basis, const Eigen::VectorXd& x) {
  if (basis.cols() == 0) return Eigen::VectorXd();
  return basis.colPivHouseholderQr().solve(x);
}

PriceInterval bounds_with_replication(const HermitianOperator& claim, const MarketModel& market,
                                      const Replication& rep, const SolverOptions& options) {
  const FeasibilityResult feas = require_arbitrage_free(market, options);
  const MartingaleConstraintSet cons = build_constraints(market);
  const auto slice = AffineSlice::unit_trace_orthogonal_to(market.dim(), cons.constraints);
  if (!slice) throw ConsistencyError("martingale slice is empty for an arbitrage-free market");

  const HermitianOperator& start = feas.witness_state->op();
  const ExpectationSolution up = maximize_expectation(*slice, claim, start, options);
  const ExpectationSolution down = maximize_expectation(*slice, -claim, start, options);

  PriceInterval out;
  out.upper = up.value;
  out.lower = -down.value;
  out.upper_certificate = up.upper_bound;
  out.lower_certificate = -down.upper_bound;
  out.upper_witness = as_state(up.argmax);
  out.lower_witness = as_state(down.argmax);
  out.iterations = up.iterations + down.iterations;
  out.attainable = rep.attainable;
  out.interval_open = !rep.attainable;

  const double scale = std::max(1.0, std::abs(out.upper));
  const double width = out.upper - out.lower;
  if (width < -1e-9 * scale) throw ConsistencyError("price bounds are inverted");
  if (rep.attainable && width > 1e-7 * scale) {
    std::ostringstream msg;
    msg << "claim replicates but the price interval has width " << width;
    throw ConsistencyError(msg.str());
  }
  if (!rep.attainable && width <= 1e-8 * scale) {
    std::ostringstream msg;
    msg << "price interval collapses (width " << width << ") but replication residual is "
        << rep.residual;
    throw ConsistencyError(msg.str());
  }
  return out;
}

}  // namespace

Replication replicate(const HermitianOperator& claim, const MarketModel& market) {
  require_discounted(market, "replicate");
  require_claim(claim, market);
  const AttainableSpace space = attainable_space_basis(market);
  const int d = market.dim();
  const auto m = static_cast<Eigen::Index>(space.size());

  Eigen::MatrixXd cols(real_dimension(d), m + 1);
  cols.col(0) = to_real_coordinates(HermitianOperator::identity(d));
  if (m > 0) cols.rightCols(m) = space.coordinate_matrix();
  const Eigen::VectorXd target = to_real_coordinates(claim);
  const Eigen::VectorXd coef = solve_coordinates(cols, target);

  Replication rep;
  rep.alpha = coef(0);
  const std::vector<double> c(coef.data() + 1, coef.data() + coef.size());
  rep.strategy = space.strategy(c);
  rep.residual = (target - cols * coef).norm();
  rep.attainable = rep.residual <= kReplicationTol * std::max(1.0, claim.frobenius_norm());
  return rep;
}

PriceInterval price_bounds(const HermitianOperator& claim, const MarketModel& market,
                           const SolverOptions& options) {
  require_discounted(market, "price_bounds");
  const Replication rep = replicate(claim, market);
  return bounds_with_replication(claim, market, rep, options);
}

PriceReport arbitrage_free_prices(const HermitianOperator& claim, const MarketModel& market,
                                  const SolverOptions& options) {
  require_discounted(market, "arbitrage_free_prices");
  PriceReport report;
  report.replication = replicate(claim, market);
  report.interval = bounds_with_replication(claim, market, report.replication, options);
  if (report.replication.attainable) {
    const double alpha = report.replication.alpha;
    const double scale = std::max(1.0, std::abs(alpha));
    const double err = std::max(std::abs(alpha - report.interval.lower),
                                std::abs(alpha - report.interval.upper));
    if (err > 1e-6 * scale) {
      std::ostringstream msg;
      msg << "replication price " << alpha << " disagrees with the price bounds by " << err;
      throw ConsistencyError(msg.str());
    }
    report.unique = true;
    report.price = alpha;
  }
  return report;
}

Completeness is_complete(const MarketModel& market) {
  require_discounted(market, "is_complete");
  const int d = market.dim();
  const AttainableSpace space = attainable_space_basis(market);
  detail::SpanBuilder<double> span(real_dimension(d));
  span.try_add(to_real_coordinates(HermitianOperator::identity(d)), kIndependenceTol);
  for (const auto& g : space.generators) span.try_add(to_real_coordinates(g.claim), kIndependenceTol);
  Completeness out;
  out.replicable_dimension = static_cast<int>(span.rank());
  out.claim_dimension = market.filtration().at(market.periods()).complex_dimension();
  out.complete = out.replicable_dimension == out.claim_dimension;
  return out;
}

bool supermartingale_check(std::span<const HermitianOperator> process, const DensityState& rho,
                           const MarketModel& market, double tol) {
  require_process(process, market);
  require_same_dim(rho.dim(), market.dim(), "supermartingale_check");
  for (int t = 1; t <= market.periods(); ++t) {
    const auto& basis = market.filtration().at(t - 1).basis();
    const auto k = static_cast<Eigen::Index>(basis.size());
    const Matrix dv = (process[t] - process[t - 1]).matrix();
    std::vector<Matrix> left(basis.size());
    std::vector<Matrix> right(basis.size());
    for (Eigen::Index p = 0; p < k; ++p) {
      left[p] = rho.matrix() * basis[p].matrix().adjoint();
      right[p] = dv * basis[p].matrix();
    }
    Matrix gram(k, k);
    for (Eigen::Index p = 0; p < k; ++p) {
      for (Eigen::Index q = 0; q < k; ++q) {
        gram(p, q) = (left[p].transpose().cwiseProduct(right[q])).sum();
      }
    }
    const double asym = (gram - gram.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * std::max(1.0, gram.cwiseAbs().maxCoeff())) {
      throw ConsistencyError("supermartingale Gram matrix is not Hermitian");
    }
    if (max_eigenvalue(HermitianOperator::hermitian_part(gram)) > tol) return false;
  }
  return true;
}

OptionalDecompositionResult optional_decomposition(std::span<const HermitianOperator> process,
                                                   const MarketModel& market,
                                                   const SolverOptions& options) {
  require_discounted(market, "optional_decomposition");
  require_process(process, market);
  const int d = market.dim();
  const int periods = market.periods();

  const FeasibilityResult feas = require_arbitrage_free(market, options);
  double scale = 1.0;
  for (const auto& v : process) scale = std::max(scale, v.frobenius_norm());
  if (!supermartingale_check(process, *feas.witness_state, market, 1e-8 * scale)) {
    throw ValidationError("process is not a supermartingale under the martingale witness state");
  }

  OptionalDecompositionResult out;
  out.v0 = process[0].trace() / d;
  out.strategy = TradingStrategy(periods, market.num_assets());
  out.consumption.push_back(HermitianOperator::zero(d));

  for (int t = 1; t <= periods; ++t) {
    const AttainableSpace gains = period_gain_space(market, t);
    const HermitianOperator dv = process[t] - process[t - 1];
    const std::vector<HermitianOperator> basis = gains.basis();
    const AffineSlice slice = AffineSlice::shifted_span(-dv, basis);
    const MinEigenvalueSolution sol = maximize_min_eigenvalue(slice, options);
    out.period_lambda.push_back(sol.lambda);
    if (sol.lambda < -kClaimTolerance * scale) {
      std::ostringstream msg;
      msg << "no one-period super-replication exists at t=" << t << " (best lambda_min "
          << sol.lambda << ")";
      throw SuperReplicationError(msg.str(), t, sol.lambda);
    }

    HermitianOperator gain = HermitianOperator::zero(d);
    if (!basis.empty()) {
      const Eigen::VectorXd coef =
          solve_coordinates(gains.coordinate_matrix(), to_real_coordinates(sol.argmax + dv));
      const std::vector<double> c(coef.data(), coef.data() + coef.size());
      const TradingStrategy step = gains.strategy(c);
      for (int j = 0; j < market.num_assets(); ++j) {
        for (const auto& term : step.terms(t, j)) out.strategy.add_term(t, j, term.weight, term.op);
      }
      for (std::size_t i = 0; i < basis.size(); ++i) gain += c[i] * basis[i];
    }
    // dC_t = V_{t-1} + H_t # dS_t - V_t
    out.consumption.push_back(out.consumption.back() + (gain - dv));
  }
  return out;
}

}  // namespace qmarket
