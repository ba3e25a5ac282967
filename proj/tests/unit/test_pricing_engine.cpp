#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmarket/binomial_models.hpp"
#include "qmarket/pricing_engine.hpp"
#include "random_markets.hpp"

namespace qmarket {
namespace {

using testing::Rng;

constexpr double kUp = 200.0 / 21.0;    // 9.523809...
constexpr double kDown = 100.0 / 21.0;  // 4.761904...

QubitMarketSpec running_example() { return {0.05, 0.15, 0.0, 0.0, 0.05, 100.0, 1.0}; }

MarketModel trinomial(bool full_algebra) {
  std::vector<double> up{90.0 / 1.05, 105.0 / 1.05, 120.0 / 1.05};
  const HermitianOperator s0 = 100.0 * HermitianOperator::identity(3);
  const OperatorAlgebra a1 = full_algebra ? OperatorAlgebra::full(3) : OperatorAlgebra::diagonal(3);
  return MarketModel(Filtration({OperatorAlgebra::scalars(3), a1}), {1.0, 1.0}, {{s0, HermitianOperator::diagonal(up)}});
}

HermitianOperator trinomial_call() {
  std::vector<double> h{0.0, 5.0 / 1.05, 20.0 / 1.05};
  return HermitianOperator::diagonal(h);
}

TEST(Replicate, QubitCall) {
  const QubitMarketSpec spec = running_example();
  const MarketModel m = build_single_period(spec);
  const HermitianOperator payoff = (1.0 / 1.05) * call_payoff(m.asset(0, 1), 100.0);
  const Replication r = replicate(payoff, discount(m));
  EXPECT_TRUE(r.attainable);
  EXPECT_NEAR(r.alpha, kUp, 1e-9);
  const GainProcess g = gain_process(r.strategy, discount(m));
  EXPECT_LE((r.alpha * HermitianOperator::identity(2) + g.values.back() - payoff).frobenius_norm(), 1e-9);
}

TEST(Replicate, IdentityClaim) {
  const Replication r = replicate(HermitianOperator::identity(2), discount(build_single_period(running_example())));
  EXPECT_TRUE(r.attainable);
  EXPECT_NEAR(r.alpha, 1.0, 1e-12);
}

TEST(Replicate, NonAttainableClaims) {
  const MarketModel m = discount(build_single_period(running_example()));
  const Replication r = replicate(pauli_z(), m);
  EXPECT_FALSE(r.attainable);
  EXPECT_GT(r.residual, 1.0);
  EXPECT_FALSE(replicate(trinomial_call(), trinomial(true)).attainable);
}

TEST(Replicate, RejectsUnadaptedOrUndiscounted) {
  const MarketModel tri = trinomial(false);
  EXPECT_THROW(replicate(HermitianOperator::identity(4), tri), DimensionError);
  Matrix offdiag = Matrix::Zero(3, 3);
  offdiag(0, 1) = offdiag(1, 0) = 1.0;
  EXPECT_THROW(replicate(HermitianOperator(offdiag), tri), ValidationError);
  EXPECT_THROW(replicate(HermitianOperator::identity(2), build_single_period(running_example())), ValidationError);
}

TEST(PriceBounds, QubitCollapses) {
  const MarketModel m = build_single_period(running_example());
  const HermitianOperator payoff = (1.0 / 1.05) * call_payoff(m.asset(0, 1), 100.0);
  const PriceInterval iv = price_bounds(payoff, discount(m));
  EXPECT_TRUE(iv.attainable);
  EXPECT_FALSE(iv.interval_open);
  EXPECT_NEAR(iv.lower, kUp, 1e-7);
  EXPECT_NEAR(iv.upper, kUp, 1e-7);
}

TEST(PriceBounds, TrinomialMatchesLpOracle) {
  testing::ClassicalMarket cm;
  cm.increments = Eigen::MatrixXd(3, 1);
  cm.increments << 90.0 / 1.05 - 100.0, 105.0 / 1.05 - 100.0, 120.0 / 1.05 - 100.0;
  cm.payoff = Eigen::Vector3d(0.0, 5.0 / 1.05, 20.0 / 1.05);
  const testing::ClassicalBounds lp = testing::lp_price_bounds(cm);
  EXPECT_NEAR(lp.lower, kDown, 1e-12);
  EXPECT_NEAR(lp.upper, kUp, 1e-12);
  for (bool full : {true, false}) {
    const PriceInterval iv = price_bounds(trinomial_call(), trinomial(full));
    EXPECT_NEAR(iv.lower, lp.lower, 1e-6);
    EXPECT_NEAR(iv.upper, lp.upper, 1e-6);
    EXPECT_FALSE(iv.attainable);
    EXPECT_TRUE(iv.interval_open);
    EXPECT_LE(iv.lower_certificate, iv.lower + 1e-12);
    EXPECT_GE(iv.upper_certificate, iv.upper - 1e-12);
    ASSERT_TRUE(iv.upper_witness);
    EXPECT_TRUE(is_martingale_state(*iv.upper_witness, trinomial(full), 1e-8));
  }
}

TEST(PriceBounds, RandomClassicalMarketsMatchLp) {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 3);
    const int assets = 1 + static_cast<int>(rng() % 2);
    testing::ClassicalMarket cm;
    cm.increments = Eigen::MatrixXd(n, assets);
    cm.payoff = Eigen::VectorXd(n);
    std::vector<std::vector<HermitianOperator>> paths;
    for (int j = 0; j < assets; ++j) {
      std::vector<double> s1(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        // Straddle the start value so that a martingale measure exists.
        s1[i] = 1.0 + (i == 0 ? -0.3 : i == 1 ? 0.3 : testing::uniform(rng, -0.25, 0.25));
        cm.increments(i, j) = s1[i] - 1.0;
      }
      paths.push_back({HermitianOperator::identity(n), HermitianOperator::diagonal(s1)});
    }
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) h[i] = cm.payoff(i) = testing::uniform(rng, 0.0, 1.0);
    const MarketModel m(Filtration({OperatorAlgebra::scalars(n), OperatorAlgebra::diagonal(n)}),
                        {1.0, 1.0}, std::move(paths));
    if (check_no_arbitrage(m).status != FeasibilityStatus::kFaithfulStateFound) continue;
    const testing::ClassicalBounds lp = testing::lp_price_bounds(cm);
    const PriceInterval iv = price_bounds(HermitianOperator::diagonal(h), m);
    EXPECT_NEAR(iv.lower, lp.lower, 1e-6);
    EXPECT_NEAR(iv.upper, lp.upper, 1e-6);
  }
}

TEST(PriceBounds, ArbitrageMarketThrowsWithCertificate) {
  QubitMarketSpec spec = running_example();
  spec.r = 0.3;
  const MarketModel m = discount(build_single_period(spec));
  try {
    price_bounds(HermitianOperator::identity(2), m);
    FAIL() << "expected ArbitrageError";
  } catch (const ArbitrageError& e) {
    EXPECT_EQ(e.certificate().status, FeasibilityStatus::kNoFaithfulState);
    EXPECT_TRUE(e.certificate().arbitrage_claim);
  }
}

TEST(PriceBounds, MonotoneAndTranslationEquivariant) {
  const MarketModel m = trinomial(true);
  const HermitianOperator h = trinomial_call();
  const PriceInterval base = price_bounds(h, m);
  const PriceInterval shifted = price_bounds(h + 2.0 * HermitianOperator::identity(3), m);
  EXPECT_NEAR(shifted.lower, base.lower + 2.0, 1e-8);
  EXPECT_NEAR(shifted.upper, base.upper + 2.0, 1e-8);
  std::vector<double> more{1.0, 0.0, 0.0};
  const PriceInterval bigger = price_bounds(h + HermitianOperator::diagonal(more), m);
  EXPECT_GE(bigger.lower, base.lower - 1e-9);
  EXPECT_GE(bigger.upper, base.upper - 1e-9);
}

TEST(ArbitrageFreePrices, AttainableIsUnique) {
  const MarketModel m = build_single_period(running_example());
  const PriceReport r = arbitrage_free_prices((1.0 / 1.05) * call_payoff(m.asset(0, 1), 100.0), discount(m));
  EXPECT_TRUE(r.unique);
  EXPECT_NEAR(r.price, kUp, 1e-9);
}

TEST(ArbitrageFreePrices, NonAttainableHasInterval) {
  const PriceReport r = arbitrage_free_prices(trinomial_call(), trinomial(true));
  EXPECT_FALSE(r.unique);
  EXPECT_LT(r.interval.lower, r.interval.upper);
}

TEST(IsComplete, Examples) {
  // Qubit market: only span{I, A} is replicable out of the 4-dimensional claims.
  const Completeness q = is_complete(discount(build_single_period(running_example())));
  EXPECT_FALSE(q.complete);
  EXPECT_EQ(q.replicable_dimension, 2);
  EXPECT_EQ(q.claim_dimension, 4);
  // Binary classical market: diag(S_1) and I span the diagonal algebra.
  std::vector<double> s1{0.9, 1.2};
  const MarketModel binary(Filtration({OperatorAlgebra::scalars(2), OperatorAlgebra::diagonal(2)}), {1.0, 1.0},
                           {{HermitianOperator::identity(2), HermitianOperator::diagonal(s1)}});
  EXPECT_TRUE(is_complete(binary).complete);
  EXPECT_FALSE(is_complete(trinomial(false)).complete);
}

TEST(IsComplete, AgreesWithIntervalCollapse) {
  std::vector<double> s1{0.9, 1.2};
  const MarketModel binary(Filtration({OperatorAlgebra::scalars(2), OperatorAlgebra::diagonal(2)}), {1.0, 1.0},
                           {{HermitianOperator::identity(2), HermitianOperator::diagonal(s1)}});
  for (int k = 0; k < 2; ++k) {
    std::vector<double> e(2, 0.0);
    e[static_cast<std::size_t>(k)] = 1.0;
    const PriceInterval iv = price_bounds(HermitianOperator::diagonal(e), binary);
    EXPECT_TRUE(iv.attainable);
    EXPECT_NEAR(iv.upper - iv.lower, 0.0, 1e-7);
  }
  // The qubit market is incomplete: sigma_z has a nondegenerate interval.
  const PriceInterval z = price_bounds(pauli_z(), discount(build_single_period(running_example())));
  EXPECT_FALSE(z.attainable);
  EXPECT_GT(z.upper - z.lower, 0.5);
}

TEST(SupermartingaleCheck, Examples) {
  const MarketModel m = trinomial(true);
  const DensityState rho = *check_no_arbitrage(m).witness_state;
  const HermitianOperator h = trinomial_call();
  const PriceInterval iv = price_bounds(h, m);
  const std::vector<HermitianOperator> upper{iv.upper * HermitianOperator::identity(3), h};
  EXPECT_TRUE(supermartingale_check(upper, rho, m));
  const std::vector<HermitianOperator> lower{iv.lower * HermitianOperator::identity(3), h};
  EXPECT_FALSE(supermartingale_check(lower, rho, m));
  const std::vector<HermitianOperator> wrong_length{h};
  EXPECT_THROW(supermartingale_check(wrong_length, rho, m), ValidationError);
}

TEST(OptionalDecomposition, TrinomialUpperHedgeMatchesLpDual) {
  const MarketModel m = trinomial(true);
  const HermitianOperator h = trinomial_call();
  testing::ClassicalMarket cm;
  cm.increments = Eigen::MatrixXd(3, 1);
  cm.increments << 90.0 / 1.05 - 100.0, 105.0 / 1.05 - 100.0, 120.0 / 1.05 - 100.0;
  cm.payoff = Eigen::Vector3d(0.0, 5.0 / 1.05, 20.0 / 1.05);
  const testing::ClassicalHedge lp = testing::lp_upper_hedge(cm);
  EXPECT_NEAR(lp.value, kUp, 1e-12);
  EXPECT_NEAR(lp.gamma(0), 2.0 / 3.0, 1e-12);

  const std::vector<HermitianOperator> v{lp.value * HermitianOperator::identity(3), h};
  const OptionalDecompositionResult d = optional_decomposition(v, m);
  EXPECT_NEAR(d.v0, lp.value, 1e-9);
  const GainProcess g = gain_process(d.strategy, m);
  const HermitianOperator ds = m.increment(0, 1);
  EXPECT_NEAR(hs_inner(g.values[1], ds) / hs_inner(ds, ds), lp.gamma(0), 1e-6);
  std::vector<double> dc{0.0, kDown, 0.0};
  EXPECT_LE((d.consumption[1] - HermitianOperator::diagonal(dc)).frobenius_norm(), 1e-6);
}

TEST(OptionalDecomposition, MartingalePlusDecreasing) {
  Rng rng(71);
  NPeriodSpec spec;
  spec.N = 2;
  spec.a = -0.1;
  spec.b = 0.2;
  spec.r = 0.05;
  const MarketModel m = discount(build_n_period(spec));
  for (int trial = 0; trial < 3; ++trial) {
    const TradingStrategy h = testing::random_strategy(rng, m, 2);
    const GainProcess g = gain_process(h, m);
    std::vector<HermitianOperator> v;
    HermitianOperator c = HermitianOperator::zero(m.dim());
    for (int t = 0; t <= m.periods(); ++t) {
      if (t > 0) c += testing::random_positive_element(rng, m.filtration().at(t), 0.0);
      v.push_back(1.5 * HermitianOperator::identity(m.dim()) + g.values[t] - c);
    }
    const OptionalDecompositionResult d = optional_decomposition(v, m);
    const GainProcess dg = gain_process(d.strategy, m);
    for (int t = 0; t <= m.periods(); ++t) {
      const HermitianOperator rebuilt = d.v0 * HermitianOperator::identity(m.dim()) + dg.values[t] - d.consumption[t];
      EXPECT_LE((rebuilt - v[t]).frobenius_norm(), 1e-8);
      if (t > 0) EXPECT_GE(min_eigenvalue(d.consumption[t] - d.consumption[t - 1]), -1e-8);
    }
  }
}

TEST(OptionalDecomposition, PureMartingaleHasNoConsumption) {
  Rng rng(72);
  const MarketModel m = discount(build_single_period(running_example()));
  TradingStrategy h(1, 1);
  h.add_term(1, 0, 0.4, ComplexMatrix::identity(2));
  const GainProcess g = gain_process(h, m);
  const std::vector<HermitianOperator> v{2.0 * HermitianOperator::identity(2),
                                         2.0 * HermitianOperator::identity(2) + g.values[1]};
  const OptionalDecompositionResult d = optional_decomposition(v, m);
  EXPECT_LE(d.consumption[1].frobenius_norm(), 1e-8);
}

TEST(OptionalDecomposition, RejectsSubmartingale) {
  const MarketModel m = trinomial(true);
  const HermitianOperator h = trinomial_call();
  const std::vector<HermitianOperator> v{kDown * HermitianOperator::identity(3), h};
  EXPECT_THROW(optional_decomposition(v, m), ValidationError);
}

TEST(OptionalDecomposition, RejectsNonScalarStart) {
  const MarketModel m = trinomial(true);
  const std::vector<HermitianOperator> v{trinomial_call(), trinomial_call()};
  EXPECT_THROW(optional_decomposition(v, m), ValidationError);
}

}  // namespace
}  // namespace qmarket
