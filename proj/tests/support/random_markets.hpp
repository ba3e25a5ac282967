#pragma once

// Seeded generators for property tests: Hermitian matrices, unitaries, and
// small discounted markets over three families of filtrations.

#include <random>
#include <string>
#include <vector>

#include "qmarket/market_model.hpp"

namespace qmarket::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
double gaussian(Rng& rng);

Matrix random_complex(Rng& rng, int dim);
HermitianOperator random_hermitian(Rng& rng, int dim, double scale = 1.0);
/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
Matrix random_unitary(Rng& rng, int dim);
/// Complex Gaussian combination of the algebra basis.
ComplexMatrix random_element(Rng& rng, const OperatorAlgebra& algebra);
/// Positive definite element of the algebra: c I + X X*.
HermitianOperator random_positive_element(Rng& rng, const OperatorAlgebra& algebra, double floor);

enum class Family {
  kBlockDiagonal,  // scalars < scalar blocks < full blocks < full
  kTensor,         // B(C^{d_1..d_t}) (x) I
  kPartition,      // nested partitions, commutative, rotated by a unitary
};

std::string family_name(Family f);

/// Filtration of the family with T periods and dim <= 8.
Filtration random_filtration(Rng& rng, Family family, int periods);

/// Discounted market with positive assets adapted to the filtration. The
/// asset paths are arbitrary, so the market may or may not admit arbitrage.
MarketModel random_market(Rng& rng, Family family, int periods, int assets);

/// Random adapted strategy with `terms` terms per period and asset.
TradingStrategy random_strategy(Rng& rng, const MarketModel& market, int terms);

}  // namespace qmarket::testing
