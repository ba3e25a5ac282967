#pragma once

// Quantum binomial markets: the single-period qubit market with its disk of
// risk-neutral states, European call replication, the N-period tensor market
// and the Cox-Ross-Rubinstein formula.

#include <array>
#include <cstdint>
#include <vector>

#include "qmarket/market_model.hpp"
#include "qmarket/quantum_probability.hpp"

namespace qmarket {

using Vec3 = std::array<double, 3>;

/// A = x0 I + x1 sx + x2 sy + x3 sz; B_1 = B0 (1 + r), S_1 = S0 (I + A).
struct QubitMarketSpec {
  double x0 = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
  double r = 0.0;
  double S0 = 100.0;
  double B0 = 1.0;

  double pauli_norm() const;
  double a() const { return x0 - pauli_norm(); }
  double b() const { return x0 + pauli_norm(); }
  HermitianOperator rate_operator() const;
  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct RiskNeutralDisk {
  Vec3 normal{};       // (x1, x2, x3) / |x|
  double offset = 0.0; // signed distance of the plane from the origin
  double radius = 0.0;
  double scale = 0.0;  // |x|, so that |x| (n . v - offset) is the plane equation residual
  bool open = true;

  Vec3 center() const;
  /// x1 x + x2 y + x3 z - (r - x0)
  double plane_residual(const Vec3& v) const;
  bool contains(const Vec3& v, double tol = 1e-10) const;
};

MarketModel build_single_period(const QubitMarketSpec& spec);

/// Requires a < r < b.
RiskNeutralDisk risk_neutral_disk(const QubitMarketSpec& spec);

/// Uniform Bloch vectors on the disk shrunk by 1e-6; mt19937_64 with a
/// portable double conversion, so identical across platforms.
std::vector<Vec3> sample_disk_points(const RiskNeutralDisk& disk, int n, std::uint64_t seed);
std::vector<DensityState> sample_disk_states(const RiskNeutralDisk& disk, int n, std::uint64_t seed);

struct CallReplication {
  double beta = 0.0;   // bank units
  double gamma = 0.0;  // asset units
};

CallReplication euro_call_replication(const QubitMarketSpec& spec, double strike);
double euro_call_price(const QubitMarketSpec& spec, double strike);

/// (S - K)^+ as an operator.
HermitianOperator call_payoff(const HermitianOperator& s, double strike);

struct NPeriodSpec {
  int N = 1;
  double a = 0.0;
  double b = 0.0;
  double r = 0.0;
  double S0 = 100.0;
  double B0 = 1.0;
  std::vector<Vec3> pauli;  // per period; empty means ((b - a) / 2, 0, 0) throughout

  double x0() const { return 0.5 * (a + b); }
  Vec3 pauli_vector(int period) const;  // 1-based
  void validate() const;
};

MarketModel build_n_period(const NPeriodSpec& spec);

/// Tensor product of Bloch states, one per period, each on its risk-neutral plane.
DensityState product_martingale_state(const NPeriodSpec& spec, const std::vector<Vec3>& bloch);

/// sum_{j=m}^{n} C(n, j) p^j (1 - p)^(n - j)
double complementary_binomial(int m, int n, double p);

double crr_price(int N, double S0, double K, double r, double a, double b);

/// Backward induction on the recombining tree with weight q = (r - a) / (b - a).
double binomial_tree_price(int N, double S0, double K, double r, double a, double b);

}  // namespace qmarket
