#pragma once

// Filtered operator algebras, markets (B, S), quantum trading strategies and
// the space K of claims attainable at price zero.

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "qmarket/operator_core.hpp"

namespace qmarket {

/// Unital *-subalgebra of B(C^n), described by a complex basis.
class OperatorAlgebra {
 public:
  /// Validates independence, unit, adjoint closure and product closure
  /// (least-squares residuals within 1e-9).
  static OperatorAlgebra from_basis(std::vector<ComplexMatrix> basis);

  static OperatorAlgebra scalars(int dim);
  static OperatorAlgebra full(int dim);
  static OperatorAlgebra diagonal(int dim);
  /// Block-diagonal algebra: full matrix blocks (M_n1 + M_n2 + ...) or scalar
  /// blocks (C I_n1 + C I_n2 + ...).
  static OperatorAlgebra block_diagonal(std::span<const int> block_sizes, bool full_blocks);
  /// B(C^left) (x) I_right.
  static OperatorAlgebra tensor_factor(int left_dim, int right_dim);
  /// span_C of the given operators (assumed to form a *-algebra; not validated).
  static OperatorAlgebra trusted(std::vector<ComplexMatrix> basis);

  int dim() const noexcept { return dim_; }
  int complex_dimension() const noexcept;
  /// Tensor-factor algebras build their basis on first use.
  const std::vector<ComplexMatrix>& basis() const;

  /// Frobenius distance from m to the algebra.
  double residual(const Matrix& m) const;
  bool contains(const Matrix& m, double tol = 1e-9) const;
  bool contains(const OperatorAlgebra& other, double tol = 1e-9) const;

 private:
  OperatorAlgebra(int dim, std::vector<ComplexMatrix> basis, Matrix orthonormal);

  struct LazyBasis {
    std::once_flag once;
    std::vector<ComplexMatrix> basis;
  };

  int dim_;
  std::vector<ComplexMatrix> basis_;
  Matrix q_;  // orthonormal columns spanning vec(algebra)
  // B(C^left) (x) I_right, projected by a partial trace instead of q_.
  int tensor_left_ = 0;
  int tensor_right_ = 0;
  std::shared_ptr<LazyBasis> lazy_;
};

class Filtration {
 public:
  /// Requires A_0 = C I and A_s contained in A_{s+1}.
  explicit Filtration(std::vector<OperatorAlgebra> algebras);

  /// A_n = B((C^2)^{(x)n}) (x) I_{N-n}, n = 0..N.
  static Filtration tensor_qubits(int periods);

  int periods() const noexcept { return static_cast<int>(algebras_.size()) - 1; }
  int dim() const noexcept { return algebras_.front().dim(); }
  const OperatorAlgebra& at(int t) const { return algebras_.at(t); }
  const std::vector<OperatorAlgebra>& algebras() const noexcept { return algebras_; }

 private:
  std::vector<OperatorAlgebra> algebras_;
};

class MarketModel {
 public:
  /// assets[j][t] is S^j_t; every S^j_t must be positive and lie in A_t.
  MarketModel(Filtration filtration, std::vector<double> bank,
              std::vector<std::vector<HermitianOperator>> assets);

  int dim() const noexcept { return filtration_.dim(); }
  int periods() const noexcept { return filtration_.periods(); }
  int num_assets() const noexcept { return static_cast<int>(assets_.size()); }
  const Filtration& filtration() const noexcept { return filtration_; }
  const std::vector<double>& bank() const noexcept { return bank_; }
  const HermitianOperator& asset(int j, int t) const { return assets_.at(j).at(t); }
  const std::vector<HermitianOperator>& asset_path(int j) const { return assets_.at(j); }
  /// S^j_t - S^j_{t-1}
  HermitianOperator increment(int j, int t) const;
  bool is_discounted() const;

 private:
  Filtration filtration_;
  std::vector<double> bank_;
  std::vector<std::vector<HermitianOperator>> assets_;
};

struct StrategyTerm {
  double weight;
  ComplexMatrix op;
};

/// Biprocess H^j_t = sum_k a_k A_k* (x) A_k with A_k in A_{t-1}, stored in
/// factored form. Periods run 1..T.
class TradingStrategy {
 public:
  TradingStrategy(int periods, int num_assets);

  int periods() const noexcept { return periods_; }
  int num_assets() const noexcept { return assets_; }

  void add_term(int period, int asset, double weight, ComplexMatrix op);
  const std::vector<StrategyTerm>& terms(int period, int asset) const;

  /// H_0 in R; kept for the value process, never enters gains.
  void set_initial(int asset, double h0);
  double initial(int asset) const { return initial_.at(asset); }

  /// H^j_t # U = sum_k a_k A_k* U A_k
  HermitianOperator act(int period, int asset, const HermitianOperator& u) const;

  /// Throws unless every A_k of period t lies in A_{t-1}.
  void require_adapted(const Filtration& filtration) const;

 private:
  int periods_;
  int assets_;
  std::vector<std::vector<StrategyTerm>> terms_;  // [(t-1) * assets + j]
  std::vector<double> initial_;
};

struct GainProcess {
  std::vector<HermitianOperator> values;  // (H#S)_0 .. (H#S)_T
};

/// (A (x) B) # U = A U B
ComplexMatrix bimodule_apply(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& u);

MarketModel discount(const MarketModel& market);

GainProcess gain_process(const TradingStrategy& h, const MarketModel& market);

std::vector<HermitianOperator> value_process(std::span<const double> beta, const TradingStrategy& h,
                                             const MarketModel& market);

struct PolarizationTerm {
  double weight;
  ComplexMatrix op;
};

/// One independent generator of K with its polarization pre-image:
/// claim = sum_k weight_k op_k* dS^asset_period op_k.
struct AttainableGenerator {
  HermitianOperator claim;
  int period;
  int asset;
  int p;
  int q;
  bool imaginary;  // i(Ap* dS Aq - Aq* dS Ap) rather than the symmetric family
  std::vector<PolarizationTerm> preimage;
};

struct AttainableSpace {
  int dim = 0;
  int periods = 0;
  int num_assets = 0;
  std::vector<AttainableGenerator> generators;

  std::vector<HermitianOperator> basis() const;
  std::size_t size() const noexcept { return generators.size(); }
  /// Real coordinates of the generators as columns.
  Eigen::MatrixXd coordinate_matrix() const;
  /// Strategy realising sum_i c_i generator_i.
  TradingStrategy strategy(std::span<const double> coefficients) const;
};

inline constexpr double kIndependenceTol = 1e-9;

/// Real-linear basis of K on a discounted market, generated by polarization
/// over basis pairs of A_{t-1} and reduced by Gram-Schmidt.
AttainableSpace attainable_space_basis(const MarketModel& market);

/// Generators of the one-period gain space {H_t # dS_t} of a single period.
AttainableSpace period_gain_space(const MarketModel& market, int period);

}  // namespace qmarket
