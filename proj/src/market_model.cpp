#include "qmarket/market_model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "real_span.hpp"

namespace qmarket {
namespace {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix orthonormalize(int dim, const std::vector<ComplexMatrix>& basis, bool require_independent) {
  detail::SpanBuilder<Complex> span(static_cast<Eigen::Index>(dim) * dim);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    require_same_dim(basis[k].dim(), dim, "algebra basis");
    if (!span.try_add(vec(basis[k].matrix()), 1e-9) && require_independent) {
      throw ValidationError("algebra basis element " + std::to_string(k) +
                            " is linearly dependent on the preceding elements");
    }
  }
  return span.basis();
}

Matrix unit(int dim, int i, int j) {
  Matrix m = Matrix::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

}  // namespace

OperatorAlgebra::OperatorAlgebra(int dim, std::vector<ComplexMatrix> basis, Matrix orthonormal)
    : dim_(dim), basis_(std::move(basis)), q_(std::move(orthonormal)) {}

OperatorAlgebra OperatorAlgebra::from_basis(std::vector<ComplexMatrix> basis) {
  if (basis.empty()) throw ValidationError("algebra basis is empty");
  const int dim = basis.front().dim();
  Matrix q = orthonormalize(dim, basis, true);
  OperatorAlgebra alg(dim, std::move(basis), std::move(q));
  if (!alg.contains(Matrix::Identity(dim, dim))) {
    throw ValidationError("algebra does not contain the identity");
  }
  const auto& b = alg.basis();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!alg.contains(b[i].matrix().adjoint())) {
      throw ValidationError("algebra is not closed under adjoint (basis element " +
                            std::to_string(i) + ")");
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!alg.contains(b[i].matrix() * b[j].matrix())) {
        throw ValidationError("algebra is not closed under products (basis pair " +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  return alg;
}

OperatorAlgebra OperatorAlgebra::trusted(std::vector<ComplexMatrix> basis) {
  if (basis.empty()) throw ValidationError("algebra basis is empty");
  const int dim = basis.front().dim();
  Matrix q = orthonormalize(dim, basis, true);
  return OperatorAlgebra(dim, std::move(basis), std::move(q));
}

OperatorAlgebra OperatorAlgebra::scalars(int dim) {
  return trusted({ComplexMatrix::identity(dim)});
}

OperatorAlgebra OperatorAlgebra::full(int dim) { return tensor_factor(dim, 1); }

OperatorAlgebra OperatorAlgebra::diagonal(int dim) {
  std::vector<ComplexMatrix> basis;
  for (int i = 0; i < dim; ++i) basis.emplace_back(unit(dim, i, i));
  return trusted(std::move(basis));
}

OperatorAlgebra OperatorAlgebra::block_diagonal(std::span<const int> block_sizes,
                                                bool full_blocks) {
  int dim = 0;
  for (int s : block_sizes) {
    if (s < 1) throw ValidationError("block sizes must be positive");
    dim += s;
  }
  std::vector<ComplexMatrix> basis;
  int offset = 0;
  for (int s : block_sizes) {
    if (full_blocks) {
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) basis.emplace_back(unit(dim, offset + i, offset + j));
      }
    } else {
      Matrix m = Matrix::Zero(dim, dim);
      m.block(offset, offset, s, s).setIdentity();
      basis.emplace_back(std::move(m));
    }
    offset += s;
  }
  return trusted(std::move(basis));
}

OperatorAlgebra OperatorAlgebra::tensor_factor(int left_dim, int right_dim) {
  if (left_dim < 1 || right_dim < 1) throw DimensionError("tensor factor dimensions must be positive");
  const int dim = left_dim * right_dim;
  if (dim > kMaxDim) throw DimensionError("tensor factor algebra exceeds dimension cap");
  OperatorAlgebra alg(dim, {}, Matrix());
  alg.tensor_left_ = left_dim;
  alg.tensor_right_ = right_dim;
  alg.lazy_ = std::make_shared<LazyBasis>();
  return alg;
}

int OperatorAlgebra::complex_dimension() const noexcept {
  if (lazy_) return tensor_left_ * tensor_left_;
  return static_cast<int>(basis_.size());
}

const std::vector<ComplexMatrix>& OperatorAlgebra::basis() const {
  if (!lazy_) return basis_;
  std::call_once(lazy_->once, [this] {
    const ComplexMatrix right = ComplexMatrix::identity(tensor_right_);
    for (int i = 0; i < tensor_left_; ++i) {
      for (int j = 0; j < tensor_left_; ++j) {
        lazy_->basis.push_back(tensor_product(ComplexMatrix(unit(tensor_left_, i, j)), right));
      }
    }
  });
  return lazy_->basis;
}

double OperatorAlgebra::residual(const Matrix& m) const {
  require_same_dim(static_cast<int>(m.rows()), dim_, "algebra membership");
  if (lazy_) {
    if (tensor_right_ == 1) return 0.0;
    const int l = tensor_left_, r = tensor_right_;
    double sq = 0.0;
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) {
        const auto block = m.block(i * r, j * r, r, r);
        const Complex mean = block.trace() / static_cast<double>(r);
        sq += (block - mean * Matrix::Identity(r, r)).squaredNorm();
      }
    }
    return std::sqrt(sq);
  }
  const Vector v = vec(m);
  return (v - q_ * (q_.adjoint() * v)).norm();
}

bool OperatorAlgebra::contains(const Matrix& m, double tol) const {
  return residual(m) <= tol * std::max(1.0, m.norm());
}

bool OperatorAlgebra::contains(const OperatorAlgebra& other, double tol) const {
  if (lazy_ && other.dim_ == dim_ && (tensor_right_ == 1 || (other.lazy_ && other.tensor_right_ % tensor_right_ == 0))) {
    return true;
  }
  for (const auto& b : other.basis()) {
    if (!contains(b.matrix(), tol)) return false;
  }
  return true;
}

Filtration::Filtration(std::vector<OperatorAlgebra> algebras) : algebras_(std::move(algebras)) {
  if (algebras_.empty()) throw ValidationError("filtration needs at least A_0");
  const int dim = algebras_.front().dim();
  const auto& a0 = algebras_.front();
  if (a0.complex_dimension() != 1 || !a0.contains(Matrix::Identity(dim, dim))) {
    throw ValidationError("A_0 must be the scalar algebra C I");
  }
  for (std::size_t t = 1; t < algebras_.size(); ++t) {
    require_same_dim(algebras_[t].dim(), dim, "filtration");
    if (!algebras_[t].contains(algebras_[t - 1])) {
      throw ValidationError("filtration is not increasing: A_" + std::to_string(t - 1) +
                            " is not contained in A_" + std::to_string(t));
    }
  }
}

Filtration Filtration::tensor_qubits(int periods) {
  if (periods < 1) throw ValidationError("tensor filtration needs at least one period");
  if (periods > 6) throw DimensionError("tensor filtration limited to 6 qubits (dimension 64)");
  std::vector<OperatorAlgebra> algebras;
  const int total = 1 << periods;
  algebras.push_back(OperatorAlgebra::scalars(total));
  for (int n = 1; n <= periods; ++n) {
    algebras.push_back(OperatorAlgebra::tensor_factor(1 << n, total >> n));
  }
  return Filtration(std::move(algebras));
}

MarketModel::MarketModel(Filtration filtration, std::vector<double> bank,
                         std::vector<std::vector<HermitianOperator>> assets)
    : filtration_(std::move(filtration)), bank_(std::move(bank)), assets_(std::move(assets)) {
  const int steps = periods() + 1;
  if (static_cast<int>(bank_.size()) != steps) {
    throw ValidationError("bank account needs " + std::to_string(steps) + " values");
  }
  for (int t = 0; t < steps; ++t) {
    if (!(bank_[t] > 0.0) || !std::isfinite(bank_[t])) {
      throw ValidationError("bank account B_" + std::to_string(t) + " must be positive");
    }
  }
  for (int j = 0; j < num_assets(); ++j) {
    if (static_cast<int>(assets_[j].size()) != steps) {
      throw ValidationError("asset " + std::to_string(j) + " needs " + std::to_string(steps) +
                            " operators");
    }
    for (int t = 0; t < steps; ++t) {
      const auto& s = assets_[j][t];
      const std::string where = "asset " + std::to_string(j) + " at t=" + std::to_string(t);
      require_same_dim(s.dim(), dim(), where.c_str());
      if (min_eigenvalue(s) < -1e-10) throw ValidationError(where + " is not positive");
      if (!filtration_.at(t).contains(s.matrix())) {
        throw ValidationError(where + " is not adapted to A_" + std::to_string(t));
      }
    }
  }
}

HermitianOperator MarketModel::increment(int j, int t) const {
  return asset(j, t) - asset(j, t - 1);
}

bool MarketModel::is_discounted() const {
  for (double b : bank_) {
    if (std::abs(b - 1.0) > 1e-14) return false;
  }
  return true;
}

TradingStrategy::TradingStrategy(int periods, int num_assets)
    : periods_(periods),
      assets_(num_assets),
      terms_(static_cast<std::size_t>(periods) * num_assets),
      initial_(num_assets, 0.0) {
  if (periods < 0 || num_assets < 0) throw ValidationError("negative strategy shape");
}

void TradingStrategy::add_term(int period, int asset, double weight, ComplexMatrix op) {
  if (period < 1 || period > periods_ || asset < 0 || asset >= assets_) {
    throw ValidationError("strategy term index out of range");
  }
  if (!std::isfinite(weight)) throw ValidationError("strategy weight is not finite");
  terms_[(period - 1) * assets_ + asset].push_back({weight, std::move(op)});
}

const std::vector<StrategyTerm>& TradingStrategy::terms(int period, int asset) const {
  return terms_.at((period - 1) * assets_ + asset);
}

void TradingStrategy::set_initial(int asset, double h0) { initial_.at(asset) = h0; }

HermitianOperator TradingStrategy::act(int period, int asset, const HermitianOperator& u) const {
  Matrix out = Matrix::Zero(u.dim(), u.dim());
  for (const auto& term : terms(period, asset)) {
    require_same_dim(term.op.dim(), u.dim(), "strategy action");
    const Matrix& a = term.op.matrix();
    out += term.weight * (a.adjoint() * u.matrix() * a);
  }
  return HermitianOperator::hermitian_part(out);
}

void TradingStrategy::require_adapted(const Filtration& filtration) const {
  if (periods_ != filtration.periods()) {
    throw ValidationError("strategy has " + std::to_string(periods_) + " periods, market has " +
                          std::to_string(filtration.periods()));
  }
  for (int t = 1; t <= periods_; ++t) {
    for (int j = 0; j < assets_; ++j) {
      for (const auto& term : terms(t, j)) {
        if (!filtration.at(t - 1).contains(term.op.matrix())) {
          throw ValidationError("strategy term for asset " + std::to_string(j) + " at t=" +
                                std::to_string(t) + " is not in A_" + std::to_string(t - 1));
        }
      }
    }
  }
}

ComplexMatrix bimodule_apply(const ComplexMatrix& a, const ComplexMatrix& b,
                             const ComplexMatrix& u) {
  require_same_dim(a.dim(), u.dim(), "bimodule_apply");
  require_same_dim(b.dim(), u.dim(), "bimodule_apply");
  return ComplexMatrix(a.matrix() * u.matrix() * b.matrix());
}

MarketModel discount(const MarketModel& market) {
  const int steps = market.periods() + 1;
  std::vector<std::vector<HermitianOperator>> assets;
  for (int j = 0; j < market.num_assets(); ++j) {
    std::vector<HermitianOperator> path;
    for (int t = 0; t < steps; ++t) path.push_back((1.0 / market.bank()[t]) * market.asset(j, t));
    assets.push_back(std::move(path));
  }
  return MarketModel(market.filtration(), std::vector<double>(steps, 1.0), std::move(assets));
}

GainProcess gain_process(const TradingStrategy& h, const MarketModel& market) {
  if (!market.is_discounted()) throw ValidationError("gain process requires a discounted market");
  if (h.num_assets() != market.num_assets()) {
    throw ValidationError("strategy asset count does not match the market");
  }
  h.require_adapted(market.filtration());
  GainProcess g;
  g.values.push_back(HermitianOperator::zero(market.dim()));
  for (int t = 1; t <= market.periods(); ++t) {
    HermitianOperator next = g.values.back();
    for (int j = 0; j < market.num_assets(); ++j) next += h.act(t, j, market.increment(j, t));
    g.values.push_back(std::move(next));
  }
  return g;
}

std::vector<HermitianOperator> value_process(std::span<const double> beta,
                                             const TradingStrategy& h,
                                             const MarketModel& market) {
  const int steps = market.periods() + 1;
  if (static_cast<int>(beta.size()) != steps) {
    throw ValidationError("bank holdings need " + std::to_string(steps) + " values");
  }
  if (h.num_assets() != market.num_assets() || h.periods() != market.periods()) {
    throw ValidationError("strategy shape does not match the market");
  }
  h.require_adapted(market.filtration());
  std::vector<HermitianOperator> out;
  HermitianOperator v0 = (beta[0] * market.bank()[0]) * HermitianOperator::identity(market.dim());
  for (int j = 0; j < market.num_assets(); ++j) v0 += h.initial(j) * market.asset(j, 0);
  out.push_back(std::move(v0));
  for (int t = 1; t < steps; ++t) {
    HermitianOperator v = (beta[t] * market.bank()[t]) * HermitianOperator::identity(market.dim());
    for (int j = 0; j < market.num_assets(); ++j) v += h.act(t, j, market.asset(j, t));
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<HermitianOperator> AttainableSpace::basis() const {
  std::vector<HermitianOperator> out;
  out.reserve(generators.size());
  for (const auto& g : generators) out.push_back(g.claim);
  return out;
}

Eigen::MatrixXd AttainableSpace::coordinate_matrix() const {
  Eigen::MatrixXd m(real_dimension(dim), static_cast<Eigen::Index>(generators.size()));
  for (std::size_t k = 0; k < generators.size(); ++k) {
    m.col(static_cast<Eigen::Index>(k)) = to_real_coordinates(generators[k].claim);
  }
  return m;
}

TradingStrategy AttainableSpace::strategy(std::span<const double> coefficients) const {
  if (coefficients.size() != generators.size()) {
    throw ValidationError("coefficient count does not match the attainable basis");
  }
  TradingStrategy h(periods, num_assets);
  for (std::size_t k = 0; k < generators.size(); ++k) {
    if (coefficients[k] == 0.0) continue;
    const auto& g = generators[k];
    for (const auto& term : g.preimage) {
      h.add_term(g.period, g.asset, coefficients[k] * term.weight, term.op);
    }
  }
  return h;
}

namespace {

void add_period_generators(const MarketModel& market, int t,
                           detail::SpanBuilder<double>& span, AttainableSpace& out) {
  const auto& basis = market.filtration().at(t - 1).basis();
  const int n = static_cast<int>(basis.size());
  const Complex i_unit(0.0, 1.0);
  for (int j = 0; j < market.num_assets(); ++j) {
    const Matrix ds = market.increment(j, t).matrix();
    for (int p = 0; p < n; ++p) {
      const Matrix& ap = basis[p].matrix();
      const Matrix ap_ds = ap.adjoint() * ds;
      for (int q = p; q < n; ++q) {
        if (span.rank() == span.ambient()) return;
        const Matrix& aq = basis[q].matrix();
        const Matrix cross = ap_ds * aq;  // Ap* dS Aq
        if (p == q) {
          auto claim = HermitianOperator::hermitian_part(2.0 * cross);
          if (span.try_add(to_real_coordinates(claim), kIndependenceTol)) {
            out.generators.push_back({std::move(claim), t, j, p, q, false, {{2.0, basis[p]}}});
          }
          continue;
        }
        const Matrix sym = cross + cross.adjoint();
        auto plus = HermitianOperator::hermitian_part(sym);
        if (span.try_add(to_real_coordinates(plus), kIndependenceTol)) {
          out.generators.push_back({std::move(plus), t, j, p, q, false,
                                    {{1.0, ComplexMatrix(ap + aq)},
                                     {-1.0, basis[p]},
                                     {-1.0, basis[q]}}});
        }
        const Matrix anti = i_unit * (cross - cross.adjoint());
        auto minus = HermitianOperator::hermitian_part(anti);
        if (span.try_add(to_real_coordinates(minus), kIndependenceTol)) {
          out.generators.push_back({std::move(minus), t, j, p, q, true,
                                    {{1.0, ComplexMatrix(ap + i_unit * aq)},
                                     {-1.0, basis[p]},
                                     {-1.0, basis[q]}}});
        }
      }
    }
  }
}

}  // namespace

AttainableSpace attainable_space_basis(const MarketModel& market) {
  if (!market.is_discounted()) throw ValidationError("attainable space requires a discounted market");
  AttainableSpace out{market.dim(), market.periods(), market.num_assets(), {}};
  detail::SpanBuilder<double> span(real_dimension(market.dim()));
  for (int t = 1; t <= market.periods(); ++t) add_period_generators(market, t, span, out);
  return out;
}

AttainableSpace period_gain_space(const MarketModel& market, int period) {
  if (!market.is_discounted()) throw ValidationError("gain space requires a discounted market");
  if (period < 1 || period > market.periods()) throw ValidationError("period out of range");
  AttainableSpace out{market.dim(), market.periods(), market.num_assets(), {}};
  detail::SpanBuilder<double> span(real_dimension(market.dim()));
  add_period_generators(market, period, span, out);
  return out;
}

}  // namespace qmarket
