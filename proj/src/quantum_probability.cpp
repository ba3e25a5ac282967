#include "qmarket/quantum_probability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmarket {
namespace {

constexpr double kStateTol = 1e-10;

}  // namespace

DensityState::DensityState(const HermitianOperator& op) : op_(op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix());
  if (es.info() != Eigen::Success) throw ConvergenceError("eigen-solver failed on state");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tr = op.trace();
  if (ev(0) < -kStateTol || std::abs(tr - 1.0) > kStateTol) {
    std::ostringstream msg;
    msg << "not a state: min eigenvalue " << ev(0) << ", trace " << tr;
    throw ValidationError(msg.str());
  }
  if (ev(0) < 0.0) {
    const Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    const Matrix& u = es.eigenvectors();
    Matrix m = u * clipped.cast<Complex>().asDiagonal() * u.adjoint();
    m /= clipped.sum();
    op_ = HermitianOperator::hermitian_part(m);
    repaired_ = true;
  } else if (tr != 1.0) {
    op_ *= 1.0 / tr;
    repaired_ = std::abs(tr - 1.0) > 1e-12;
  }
}

DensityState DensityState::maximally_mixed(int dim) {
  return DensityState((1.0 / dim) * HermitianOperator::identity(dim));
}

Event::Event(const HermitianOperator& projection) : p_(projection) {
  const Matrix& m = p_.matrix();
  const double err = (m * m - m).cwiseAbs().maxCoeff();
  if (err > kStateTol) {
    std::ostringstream msg;
    msg << "not a projection: ||E^2 - E||_max = " << err;
    throw ValidationError(msg.str());
  }
}

Event Event::complement() const { return Event(HermitianOperator::identity(p_.dim()) - p_); }

double expectation(const DensityState& rho, const HermitianOperator& x) {
  require_same_dim(rho.dim(), x.dim(), "expectation");
  return hs_inner(rho.op(), x);
}

double event_probability(const DensityState& rho, const Event& e) {
  require_same_dim(rho.dim(), e.projection().dim(), "event_probability");
  return std::clamp(hs_inner(rho.op(), e.projection()), 0.0, 1.0);
}

bool is_faithful(const DensityState& rho, double eps) { return min_eigenvalue(rho.op()) > eps; }

DensityState pure_state(const Vector& u) {
  if (std::abs(u.norm() - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "pure state vector is not normalized (norm " << u.norm() << ")";
    throw ValidationError(msg.str());
  }
  return DensityState(HermitianOperator::hermitian_part(u * u.adjoint()));
}

DensityState dephase(const DensityState& rho, std::span<const Vector> basis) {
  const int n = rho.dim();
  if (static_cast<int>(basis.size()) != n) {
    throw ValidationError("dephasing basis must contain exactly dim vectors");
  }
  Matrix u(n, n);
  for (int k = 0; k < n; ++k) {
    if (basis[k].size() != n) throw DimensionError("dephasing basis vector has wrong length");
    u.col(k) = basis[k];
  }
  const double err = (u.adjoint() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    std::ostringstream msg;
    msg << "dephasing basis is not orthonormal (error " << err << ")";
    throw ValidationError(msg.str());
  }
  const Matrix in_basis = u.adjoint() * rho.matrix() * u;
  const Matrix diag = in_basis.diagonal().asDiagonal();
  return DensityState(HermitianOperator::hermitian_part(u * diag * u.adjoint()));
}

DensityState bloch_state(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (norm > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "Bloch vector norm " << norm << " exceeds 1";
    throw ValidationError(msg.str());
  }
  return DensityState(0.5 * (HermitianOperator::identity(2) + x * pauli_x() + y * pauli_y() +
                             z * pauli_z()));
}

}  // namespace qmarket
