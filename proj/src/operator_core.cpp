#include "qmarket/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace qmarket {
namespace {

void check_dim(int n) {
  if (n < 1) throw DimensionError("operator dimension must be at least 1");
  if (n > kMaxDim) {
    throw DimensionError("operator dimension " + std::to_string(n) + " exceeds cap " +
                         std::to_string(kMaxDim));
  }
}

void check_shape(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("operator must be square, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  check_dim(static_cast<int>(m.rows()));
  if (!m.allFinite()) throw ValidationError("operator has non-finite entries");
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::SelfAdjointEigenSolver<Matrix> eigensolve(const HermitianOperator& x, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), vectors ? Eigen::ComputeEigenvectors
                                                               : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigen-solver did not converge (Frobenius norm " << x.frobenius_norm() << ")";
    throw ConvergenceError(msg.str());
  }
  return es;
}

}  // namespace

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

ComplexMatrix::ComplexMatrix(Matrix entries) : m_(std::move(entries)) { check_shape(m_); }

ComplexMatrix ComplexMatrix::identity(int dim) { return ComplexMatrix(Matrix::Identity(dim, dim)); }

ComplexMatrix ComplexMatrix::zero(int dim) { return ComplexMatrix(Matrix::Zero(dim, dim)); }

ComplexMatrix ComplexMatrix::adjoint() const { return ComplexMatrix(m_.adjoint()); }

HermitianOperator::HermitianOperator(const Matrix& m) {
  check_shape(m);
  const double asym = max_abs(m - m.adjoint());
  if (asym > 1e-12 * std::max(1.0, max_abs(m))) {
    std::ostringstream msg;
    msg << "operator is not Hermitian (||M - M*||_max = " << asym << ")";
    throw ValidationError(msg.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::identity(int dim) {
  check_dim(dim);
  return HermitianOperator(Matrix::Identity(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::zero(int dim) {
  check_dim(dim);
  return HermitianOperator(Matrix::Zero(dim, dim), Trusted{});
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = values[i];
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::hermitian_part(const Matrix& m) {
  check_shape(m);
  return HermitianOperator(0.5 * (m + m.adjoint()), Trusted{});
}

double HermitianOperator::trace() const { return m_.trace().real(); }

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  require_same_dim(dim(), other.dim(), "operator addition");
  m_ += other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  require_same_dim(dim(), other.dim(), "operator subtraction");
  m_ -= other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianOperator SpectralResolution::reconstruct() const {
  if (projections.empty()) throw ValidationError("empty spectral resolution");
  HermitianOperator out = HermitianOperator::zero(projections.front().dim());
  for (std::size_t j = 0; j < projections.size(); ++j) out += eigenvalues[j] * projections[j];
  return out;
}

double default_cluster_tolerance(const HermitianOperator& x) {
  const Eigen::VectorXd ev = eigenvalues(x);
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return 1e-8 * std::max(1.0, norm);
}

SpectralResolution spectral_decompose(const HermitianOperator& x, double cluster_tol) {
  const auto es = eigensolve(x, true);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  const int n = x.dim();
  if (cluster_tol < 0.0) {
    cluster_tol = 1e-8 * std::max(1.0, std::max(std::abs(ev(0)), std::abs(ev(n - 1))));
  }

  SpectralResolution out;
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    // Chain clustering: consecutive gaps within tolerance join the cluster.
    while (stop < n && ev(stop) - ev(stop - 1) <= cluster_tol) ++stop;
    Matrix proj = Matrix::Zero(n, n);
    double mean = 0.0;
    for (int k = start; k < stop; ++k) {
      proj += vecs.col(k) * vecs.col(k).adjoint();
      mean += ev(k);
    }
    out.eigenvalues.push_back(mean / (stop - start));
    out.projections.push_back(HermitianOperator::hermitian_part(proj));
    start = stop;
  }
  return out;
}

HermitianOperator apply_function(const HermitianOperator& x,
                                 const std::function<double(double)>& g) {
  const SpectralResolution res = spectral_decompose(x);
  HermitianOperator out = HermitianOperator::zero(x.dim());
  for (std::size_t j = 0; j < res.eigenvalues.size(); ++j) {
    const double v = g(res.eigenvalues[j]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "function value is not finite at eigenvalue " << res.eigenvalues[j];
      throw ValidationError(msg.str());
    }
    out += v * res.projections[j];
  }
  return out;
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int na = a.dim();
  const int nb = b.dim();
  if (na * nb > kMaxDim) {
    throw DimensionError("tensor product dimension " + std::to_string(na * nb) + " exceeds cap " +
                         std::to_string(kMaxDim));
  }
  Matrix out(na * nb, na * nb);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
  }
  return ComplexMatrix(std::move(out));
}

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator::hermitian_part(
      tensor_product(a.as_complex(), b.as_complex()).matrix());
}

double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "hs_inner");
  // tr(AB) = sum_ij A_ij B_ji
  const Complex tr = (a.matrix().transpose().cwiseProduct(b.matrix())).sum();
  const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
  if (std::abs(tr.imag()) > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "trace pairing has imaginary residue " << tr.imag();
    throw ConsistencyError(msg.str());
  }
  return tr.real();
}

Eigen::VectorXd eigenvalues(const HermitianOperator& x) { return eigensolve(x, false).eigenvalues(); }

double min_eigenvalue(const HermitianOperator& x) { return eigenvalues(x)(0); }

double max_eigenvalue(const HermitianOperator& x) {
  const Eigen::VectorXd ev = eigenvalues(x);
  return ev(ev.size() - 1);
}

bool is_positive(const HermitianOperator& x, double tol) { return min_eigenvalue(x) >= -tol; }

HermitianOperator pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}

Eigen::VectorXd to_real_coordinates(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  Eigen::VectorXd v(n * n);
  int k = 0;
  for (int i = 0; i < n; ++i) v(k++) = h(i, i).real();
  const double s = std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      v(k++) = s * h(i, j).real();
      v(k++) = s * h(i, j).imag();
    }
  }
  return v;
}

Eigen::VectorXd to_real_coordinates(const HermitianOperator& x) {
  return to_real_coordinates(x.matrix());
}

HermitianOperator from_real_coordinates(const Eigen::VectorXd& v, int n) {
  if (v.size() != n * n) throw DimensionError("real coordinate vector has wrong length");
  Matrix m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) m(i, i) = v(k++);
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex z(s * v(k), s * v(k + 1));
      k += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return HermitianOperator::hermitian_part(m);
}

}  // namespace qmarket
