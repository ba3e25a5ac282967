#pragma once

// Dense complex operator algebra on C^n, n <= 64.
//
// Two strong types wrap Eigen::MatrixXcd:
//   ComplexMatrix      arbitrary square operator (elements of B(H))
//   HermitianOperator  self-adjoint operator (observables), stored symmetrized
//
// Hermitian operators also carry an isometric real coordinate map onto R^{n^2}
// so that tr(XY) becomes the Euclidean inner product; every affine-slice solver
// in the library works in these coordinates.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmarket/error.hpp"

namespace qmarket {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxDim = 64;

class ComplexMatrix {
 public:
  explicit ComplexMatrix(Matrix entries);

  static ComplexMatrix identity(int dim);
  static ComplexMatrix zero(int dim);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  ComplexMatrix adjoint() const;

 private:
  Matrix m_;
};

class HermitianOperator {
 public:
  /// Validates ||M - M*||_max <= 1e-12 max(1, ||M||_max) and stores (M + M*)/2.
  explicit HermitianOperator(const Matrix& m);
  explicit HermitianOperator(const ComplexMatrix& m) : HermitianOperator(m.matrix()) {}

  static HermitianOperator identity(int dim);
  static HermitianOperator zero(int dim);
  static HermitianOperator diagonal(std::span<const double> values);
  /// Hermitian part (M + M*)/2 of an arbitrary square matrix; no tolerance check.
  static HermitianOperator hermitian_part(const Matrix& m);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  ComplexMatrix as_complex() const { return ComplexMatrix(m_); }

  double trace() const;
  double frobenius_norm() const { return m_.norm(); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator-(HermitianOperator a) { return a *= -1.0; }

 private:
  struct Trusted {};
  HermitianOperator(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

struct SpectralResolution {
  std::vector<double> eigenvalues;              // ascending, distinct
  std::vector<HermitianOperator> projections;  // one per eigenvalue

  HermitianOperator reconstruct() const;
};

/// Default clustering tolerance 1e-8 max(1, ||X||).
double default_cluster_tolerance(const HermitianOperator& x);

/// Spectral resolution X = sum_j x_j E_j. A negative cluster_tol selects the default.
SpectralResolution spectral_decompose(const HermitianOperator& x, double cluster_tol = -1.0);

/// g(X) = sum_j g(x_j) E_j.
HermitianOperator apply_function(const HermitianOperator& x, const std::function<double(double)>& g);

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);
HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b);

/// Real trace pairing tr(AB).
double hs_inner(const HermitianOperator& a, const HermitianOperator& b);

double min_eigenvalue(const HermitianOperator& x);
double max_eigenvalue(const HermitianOperator& x);
/// Ascending eigenvalues (with multiplicity).
Eigen::VectorXd eigenvalues(const HermitianOperator& x);
bool is_positive(const HermitianOperator& x, double tol = 1e-10);

// Pauli matrices.
HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

/// Isometric coordinates on the real space of Hermitian n x n matrices:
/// diagonal entries, then sqrt(2) Re X_ij, sqrt(2) Im X_ij for i < j.
Eigen::VectorXd to_real_coordinates(const HermitianOperator& x);
Eigen::VectorXd to_real_coordinates(const Matrix& hermitian);
HermitianOperator from_real_coordinates(const Eigen::VectorXd& coords, int dim);
inline int real_dimension(int dim) { return dim * dim; }

void require_same_dim(int a, int b, const char* what);

}  // namespace qmarket
