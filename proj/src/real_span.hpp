#pragma once

// Incremental orthonormal basis over a real or complex vector space
// (modified Gram-Schmidt with one re-orthogonalisation pass).

#include <algorithm>

#include <Eigen/Dense>

namespace qmarket::detail {

template <typename Scalar>
class SpanBuilder {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit SpanBuilder(Eigen::Index ambient) : q_(ambient, 0) {}

  Eigen::Index rank() const { return q_.cols(); }
  Eigen::Index ambient() const { return q_.rows(); }
  const Mat& basis() const { return q_; }

  /// Component of v orthogonal to the current span.
  Vec residual(const Vec& v) const {
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < q_.cols(); ++k) r -= q_.col(k) * q_.col(k).dot(r);
    }
    return r;
  }

  /// Adds v when its residual exceeds tol * max(1, |v|); returns whether it was added.
  bool try_add(const Vec& v, double tol) {
    if (q_.cols() >= q_.rows()) return false;
    const Vec r = residual(v);
    const double rn = r.norm();
    if (rn <= tol * std::max(1.0, static_cast<double>(v.norm()))) return false;
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = r / rn;
    return true;
  }

 private:
  Mat q_;
};

}  // namespace qmarket::detail
