#pragma once

#include <span>
#include <vector>

#include "qmarket/operator_core.hpp"

namespace qmarket {

/// Positive unit-trace operator. States that miss the invariants by at most
/// 1e-10 (slightly negative eigenvalues, trace off by roundoff) are repaired by
/// clipping and renormalising and flagged; larger violations are rejected.
class DensityState {
 public:
  explicit DensityState(const HermitianOperator& op);

  static DensityState maximally_mixed(int dim);

  int dim() const noexcept { return op_.dim(); }
  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  bool repaired() const noexcept { return repaired_; }

 private:
  HermitianOperator op_;
  bool repaired_ = false;
};

/// Orthogonal projection E = E* = E^2.
class Event {
 public:
  explicit Event(const HermitianOperator& projection);

  const HermitianOperator& projection() const noexcept { return p_; }
  Event complement() const;

 private:
  HermitianOperator p_;
};

inline constexpr double kDefaultFaithfulEps = 1e-9;

/// E_rho(X) = tr(rho X).
double expectation(const DensityState& rho, const HermitianOperator& x);

/// tr(rho E), clamped to [0, 1].
double event_probability(const DensityState& rho, const Event& e);

bool is_faithful(const DensityState& rho, double eps = kDefaultFaithfulEps);

/// |u><u| for a unit vector u.
DensityState pure_state(const Vector& u);

/// Drops the off-diagonal entries of rho in the given orthonormal basis.
DensityState dephase(const DensityState& rho, std::span<const Vector> basis);

/// (I + x sx + y sy + z sz) / 2 for a Bloch vector of norm <= 1.
DensityState bloch_state(double x, double y, double z);

}  // namespace qmarket
