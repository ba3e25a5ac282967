#pragma once

// Convex solvers over affine slices of the Hermitian matrices.
//
// A slice is {X = P + sum_a y_a D_a}, with D_a orthonormal in the trace
// pairing. Two problems are solved over it:
//
//   maximize_min_eigenvalue   max lambda_min(X)            (feasibility)
//   maximize_expectation      max tr(XA) s.t. X >= 0      (price bounds)
//
// Both report a certified upper bound obtained from a dual matrix Z >= 0 that
// annihilates every direction D_a: for such Z, lambda_min(X) tr Z <= tr(PZ)
// on the whole slice.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmarket/operator_core.hpp"

namespace qmarket {

struct SolverOptions {
  int max_iterations = 50000;
  double gap_tolerance = 1e-10;
  /// Iteration budget of the supergradient phase before the barrier polish.
  int supergradient_iterations = 2000;
  /// Seeded random start offset for robustness testing; off by default.
  std::optional<std::uint64_t> perturbation_seed;
  double perturbation_scale = 1e-3;
};

class AffineSlice {
 public:
  /// {X = offset + U w : tr(X E_i) = rhs_i}. `ambient` holds orthonormal real
  /// coordinate columns of U; an empty matrix means all Hermitian matrices.
  /// The particular point is the minimum-norm correction of `offset`.
  /// Returns nullopt when the equations are inconsistent (residual > tol).
  static std::optional<AffineSlice> build(const HermitianOperator& offset,
                                          const Eigen::MatrixXd& ambient,
                                          std::span<const HermitianOperator> equations,
                                          std::span<const double> rhs,
                                          double residual_tol = 1e-8);

  /// {X : tr X = 1, tr(X G_m) = 0}, anchored at the projection of I/d.
  static std::optional<AffineSlice> unit_trace_orthogonal_to(
      int dim, std::span<const HermitianOperator> constraints);

  /// {X in span(generators) : tr X = 1}.
  static std::optional<AffineSlice> unit_trace_in_span(
      int dim, std::span<const HermitianOperator> generators);

  /// offset + span(generators).
  static AffineSlice shifted_span(const HermitianOperator& offset,
                                  std::span<const HermitianOperator> generators);

  int dim() const noexcept { return point_.dim(); }
  int degrees_of_freedom() const noexcept { return static_cast<int>(dirs_.cols()); }
  const HermitianOperator& point() const noexcept { return point_; }
  const Eigen::MatrixXd& directions() const noexcept { return dirs_; }
  const std::vector<Matrix>& direction_operators() const noexcept { return dir_ops_; }
  bool identity_orthogonal() const noexcept { return identity_orthogonal_; }

  HermitianOperator at(const Eigen::VectorXd& y) const;
  Eigen::VectorXd coordinates_of(const HermitianOperator& x) const;
  /// Frobenius distance from x to the slice.
  double distance(const HermitianOperator& x) const;
  /// Removes the components of x along the slice directions.
  HermitianOperator project_out_directions(const HermitianOperator& x) const;

 private:
  AffineSlice(HermitianOperator point, Eigen::MatrixXd dirs);

  HermitianOperator point_;
  Eigen::MatrixXd dirs_;
  std::vector<Matrix> dir_ops_;
  bool identity_orthogonal_ = false;
};

struct MinEigenvalueSolution {
  HermitianOperator argmax;
  double lambda;
  double upper_bound;  // +inf when no certificate could be formed
  int iterations;
  int supergradient_iterations;
  bool certified;      // upper_bound - lambda <= gap_tolerance
};

MinEigenvalueSolution maximize_min_eigenvalue(const AffineSlice& slice,
                                              const SolverOptions& options = {});

struct ExpectationSolution {
  HermitianOperator argmax;
  double value;
  double upper_bound;
  int iterations;
  bool certified;
};

/// max tr(X A) over the positive part of a unit-trace slice, by log-det barrier
/// path following from a strictly positive interior point of the slice.
ExpectationSolution maximize_expectation(const AffineSlice& slice,
                                         const HermitianOperator& objective,
                                         const HermitianOperator& interior_start,
                                         const SolverOptions& options = {});

}  // namespace qmarket
