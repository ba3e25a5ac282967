#include "qmarket/slice_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "real_span.hpp"

namespace qmarket {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd orthonormal_span(int dim, std::span<const HermitianOperator> generators) {
  detail::SpanBuilder<double> span(real_dimension(dim));
  for (const auto& g : generators) {
    require_same_dim(g.dim(), dim, "slice generator");
    span.try_add(to_real_coordinates(g), 1e-9);
  }
  return span.basis();
}

double real_trace_product(const Matrix& a, const Matrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

// Certified bound on max lambda_min over the slice from a candidate Z >= 0.
double min_eig_certificate(const AffineSlice& slice, const HermitianOperator& z) {
  HermitianOperator zp = slice.project_out_directions(z);
  const double low = min_eigenvalue(zp);
  if (low < 0.0) {
    if (!slice.identity_orthogonal()) return kInf;
    zp += (-low) * HermitianOperator::identity(slice.dim());
  }
  const double tr = zp.trace();
  if (!(tr > 0.0)) return kInf;
  return hs_inner(slice.point(), zp) / tr;
}

// Certified bound on max tr(XA) over positive unit-trace X in the slice from a
// candidate Z >= 0 with A + Z approximately orthogonal to the directions.
double expectation_certificate(const AffineSlice& slice, const HermitianOperator& a,
                               const HermitianOperator& z) {
  HermitianOperator y = slice.project_out_directions(a + z);
  const double low = min_eigenvalue(y - a);
  double shift = 0.0;
  if (low < 0.0) {
    if (!slice.identity_orthogonal()) return kInf;
    shift = -low;
  }
  return hs_inner(slice.point(), y) + shift * slice.point().trace();
}

// maximize c0 + c'z + tau logdet(F0 + sum_i z_i F_i)
struct LmiBarrier {
  Matrix f0;
  std::vector<Matrix> f;
  Eigen::VectorXd c;

  Matrix eval(const Eigen::VectorXd& z) const {
    Matrix m = f0;
    for (std::size_t i = 0; i < f.size(); ++i) m += z(static_cast<Eigen::Index>(i)) * f[i];
    return m;
  }

  // Returns -inf outside the positive-definite cone.
  double merit(const Eigen::VectorXd& z, double tau) const {
    const Eigen::LLT<Matrix> llt(eval(z));
    if (llt.info() != Eigen::Success) return -kInf;
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal().real();
    if ((diag.array() <= 0.0).any()) return -kInf;
    return c.dot(z) + 2.0 * tau * diag.array().log().sum();
  }
};

struct NewtonStep {
  Eigen::VectorXd direction;
  double decrement_sq;
  Matrix inverse;
};

NewtonStep newton_step(const LmiBarrier& prob, const Eigen::VectorXd& z, double tau) {
  const Eigen::LLT<Matrix> llt(prob.eval(z));
  const int n = static_cast<int>(prob.f0.rows());
  Matrix w = llt.solve(Matrix::Identity(n, n));
  w = 0.5 * (w + w.adjoint());
  const auto m = static_cast<Eigen::Index>(prob.f.size());
  std::vector<Matrix> g_ops(prob.f.size());
  Eigen::VectorXd grad(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g_ops[i] = w * prob.f[i];
    grad(i) = prob.c(i) + tau * g_ops[i].trace().real();
  }
  Eigen::MatrixXd hess(m, m);  // negated Hessian, positive definite
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = tau * real_trace_product(g_ops[i], g_ops[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  Eigen::VectorXd dir = ldlt.solve(grad);
  if (!dir.allFinite()) dir = hess.completeOrthogonalDecomposition().solve(grad);
  return {dir, grad.dot(dir) / tau, std::move(w)};
}

struct BarrierOutcome {
  Eigen::VectorXd z;
  Matrix dual;  // tau * F(z)^{-1} at the last centred point
  int iterations = 0;
  bool stopped_by_certificate = false;
};

// Path following with damped Newton centring. `certify` is called after each
// centring with the current dual matrix and returns true to stop.
template <typename Certify>
BarrierOutcome follow_path(const LmiBarrier& prob, Eigen::VectorXd z, double tau0, double factor,
                           double tau_floor, int budget, Certify&& certify) {
  BarrierOutcome out;
  double tau = tau0;
  while (true) {
    NewtonStep step = newton_step(prob, z, tau);
    for (int inner = 0; inner < 80 && out.iterations < budget; ++inner) {
      if (step.decrement_sq <= 1e-12) break;
      ++out.iterations;
      const double base = prob.merit(z, tau);
      double alpha = 1.0;
      Eigen::VectorXd trial = z + step.direction;
      // Armijo on the barrier merit with the Newton decrement as slope.
      while (alpha > 1e-12) {
        trial = z + alpha * step.direction;
        const double val = prob.merit(trial, tau);
        if (val >= base + 0.25 * alpha * tau * step.decrement_sq) break;
        alpha *= 0.5;
      }
      if (alpha <= 1e-12) break;
      z = trial;
      step = newton_step(prob, z, tau);
    }
    out.z = z;
    out.dual = tau * step.inverse;
    if (certify(z, out.dual, tau)) {
      out.stopped_by_certificate = true;
      break;
    }
    if (tau <= tau_floor || out.iterations >= budget) break;
    tau = std::max(tau * factor, tau_floor);
  }
  return out;
}

}  // namespace

AffineSlice::AffineSlice(HermitianOperator point, Eigen::MatrixXd dirs)
    : point_(std::move(point)), dirs_(std::move(dirs)) {
  const int d = point_.dim();
  dir_ops_.reserve(static_cast<std::size_t>(dirs_.cols()));
  for (Eigen::Index a = 0; a < dirs_.cols(); ++a) {
    dir_ops_.push_back(from_real_coordinates(dirs_.col(a), d).matrix());
  }
  const Eigen::VectorXd id = to_real_coordinates(HermitianOperator::identity(d));
  identity_orthogonal_ = dirs_.cols() == 0 || (dirs_.transpose() * id).norm() <= 1e-12;
}

std::optional<AffineSlice> AffineSlice::build(const HermitianOperator& offset,
                                              const Eigen::MatrixXd& ambient,
                                              std::span<const HermitianOperator> equations,
                                              std::span<const double> rhs,
                                              double residual_tol) {
  if (equations.size() != rhs.size()) throw ValidationError("slice equations and rhs differ in size");
  const int d = offset.dim();
  const Eigen::Index big_n = real_dimension(d);
  const bool whole_space = ambient.cols() == 0 && ambient.rows() == 0;
  if (!whole_space && ambient.rows() != big_n) throw DimensionError("slice ambient basis has wrong rows");
  const Eigen::Index k = whole_space ? big_n : ambient.cols();
  const auto m = static_cast<Eigen::Index>(equations.size());

  const Eigen::VectorXd o = to_real_coordinates(offset);
  Eigen::MatrixXd eq(big_n, m);
  Eigen::VectorXd e(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    require_same_dim(equations[i].dim(), d, "slice equation");
    eq.col(i) = to_real_coordinates(equations[i]);
    e(i) = rhs[i];
  }
  const Eigen::MatrixXd mm = whole_space ? Eigen::MatrixXd(eq.transpose())
                                         : Eigen::MatrixXd(eq.transpose() * ambient);
  const Eigen::VectorXd target = e - eq.transpose() * o;

  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd null_basis;
  if (m == 0) {
    null_basis = Eigen::MatrixXd::Identity(k, k);
  } else {
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(mm);
    w0 = cod.solve(target);
    if ((mm * w0 - target).norm() > residual_tol * std::max(1.0, e.norm())) return std::nullopt;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mm.transpose());
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    null_basis = q.rightCols(k - rank);
  }
  Eigen::VectorXd point = o + (whole_space ? w0 : Eigen::VectorXd(ambient * w0));
  Eigen::MatrixXd dirs = whole_space ? null_basis : Eigen::MatrixXd(ambient * null_basis);
  return AffineSlice(from_real_coordinates(point, d), std::move(dirs));
}

std::optional<AffineSlice> AffineSlice::unit_trace_orthogonal_to(
    int dim, std::span<const HermitianOperator> constraints) {
  std::vector<HermitianOperator> eqs;
  std::vector<double> rhs;
  eqs.push_back(HermitianOperator::identity(dim));
  rhs.push_back(1.0);
  for (const auto& g : constraints) {
    eqs.push_back(g);
    rhs.push_back(0.0);
  }
  return build((1.0 / dim) * HermitianOperator::identity(dim), Eigen::MatrixXd(), eqs, rhs);
}

std::optional<AffineSlice> AffineSlice::unit_trace_in_span(
    int dim, std::span<const HermitianOperator> generators) {
  const Eigen::MatrixXd basis = orthonormal_span(dim, generators);
  if (basis.cols() == 0) return std::nullopt;
  const HermitianOperator id = HermitianOperator::identity(dim);
  const double one = 1.0;
  return build(HermitianOperator::zero(dim), basis, std::span(&id, 1), std::span(&one, 1));
}

AffineSlice AffineSlice::shifted_span(const HermitianOperator& offset,
                                      std::span<const HermitianOperator> generators) {
  const Eigen::MatrixXd basis = orthonormal_span(offset.dim(), generators);
  return AffineSlice(offset, basis);
}

HermitianOperator AffineSlice::at(const Eigen::VectorXd& y) const {
  Matrix m = point_.matrix();
  for (std::size_t a = 0; a < dir_ops_.size(); ++a) m += y(static_cast<Eigen::Index>(a)) * dir_ops_[a];
  return HermitianOperator::hermitian_part(m);
}

Eigen::VectorXd AffineSlice::coordinates_of(const HermitianOperator& x) const {
  return dirs_.transpose() * (to_real_coordinates(x) - to_real_coordinates(point_));
}

double AffineSlice::distance(const HermitianOperator& x) const {
  const Eigen::VectorXd diff = to_real_coordinates(x) - to_real_coordinates(point_);
  return (diff - dirs_ * (dirs_.transpose() * diff)).norm();
}

HermitianOperator AffineSlice::project_out_directions(const HermitianOperator& x) const {
  const Eigen::VectorXd v = to_real_coordinates(x);
  return from_real_coordinates(v - dirs_ * (dirs_.transpose() * v), dim());
}

MinEigenvalueSolution maximize_min_eigenvalue(const AffineSlice& slice,
                                              const SolverOptions& options) {
  const int d = slice.dim();
  const int n = slice.degrees_of_freedom();

  if (n == 0) {
    const double lam = min_eigenvalue(slice.point());
    return {slice.point(), lam, lam, 0, 0, true};
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  if (options.perturbation_seed) {
    std::mt19937_64 rng(*options.perturbation_seed);
    std::normal_distribution<double> normal(0.0, options.perturbation_scale);
    for (int a = 0; a < n; ++a) y(a) = normal(rng);
  }

  double best_lambda = -kInf;
  double best_upper = kInf;
  Eigen::VectorXd best_y = y;
  const double step_scale = 0.5 * std::max(1e-6, slice.point().frobenius_norm());
  const int sg_budget = std::min(options.supergradient_iterations, options.max_iterations);
  int k = 0;
  int last_improvement = 0;

  // Phase 1: supergradient ascent on the concave function lambda_min.
  while (k < sg_budget) {
    ++k;
    const HermitianOperator x = slice.at(y);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
    if (es.info() != Eigen::Success) throw ConvergenceError("eigen-solver failed in supergradient ascent");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lam = ev(0);
    const double cluster_tol = 1e-8 * std::max(1.0, std::max(std::abs(ev(0)), std::abs(ev(d - 1))));
    int mult = 1;
    while (mult < d && ev(mult) - lam <= cluster_tol) ++mult;
    const Matrix& u = es.eigenvectors();
    const Matrix proj = u.leftCols(mult) * u.leftCols(mult).adjoint() / static_cast<double>(mult);
    const HermitianOperator p = HermitianOperator::hermitian_part(proj);

    if (lam > best_lambda + 1e-15) {
      best_lambda = lam;
      best_y = y;
      last_improvement = k;
    }
    const double upper = min_eig_certificate(slice, p);
    if (upper < best_upper) {
      best_upper = upper;
      last_improvement = k;
    }
    if (best_upper - best_lambda <= options.gap_tolerance) break;

    const Eigen::VectorXd g = slice.directions().transpose() * to_real_coordinates(p);
    const double gn = g.norm();
    if (gn < 1e-15) break;
    double step = step_scale / std::sqrt(static_cast<double>(k)) / gn;
    if (std::isfinite(best_upper)) step = std::min(step, (best_upper - lam) / (gn * gn));
    y += step * g;
    if (k - last_improvement > 200) break;
  }

  int iterations = k;
  if (best_upper - best_lambda > options.gap_tolerance && iterations < options.max_iterations) {
    // Phase 2: log-det barrier polish on max t s.t. X(y) - tI > 0.
    LmiBarrier prob;
    prob.f0 = slice.point().matrix();
    prob.f = slice.direction_operators();
    prob.f.push_back(-Matrix::Identity(d, d));
    prob.c = Eigen::VectorXd::Zero(n + 1);
    prob.c(n) = 1.0;
    Eigen::VectorXd z(n + 1);
    z.head(n) = best_y;
    const double margin = 0.1 * std::max(1.0, std::abs(best_lambda));
    z(n) = best_lambda - margin;
    const double tau0 = margin / d;
    auto certify = [&](const Eigen::VectorXd& zc, const Matrix& dual, double) {
      const HermitianOperator x = slice.at(zc.head(n));
      const double lam = min_eigenvalue(x);
      if (lam > best_lambda) {
        best_lambda = lam;
        best_y = zc.head(n);
      }
      if (std::abs(zc(n)) > 1e12 * std::max(1.0, slice.point().frobenius_norm())) {
        throw ConvergenceError("minimum eigenvalue is unbounded on the slice");
      }
      best_upper = std::min(best_upper, min_eig_certificate(slice, HermitianOperator::hermitian_part(dual)));
      return best_upper - best_lambda <= options.gap_tolerance;
    };
    const BarrierOutcome out = follow_path(prob, z, tau0, 0.5, 1e-16,
                                           options.max_iterations - iterations, certify);
    iterations += out.iterations;
  }

  const bool certified = best_upper - best_lambda <= options.gap_tolerance;
  return {slice.at(best_y), best_lambda, best_upper, iterations, k, certified};
}

ExpectationSolution maximize_expectation(const AffineSlice& slice,
                                         const HermitianOperator& objective,
                                         const HermitianOperator& interior_start,
                                         const SolverOptions& options) {
  require_same_dim(objective.dim(), slice.dim(), "maximize_expectation");
  const int n = slice.degrees_of_freedom();
  if (slice.distance(interior_start) > 1e-8) {
    throw ValidationError("barrier start point does not lie on the slice");
  }
  if (min_eigenvalue(interior_start) <= 0.0) {
    throw ValidationError("barrier start point is not strictly positive");
  }
  if (n == 0) {
    const double v = hs_inner(slice.point(), objective);
    return {slice.point(), v, v, 0, true};
  }

  LmiBarrier prob;
  prob.f0 = slice.point().matrix();
  prob.f = slice.direction_operators();
  prob.c = slice.directions().transpose() * to_real_coordinates(objective);

  double upper = kInf;
  auto certify = [&](const Eigen::VectorXd&, const Matrix& dual, double) {
    upper = std::min(upper, expectation_certificate(slice, objective,
                                                    HermitianOperator::hermitian_part(dual)));
    return false;
  };
  const BarrierOutcome out = follow_path(prob, slice.coordinates_of(interior_start), 1.0, 0.5,
                                         1e-10, options.max_iterations, certify);
  const HermitianOperator x = slice.at(out.z);
  const double value = hs_inner(x, objective);
  const double gap_scale = std::max(1.0, std::abs(value));
  return {x, value, upper, out.iterations, upper - value <= 1e-8 * gap_scale};
}

}  // namespace qmarket
