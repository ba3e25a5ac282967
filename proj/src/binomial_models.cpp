#include "qmarket/binomial_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace qmarket {
namespace {

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double dot3(const Vec3& u, const Vec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ValidationError(std::string(field) + " must be finite");
}

HermitianOperator pauli_combination(double x0, const Vec3& x) {
  return x0 * HermitianOperator::identity(2) + x[0] * pauli_x() + x[1] * pauli_y() + x[2] * pauli_z();
}

void require_rate_order(double a, double r, double b) {
  if (!(a < r && r < b)) {
    throw ValidationError("risk-neutral set is empty unless a < r < b (a=" + std::to_string(a) +
                          ", r=" + std::to_string(r) + ", b=" + std::to_string(b) + ")");
  }
}

void require_crr_params(int N, double S0, double K, double r, double a, double b) {
  if (N < 1) throw ValidationError("N must be at least 1");
  if (!(S0 > 0.0)) throw ValidationError("S0 must be positive");
  if (!(K >= 0.0)) throw ValidationError("strike must be non-negative");
  if (!(a > -1.0)) throw ValidationError("a must exceed -1");
  require_rate_order(a, r, b);
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

double QubitMarketSpec::pauli_norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }

HermitianOperator QubitMarketSpec::rate_operator() const {
  return pauli_combination(x0, {x1, x2, x3});
}

void QubitMarketSpec::validate() const {
  require_finite(x0, "x0");
  require_finite(x1, "x1");
  require_finite(x2, "x2");
  require_finite(x3, "x3");
  require_finite(r, "r");
  if (pauli_norm() == 0.0) throw ValidationError("x1, x2, x3: Pauli vector must be nonzero");
  if (!(a() > -1.0)) throw ValidationError("x: a = x0 - |x| must exceed -1");
  if (!(b() > -1.0)) throw ValidationError("x: b = x0 + |x| must exceed -1");
  if (!(r > -1.0)) throw ValidationError("r must exceed -1");
  if (!(S0 > 0.0) || !std::isfinite(S0)) throw ValidationError("S0 must be positive");
  if (!(B0 > 0.0) || !std::isfinite(B0)) throw ValidationError("B0 must be positive");
}

Vec3 RiskNeutralDisk::center() const {
  return {offset * normal[0], offset * normal[1], offset * normal[2]};
}

double RiskNeutralDisk::plane_residual(const Vec3& v) const {
  return scale * (dot3(normal, v) - offset);
}

bool RiskNeutralDisk::contains(const Vec3& v, double tol) const {
  return std::abs(plane_residual(v)) <= tol && norm3(v) < 1.0;
}

MarketModel build_single_period(const QubitMarketSpec& spec) {
  spec.validate();
  const HermitianOperator id = HermitianOperator::identity(2);
  std::vector<HermitianOperator> path{spec.S0 * id, spec.S0 * (id + spec.rate_operator())};
  Filtration filtration({OperatorAlgebra::scalars(2), OperatorAlgebra::full(2)});
  return MarketModel(std::move(filtration), {spec.B0, spec.B0 * (1.0 + spec.r)}, {std::move(path)});
}

RiskNeutralDisk risk_neutral_disk(const QubitMarketSpec& spec) {
  spec.validate();
  const double a = spec.a();
  const double b = spec.b();
  require_rate_order(a, spec.r, b);
  RiskNeutralDisk disk;
  disk.scale = spec.pauli_norm();
  disk.normal = {spec.x1 / disk.scale, spec.x2 / disk.scale, spec.x3 / disk.scale};
  disk.offset = (spec.r - 0.5 * (a + b)) / disk.scale;
  const double u = (2.0 * spec.r - a - b) / (b - a);
  disk.radius = std::sqrt(1.0 - u * u);
  return disk;
}

std::vector<Vec3> sample_disk_points(const RiskNeutralDisk& disk, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample count must be at least 1");
  // In-plane orthonormal frame (u, w) built from the axis least aligned with the normal.
  const Vec3& nv = disk.normal;
  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(nv[k]) < std::abs(nv[axis])) axis = k;
  }
  Vec3 u{0.0, 0.0, 0.0};
  u[axis] = 1.0;
  const double proj = nv[axis];
  for (int k = 0; k < 3; ++k) u[k] -= proj * nv[k];
  const double un = norm3(u);
  for (double& c : u) c /= un;
  const Vec3 w{nv[1] * u[2] - nv[2] * u[1], nv[2] * u[0] - nv[0] * u[2], nv[0] * u[1] - nv[1] * u[0]};

  const Vec3 c = disk.center();
  const double rmax = disk.radius * (1.0 - 1e-6);
  std::mt19937_64 gen(seed);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * unit_uniform(gen);
    const double rho = rmax * std::sqrt(unit_uniform(gen));
    const double cu = rho * std::cos(theta);
    const double cw = rho * std::sin(theta);
    out.push_back({c[0] + cu * u[0] + cw * w[0], c[1] + cu * u[1] + cw * w[1],
                   c[2] + cu * u[2] + cw * w[2]});
  }
  return out;
}

std::vector<DensityState> sample_disk_states(const RiskNeutralDisk& disk, int n, std::uint64_t seed) {
  std::vector<DensityState> out;
  for (const Vec3& v : sample_disk_points(disk, n, seed)) out.push_back(bloch_state(v[0], v[1], v[2]));
  return out;
}

CallReplication euro_call_replication(const QubitMarketSpec& spec, double strike) {
  spec.validate();
  require_rate_order(spec.a(), spec.r, spec.b());
  if (!(strike >= 0.0)) throw ValidationError("strike must be non-negative");
  const double sa = spec.S0 * (1.0 + spec.a());
  const double sb = spec.S0 * (1.0 + spec.b());
  const double ha = std::max(sa - strike, 0.0);
  const double hb = std::max(sb - strike, 0.0);
  CallReplication out;
  out.beta = (ha * sb - hb * sa) / ((sb - sa) * spec.B0 * (1.0 + spec.r));
  out.gamma = (hb - ha) / (sb - sa);
  return out;
}

double euro_call_price(const QubitMarketSpec& spec, double strike) {
  spec.validate();
  const double a = spec.a();
  const double b = spec.b();
  require_rate_order(a, spec.r, b);
  if (!(strike >= 0.0)) throw ValidationError("strike must be non-negative");
  const double ha = std::max(spec.S0 * (1.0 + a) - strike, 0.0);
  const double hb = std::max(spec.S0 * (1.0 + b) - strike, 0.0);
  return ((b - spec.r) / (b - a) * ha + (spec.r - a) / (b - a) * hb) / (1.0 + spec.r);
}

HermitianOperator call_payoff(const HermitianOperator& s, double strike) {
  return apply_function(s, [strike](double x) { return std::max(x - strike, 0.0); });
}

Vec3 NPeriodSpec::pauli_vector(int period) const {
  if (period < 1 || period > N) throw ValidationError("period out of range");
  if (pauli.empty()) return {0.5 * (b - a), 0.0, 0.0};
  return pauli.at(static_cast<std::size_t>(period - 1));
}

void NPeriodSpec::validate() const {
  if (N < 1 || N > 6) throw ValidationError("N must lie in 1..6 (dimension 2^N <= 64)");
  require_finite(a, "a");
  require_finite(b, "b");
  require_finite(r, "r");
  if (!(a > -1.0)) throw ValidationError("a must exceed -1");
  if (!(b > a)) throw ValidationError("b must exceed a");
  if (!(r > -1.0)) throw ValidationError("r must exceed -1");
  if (!(S0 > 0.0) || !std::isfinite(S0)) throw ValidationError("S0 must be positive");
  if (!(B0 > 0.0) || !std::isfinite(B0)) throw ValidationError("B0 must be positive");
  if (!pauli.empty() && static_cast<int>(pauli.size()) != N) {
    throw ValidationError("pauli: expected one vector per period");
  }
  const double target = 0.25 * (b - a) * (b - a);
  for (int j = 1; j <= N; ++j) {
    const Vec3 x = pauli_vector(j);
    if (std::abs(dot3(x, x) - target) > 1e-12 * std::max(1.0, target)) {
      throw ValidationError("pauli[" + std::to_string(j - 1) + "]: |x|^2 must equal (b - a)^2 / 4");
    }
  }
}

MarketModel build_n_period(const NPeriodSpec& spec) {
  spec.validate();
  const int n_periods = spec.N;
  const HermitianOperator id2 = HermitianOperator::identity(2);
  std::vector<HermitianOperator> path;
  std::vector<double> bank;
  HermitianOperator left = HermitianOperator::identity(1);
  for (int n = 0; n <= n_periods; ++n) {
    if (n > 0) left = tensor_product(left, id2 + pauli_combination(spec.x0(), spec.pauli_vector(n)));
    const int rest = 1 << (n_periods - n);
    path.push_back(spec.S0 * tensor_product(left, HermitianOperator::identity(rest)));
    bank.push_back(spec.B0 * std::pow(1.0 + spec.r, n));
  }
  return MarketModel(Filtration::tensor_qubits(n_periods), std::move(bank), {std::move(path)});
}

DensityState product_martingale_state(const NPeriodSpec& spec, const std::vector<Vec3>& bloch) {
  spec.validate();
  if (static_cast<int>(bloch.size()) != spec.N) {
    throw ValidationError("product_martingale_state needs one Bloch vector per period");
  }
  HermitianOperator rho = HermitianOperator::identity(1);
  for (int j = 1; j <= spec.N; ++j) {
    const Vec3& v = bloch[static_cast<std::size_t>(j - 1)];
    const Vec3 x = spec.pauli_vector(j);
    const double residual = dot3(x, v) - (spec.r - spec.x0());
    if (std::abs(residual) > 1e-10) {
      throw ValidationError("period " + std::to_string(j) +
                            ": Bloch vector is off the risk-neutral plane");
    }
    if (!(norm3(v) < 1.0)) {
      throw ValidationError("period " + std::to_string(j) + ": Bloch vector must have norm < 1");
    }
    rho = tensor_product(rho, bloch_state(v[0], v[1], v[2]).op());
  }
  return DensityState(rho);
}

double complementary_binomial(int m, int n, double p) {
  if (n < 0 || n > 64) throw ValidationError("n must lie in 0..64");
  if (m < 0 || m > n + 1) throw ValidationError("m must lie in 0..n+1");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  double coef = 1.0;
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) coef = coef * static_cast<double>(n - j + 1) / static_cast<double>(j);
    if (j >= m) sum += coef * std::pow(p, j) * std::pow(1.0 - p, n - j);
  }
  return sum;
}

double crr_price(int N, double S0, double K, double r, double a, double b) {
  require_crr_params(N, S0, K, r, a, b);
  const double edge = K + 1e-12 * std::max(1.0, K);
  int tau = N + 1;
  for (int n = 0; n <= N; ++n) {
    if (S0 * std::pow(1.0 + b, n) * std::pow(1.0 + a, N - n) > edge) {
      tau = n;
      break;
    }
  }
  if (tau > N) return 0.0;
  const double q = (r - a) / (b - a);
  const double qp = q * (1.0 + b) / (1.0 + r);
  return S0 * complementary_binomial(tau, N, qp) -
         K * std::pow(1.0 + r, -N) * complementary_binomial(tau, N, q);
}

double binomial_tree_price(int N, double S0, double K, double r, double a, double b) {
  require_crr_params(N, S0, K, r, a, b);
  const double q = (r - a) / (b - a);
  std::vector<double> v(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) {
    v[j] = std::max(S0 * std::pow(1.0 + b, j) * std::pow(1.0 + a, N - j) - K, 0.0);
  }
  for (int step = N; step > 0; --step) {
    for (int j = 0; j < step; ++j) v[j] = (q * v[j + 1] + (1.0 - q) * v[j]) / (1.0 + r);
  }
  return v[0];
}

}  // namespace qmarket
