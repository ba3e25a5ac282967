// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qmarket/arbitrage_engine.hpp"
#include "qmarket/binomial_models.hpp"
#include "qmarket/pricing_engine.hpp"
#include "random_markets.hpp"

using namespace qmarket;
using qmarket::testing::Rng;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void check(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 direction(int k) {
  const double th = 0.3 + 0.7 * k, ph = 1.1 * k;
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

QubitMarketSpec qubit_spec(double a, double b, double r, const Vec3& dir) {
  const double h = 0.5 * (b - a);
  return {0.5 * (a + b), h * dir[0], h * dir[1], h * dir[2], r, 100.0, 1.0};
}

MarketModel trinomial() {
  std::vector<double> up{90.0 / 1.05, 105.0 / 1.05, 120.0 / 1.05};
  return MarketModel(Filtration({OperatorAlgebra::scalars(3), OperatorAlgebra::full(3)}), {1.0, 1.0},
                     {{100.0 * HermitianOperator::identity(3), HermitianOperator::diagonal(up)}});
}

HermitianOperator trinomial_call() {
  std::vector<double> h{0.0, 5.0 / 1.05, 20.0 / 1.05};
  return HermitianOperator::diagonal(h);
}

testing::ClassicalMarket trinomial_classical() {
  testing::ClassicalMarket cm;
  cm.increments = Eigen::MatrixXd(3, 1);
  cm.increments << 90.0 / 1.05 - 100.0, 105.0 / 1.05 - 100.0, 120.0 / 1.05 - 100.0;
  cm.payoff = Eigen::Vector3d(0.0, 5.0 / 1.05, 20.0 / 1.05);
  return cm;
}

Outcome criterion1() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  int cases = 0, agree = 0;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const double a = -0.5 + 0.05 * i, b = 0.1 + 0.05 * j;
      const double w = b - a;
      const std::vector<double> rs{a - 0.05, a - 0.01, a + 0.25 * w, a + 0.5 * w, a + 0.75 * w, b + 0.01, b + 0.05};
      for (std::size_t k = 0; k < rs.size(); ++k) {
        const double r = rs[k];
        const QubitMarketSpec spec = qubit_spec(a, b, r, direction(9 * i + j + static_cast<int>(k)));
        const FeasibilityResult f = check_no_arbitrage(build_single_period(spec));
        const bool predicate = a < r && r < b;
        const bool free = f.status == FeasibilityStatus::kFaithfulStateFound;
        const bool decided = f.status != FeasibilityStatus::kIndeterminate;
        ++cases;
        if (decided && free == predicate) {
          ++agree;
        } else {
          check(o, false, fmt("a=%.2f b=%.2f r=%.4f status=%s", a, b, r, to_string(f.status).c_str()));
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check(o, secs < 60.0, fmt("runtime %.1f s", secs));
  if (o.pass) o.detail = fmt("%d/%d grid cases agree with a < r < b, %.2f s", agree, cases, secs);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const std::vector<QubitMarketSpec> specs{{0.05, 0.15, 0.0, 0.0, 0.125, 100.0, 1.0},
                                           {0.02, 0.06, -0.08, 0.09, 0.04, 50.0, 2.0},
                                           {-0.1, 0.0, 0.2, -0.1, -0.2, 10.0, 1.0}};
  Rng rng(2024);
  int states = 0, off = 0;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const QubitMarketSpec& spec = specs[s];
    const MarketModel m = build_single_period(spec);
    const RiskNeutralDisk d = risk_neutral_disk(spec);
    const double a = spec.a(), b = spec.b();
    const double expected = std::sqrt(1.0 - std::pow((2.0 * spec.r - a - b) / (b - a), 2));
    check(o, std::abs(d.radius - expected) <= 1e-12, fmt("spec %zu radius %.15g vs %.15g", s, d.radius, expected));
    for (const DensityState& rho : sample_disk_states(d, 100, 100 + s)) {
      ++states;
      check(o, is_martingale_state(rho, m, 1e-8) && is_faithful(rho), fmt("spec %zu sampled state rejected", s));
    }
    int made = 0;
    while (made < 100) {
      Vec3 v{testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
      if (norm3(v) >= 0.999 || std::abs(d.plane_residual(v)) < 1e-4) continue;
      ++made;
      ++off;
      check(o, !is_martingale_state(bloch_state(v[0], v[1], v[2]), m, 1e-8), fmt("spec %zu off-plane accepted", s));
    }
  }
  if (o.pass) o.detail = fmt("%d disk states accepted, %d off-plane states rejected, radii to 1e-12", states, off);
  return o;
}

Outcome criterion3() {
  Outcome o;
  Rng rng(3);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const double a = testing::uniform(rng, -0.4, -0.02), b = testing::uniform(rng, 0.02, 0.4);
    const double r = a + testing::uniform(rng, 0.1, 0.9) * (b - a);
    const QubitMarketSpec spec = qubit_spec(a, b, r, direction(pair));
    const double k = 100.0 * (1.0 + a) + testing::uniform(rng, -5.0, 5.0 + 100.0 * (b - a));
    const MarketModel m = build_single_period(spec);
    const HermitianOperator payoff = (1.0 / (1.0 + r)) * call_payoff(m.asset(0, 1), std::max(k, 0.0));
    const double price = euro_call_price(spec, std::max(k, 0.0));
    const double alpha = replicate(payoff, discount(m)).alpha;
    worst = std::max(worst, std::abs(alpha - price));
    for (const DensityState& rho : sample_disk_states(risk_neutral_disk(spec), 25, 300 + pair))
      worst = std::max(worst, std::abs(expectation(rho, payoff) - price));
  }
  check(o, worst <= 1e-9, fmt("max deviation %.3g", worst));
  const double running = euro_call_price({0.05, 0.15, 0.0, 0.0, 0.05, 100.0, 1.0}, 100.0);
  check(o, std::abs(running - 9.523809524) <= 1e-9, fmt("running example %.12f", running));
  if (o.pass) o.detail = fmt("20 pairs, max deviation %.2e; running example %.9f", worst, running);
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst_tree = 0.0, worst_engine = 0.0;
  const double a = -0.1, b = 0.2, r = 0.05;
  Rng rng(4);
  for (int n = 1; n <= 6; ++n) {
    const std::vector<double> strikes{70.0, 90.0, 100.0, 115.0, 140.0};
    for (double k : strikes) {
      worst_tree = std::max(worst_tree, std::abs(crr_price(n, 100, k, r, a, b) - binomial_tree_price(n, 100, k, r, a, b)));
    }
    if (n > 3) continue;
    NPeriodSpec spec;
    spec.N = n;
    spec.a = a;
    spec.b = b;
    spec.r = r;
    for (int p = 1; p <= n; ++p) {
      const Vec3 d = direction(p + 7);
      spec.pauli.push_back({0.15 * d[0], 0.15 * d[1], 0.15 * d[2]});
    }
    const MarketModel m = build_n_period(spec);
    const double disc = std::pow(1.0 + r, -n);
    for (int sample = 0; sample < 10; ++sample) {
      std::vector<Vec3> bloch;
      for (int p = 1; p <= n; ++p) {
        const Vec3 x = spec.pauli_vector(p);
        const QubitMarketSpec q{spec.x0(), x[0], x[1], x[2], r, 100.0, 1.0};
        bloch.push_back(sample_disk_points(risk_neutral_disk(q), 1, rng())[0]);
      }
      const DensityState rho = product_martingale_state(spec, bloch);
      for (double k : strikes) {
        const double v = expectation(rho, disc * call_payoff(m.asset(0, n), k));
        worst_engine = std::max(worst_engine, std::abs(v - crr_price(n, 100, k, r, a, b)));
      }
    }
  }
  const double bench = crr_price(2, 100, 100, r, a, b);
  check(o, worst_tree <= 1e-10, fmt("tree deviation %.3g", worst_tree));
  check(o, worst_engine <= 1e-9, fmt("tensor deviation %.3g", worst_engine));
  check(o, std::abs(bench - 13.605442) <= 1e-6, fmt("N=2 benchmark %.9f", bench));
  if (o.pass) {
    o.detail = fmt("tree max dev %.2e, tensor max dev %.2e, N=2 price %.6f", worst_tree, worst_engine, bench);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const testing::ClassicalBounds lp = testing::lp_price_bounds(trinomial_classical());
  const PriceInterval iv = price_bounds(trinomial_call(), trinomial());
  check(o, std::abs(iv.lower - lp.lower) <= 1e-6 && std::abs(iv.upper - lp.upper) <= 1e-6,
        fmt("trinomial (%.9f, %.9f) vs LP (%.9f, %.9f)", iv.lower, iv.upper, lp.lower, lp.upper));
  check(o, !iv.attainable, "trinomial call flagged attainable");
  const QubitMarketSpec spec{0.05, 0.15, 0.0, 0.0, 0.05, 100.0, 1.0};
  const MarketModel m = build_single_period(spec);
  const PriceInterval q = price_bounds((1.0 / 1.05) * call_payoff(m.asset(0, 1), 100.0), discount(m));
  const double price = replicate((1.0 / 1.05) * call_payoff(m.asset(0, 1), 100.0), discount(m)).alpha;
  check(o, std::abs(q.lower - price) <= 1e-7 && std::abs(q.upper - price) <= 1e-7,
        fmt("qubit interval (%.9f, %.9f) vs %.9f", q.lower, q.upper, price));
  if (o.pass) {
    o.detail = fmt("trinomial (%.6f, %.6f) non-attainable; qubit collapses to %.9f", iv.lower, iv.upper, price);
  }
  return o;
}

std::vector<MarketModel> decomposition_markets() {
  std::vector<MarketModel> out;
  out.push_back(discount(build_single_period({0.05, 0.15, 0.0, 0.0, 0.05, 100.0, 1.0})));
  out.push_back(trinomial());
  NPeriodSpec n2;
  n2.N = 2;
  n2.a = -0.1;
  n2.b = 0.2;
  n2.r = 0.05;
  out.push_back(discount(build_n_period(n2)));
  Rng rng(66);
  int family = 0;
  while (out.size() < 10) {
    const MarketModel m = testing::random_market(rng, static_cast<testing::Family>(family++ % 3), 1 + family % 2, 1);
    if (check_no_arbitrage(m).status == FeasibilityStatus::kFaithfulStateFound) out.push_back(m);
  }
  return out;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(6);
  double worst_recon = 0.0, worst_dc = std::numeric_limits<double>::infinity();
  const std::vector<MarketModel> markets = decomposition_markets();
  for (std::size_t i = 0; i < markets.size(); ++i) {
    const MarketModel& m = markets[i];
    const int d = m.dim();
    const GainProcess g = gain_process(testing::random_strategy(rng, m, 2), m);
    std::vector<HermitianOperator> v;
    HermitianOperator c = HermitianOperator::zero(d);
    for (int t = 0; t <= m.periods(); ++t) {
      if (t > 0) c += testing::random_positive_element(rng, m.filtration().at(t), 0.0);
      v.push_back(2.0 * HermitianOperator::identity(d) + g.values[t] - c);
    }
    try {
      const OptionalDecompositionResult r = optional_decomposition(v, m);
      const GainProcess rg = gain_process(r.strategy, m);
      for (int t = 0; t <= m.periods(); ++t) {
        const HermitianOperator rebuilt = r.v0 * HermitianOperator::identity(d) + rg.values[t] - r.consumption[t];
        worst_recon = std::max(worst_recon, (rebuilt - v[t]).frobenius_norm());
        if (t > 0) worst_dc = std::min(worst_dc, min_eigenvalue(r.consumption[t] - r.consumption[t - 1]));
      }
    } catch (const std::exception& e) {
      check(o, false, fmt("input %zu: %s", i, e.what()));
    }
  }
  check(o, worst_recon <= 1e-8, fmt("reconstruction error %.3g", worst_recon));
  check(o, worst_dc >= -1e-8, fmt("consumption increment eigenvalue %.3g", worst_dc));

  const testing::ClassicalHedge lp = testing::lp_upper_hedge(trinomial_classical());
  const std::vector<HermitianOperator> hv{lp.value * HermitianOperator::identity(3), trinomial_call()};
  const OptionalDecompositionResult h = optional_decomposition(hv, trinomial());
  const HermitianOperator ds = trinomial().increment(0, 1);
  const double gamma = hs_inner(gain_process(h.strategy, trinomial()).values[1], ds) / hs_inner(ds, ds);
  Eigen::VectorXd classical_dc = Eigen::VectorXd::Constant(3, lp.value) + trinomial_classical().increments * lp.gamma -
                                 trinomial_classical().payoff;
  std::vector<double> dcv(classical_dc.data(), classical_dc.data() + 3);
  const double dc_err = (h.consumption[1] - HermitianOperator::diagonal(dcv)).frobenius_norm();
  check(o, std::abs(h.v0 - lp.value) <= 1e-6, fmt("hedge value %.9f vs LP %.9f", h.v0, lp.value));
  check(o, std::abs(gamma - lp.gamma(0)) <= 1e-6, fmt("hedge ratio %.9f vs LP %.9f", gamma, lp.gamma(0)));
  check(o, dc_err <= 1e-6, fmt("consumption deviation %.3g", dc_err));
  if (o.pass) {
    o.detail = fmt("%zu inputs, reconstruction %.2e, min dC eig %.2e; hedge v0 %.6f gamma %.6f", markets.size(),
                   worst_recon, worst_dc, h.v0, gamma);
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  Rng rng(7);
  double worst = 0.0;
  int strategies = 0;
  for (int mk = 0; mk < 20; ++mk) {
    const MarketModel m =
        testing::random_market(rng, static_cast<testing::Family>(mk % 3), 1 + mk % 3, 1 + (mk / 3) % 2);
    const AttainableSpace space = attainable_space_basis(m);
    const auto basis = space.basis();
    Eigen::MatrixXd cols(real_dimension(m.dim()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = to_real_coordinates(basis[i]);
    const auto qr = cols.colPivHouseholderQr();
    for (int s = 0; s < 10; ++s) {
      const HermitianOperator gain = gain_process(testing::random_strategy(rng, m, 2), m).values.back();
      const Eigen::VectorXd target = to_real_coordinates(gain);
      const double res = basis.empty() ? target.norm() : (cols * qr.solve(target) - target).norm();
      worst = std::max(worst, res / std::max(1.0, target.norm()));
      ++strategies;
    }
  }
  check(o, worst <= 1e-8, fmt("max span residual %.3g", worst));
  if (o.pass) o.detail = fmt("%d strategies, max relative span residual %.2e", strategies, worst);
  return o;
}

Outcome criterion8() {
  Outcome o;
  double worst = 0.0;
  for (int d : {2, 3, 4, 8, 16}) {
    MartingaleConstraintSet none;
    none.dim = d;
    const FeasibilityResult f = max_min_eig_over_slice(none, std::nullopt);
    const double dev = std::abs(f.lambda_star - 1.0 / d);
    const double wdev =
        f.witness_state ? (f.witness_state->op() - (1.0 / d) * HermitianOperator::identity(d)).frobenius_norm() : 1.0;
    worst = std::max({worst, dev, wdev});
    check(o, dev <= 1e-9 && wdev <= 1e-9, fmt("d=%d lambda %.12f witness deviation %.3g", d, f.lambda_star, wdev));
  }
  if (o.pass) o.detail = fmt("d in {2,3,4,8,16}: max deviation from 1/d and I/d %.2e", worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"no-arbitrage iff a < r < b on the qubit grid", criterion1},
      {"risk-neutral disk membership and radius", criterion2},
      {"single-period call price = replication = disk expectation", criterion3},
      {"CRR formula vs tree and tensor valuation", criterion4},
      {"price interval vs LP oracle and collapse", criterion5},
      {"optional decomposition and upper hedge", criterion6},
      {"polarization span contains random gains", criterion7},
      {"unconstrained solver returns 1/d and I/d", criterion8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
