#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <json.hpp>

#include "qmarket/arbitrage_engine.hpp"
#include "qmarket/cli.hpp"
#include "qmarket/pricing_engine.hpp"

#ifndef QMARKET_VERSION
#define QMARKET_VERSION "0.0.0"
#endif

namespace qmarket::cli {
namespace {

using json = nlohmann::json;

// Witness matrices and strategies are written out only up to this dimension.
constexpr int kMaxReportedDim = 8;

// Twelve significant digits keeps reports stable against last-bit noise.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({num(m(r, c).real()), num(m(r, c).imag())});
    rows.push_back(std::move(row));
  }
  return rows;
}

json bloch_json(const HermitianOperator& rho) {
  return {num(hs_inner(rho, pauli_x())), num(hs_inner(rho, pauli_y())), num(hs_inner(rho, pauli_z()))};
}

json state_json(const std::optional<DensityState>& rho) {
  if (!rho) return nullptr;
  json out = {{"min_eigenvalue", num(min_eigenvalue(rho->op()))}};
  if (rho->dim() == 2) out["bloch"] = bloch_json(rho->op());
  if (rho->dim() <= kMaxReportedDim) out["matrix"] = matrix_json(rho->matrix());
  return out;
}

json strategy_json(const TradingStrategy& h, int dim) {
  json out = json::array();
  for (int t = 1; t <= h.periods(); ++t) {
    for (int j = 0; j < h.num_assets(); ++j) {
      for (const StrategyTerm& term : h.terms(t, j)) {
        json item = {{"period", t}, {"asset", j}, {"weight", num(term.weight)}};
        if (dim <= kMaxReportedDim) item["op"] = matrix_json(term.op.matrix());
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

struct Context {
  const Scenario& scenario;
  MarketModel market;
  MarketModel disc;
  SolverOptions options;
  long long iterations = 0;
  double max_gap = 0.0;
  std::string indeterminate;  // set when a decision could not be certified

  explicit Context(const Scenario& s)
      : scenario(s), market(s.market()), disc(discount(market)), options(s.solver_options()) {}

  double bank0() const { return market.bank().front(); }
  double bank_t(int t) const { return market.bank().at(static_cast<std::size_t>(t)); }

  HermitianOperator discounted_payoff(const ClaimSpec& c) const {
    return (1.0 / bank_t(market.periods())) * scenario.payoff(c, market);
  }

  void track_gap(double lower_value, double certificate) {
    if (std::isfinite(lower_value) && std::isfinite(certificate)) {
      max_gap = std::max(max_gap, certificate - lower_value);
    }
  }
};

void require_claims(const Scenario& s, Command cmd) {
  if (s.claims.empty()) throw UsageError(command_name(cmd) + " needs at least one claim in the scenario");
}

json check_arbitrage(Context& ctx) {
  const FeasibilityResult f = check_no_arbitrage(ctx.market, ctx.options);
  ctx.iterations += f.iterations;
  ctx.track_gap(f.lambda_star, f.upper_bound);
  json out = {{"status", to_string(f.status)},
              {"lambda_star", num(f.lambda_star)},
              {"upper_bound", num(f.upper_bound)},
              {"constraints", build_constraints(ctx.disc).size()},
              {"witness", state_json(f.witness_state)}};
  if (f.arbitrage_claim) {
    json claim = {{"min_eigenvalue", num(min_eigenvalue(*f.arbitrage_claim))},
                  {"trace", num(f.arbitrage_claim->trace())}};
    if (f.arbitrage_claim->dim() == 2) claim["pauli"] = bloch_json(*f.arbitrage_claim);
    if (f.arbitrage_claim->dim() <= kMaxReportedDim) claim["matrix"] = matrix_json(f.arbitrage_claim->matrix());
    out["arbitrage_claim"] = claim;
  } else {
    out["arbitrage_claim"] = nullptr;
  }
  if (f.status == FeasibilityStatus::kIndeterminate) {
    ctx.indeterminate = "no-arbitrage test is indeterminate (lambda_star " + std::to_string(f.lambda_star) + ")";
  }
  return out;
}

json interval_json(Context& ctx, const PriceInterval& iv) {
  ctx.iterations += iv.iterations;
  const double b0 = ctx.bank0();
  return {{"lower", num(b0 * iv.lower)},
          {"upper", num(b0 * iv.upper)},
          {"lower_certificate", num(b0 * iv.lower_certificate)},
          {"upper_certificate", num(b0 * iv.upper_certificate)},
          {"attainable", iv.attainable},
          {"open", iv.interval_open},
          {"lower_witness", state_json(iv.lower_witness)},
          {"upper_witness", state_json(iv.upper_witness)}};
}

json price(Context& ctx, bool cross_check) {
  json out = json::object();
  for (const ClaimSpec& c : ctx.scenario.claims) {
    const HermitianOperator payoff = ctx.discounted_payoff(c);
    json item;
    if (cross_check) {
      const PriceReport r = arbitrage_free_prices(payoff, ctx.disc, ctx.options);
      item = interval_json(ctx, r.interval);
      item["unique"] = r.unique;
      item["price"] = r.unique ? num(ctx.bank0() * r.price) : json(nullptr);
      item["replication_residual"] = num(r.replication.residual);
    } else {
      item = interval_json(ctx, price_bounds(payoff, ctx.disc, ctx.options));
    }
    out[c.name] = item;
  }
  return out;
}

json replicate_all(Context& ctx) {
  json out = json::object();
  for (const ClaimSpec& c : ctx.scenario.claims) {
    const HermitianOperator payoff = ctx.discounted_payoff(c);
    const Replication r = replicate(payoff, ctx.disc);
    const GainProcess g = gain_process(r.strategy, ctx.disc);
    const HermitianOperator replica = r.alpha * HermitianOperator::identity(ctx.disc.dim()) + g.values.back();
    out[c.name] = {{"attainable", r.attainable},
                   {"alpha", num(ctx.bank0() * r.alpha)},
                   {"residual", num(r.residual)},
                   {"replica_error", num((replica - payoff).frobenius_norm())},
                   {"terms", strategy_json(r.strategy, ctx.disc.dim())}};
  }
  return out;
}

json decomposition_json(Context& ctx, const std::vector<HermitianOperator>& v) {
  const OptionalDecompositionResult d = optional_decomposition(v, ctx.disc, ctx.options);
  const GainProcess g = gain_process(d.strategy, ctx.disc);
  double recon = 0.0;
  json increments = json::array();
  json consumption = json::array();
  for (std::size_t t = 0; t < v.size(); ++t) {
    const HermitianOperator rebuilt =
        d.v0 * HermitianOperator::identity(ctx.disc.dim()) + g.values[t] - d.consumption[t];
    recon = std::max(recon, (rebuilt - v[t]).frobenius_norm());
    if (ctx.disc.dim() <= kMaxReportedDim) consumption.push_back(matrix_json(d.consumption[t].matrix()));
    if (t > 0) increments.push_back(num(min_eigenvalue(d.consumption[t] - d.consumption[t - 1])));
  }
  json lambdas = json::array();
  for (double l : d.period_lambda) lambdas.push_back(num(l));
  return {{"v0", num(ctx.bank0() * d.v0)},
          {"period_lambda", lambdas},
          {"consumption_increment_min_eigenvalue", increments},
          {"consumption_discounted", consumption},
          {"reconstruction_error", num(recon)},
          {"terms", strategy_json(d.strategy, ctx.disc.dim())}};
}

json decompose(Context& ctx) {
  const int periods = ctx.disc.periods();
  if (!ctx.scenario.value_process.empty()) {
    std::vector<HermitianOperator> v;
    for (int t = 0; t <= periods; ++t) {
      v.push_back((1.0 / ctx.bank_t(t)) * HermitianOperator(ctx.scenario.value_process[static_cast<std::size_t>(t)]));
    }
    return {{"value_process", decomposition_json(ctx, v)}};
  }
  if (periods != 1) {
    throw UsageError("decompose needs a value_process unless the market has a single period");
  }
  require_claims(ctx.scenario, Command::kDecompose);
  json out = json::object();
  for (const ClaimSpec& c : ctx.scenario.claims) {
    const HermitianOperator payoff = ctx.discounted_payoff(c);
    const PriceInterval iv = price_bounds(payoff, ctx.disc, ctx.options);
    ctx.iterations += iv.iterations;
    const std::vector<HermitianOperator> v{iv.upper * HermitianOperator::identity(ctx.disc.dim()), payoff};
    out[c.name] = decomposition_json(ctx, v);
  }
  return out;
}

json disk(Context& ctx) {
  if (ctx.scenario.kind != Scenario::MarketKind::kQubit) throw UsageError("disk needs a qubit market");
  const QubitMarketSpec& spec = ctx.scenario.qubit;
  const RiskNeutralDisk d = risk_neutral_disk(spec);
  const std::vector<Vec3> pts = sample_disk_points(d, ctx.scenario.solver.samples, ctx.scenario.solver.seed);
  json samples = json::array();
  double worst = 0.0;
  for (const Vec3& p : pts) {
    samples.push_back({num(p[0]), num(p[1]), num(p[2])});
    worst = std::max(worst, std::abs(d.plane_residual(p)));
  }
  json calls = json::object();
  for (const ClaimSpec& c : ctx.scenario.claims) {
    if (c.function != "call" || c.asset != 0) continue;
    const HermitianOperator payoff = ctx.discounted_payoff(c);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Vec3& p : pts) {
      const double e = ctx.bank0() * expectation(bloch_state(p[0], p[1], p[2]), payoff);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    calls[c.name] = {{"formula", num(euro_call_price(spec, c.strike))},
                     {"sampled_min", num(lo)},
                     {"sampled_max", num(hi)}};
  }
  return {{"normal", {num(d.normal[0]), num(d.normal[1]), num(d.normal[2])}},
          {"offset", num(d.offset)},
          {"radius", num(d.radius)},
          {"center", {num(d.center()[0]), num(d.center()[1]), num(d.center()[2])}},
          {"open", d.open},
          {"max_plane_residual", num(worst)},
          {"columns", {"x", "y", "z"}},
          {"samples", samples},
          {"call_prices", calls}};
}

json crr(Context& ctx) {
  int n = 1;
  double s0 = 0.0, a = 0.0, b = 0.0, r = 0.0;
  if (ctx.scenario.kind == Scenario::MarketKind::kNPeriod) {
    const NPeriodSpec& spec = ctx.scenario.nperiod;
    n = spec.N, s0 = spec.S0, a = spec.a, b = spec.b, r = spec.r;
  } else if (ctx.scenario.kind == Scenario::MarketKind::kQubit) {
    const QubitMarketSpec& spec = ctx.scenario.qubit;
    n = 1, s0 = spec.S0, a = spec.a(), b = spec.b(), r = spec.r;
  } else {
    throw UsageError("crr needs a qubit or nperiod market");
  }
  json out = json::object();
  for (const ClaimSpec& c : ctx.scenario.claims) {
    if (c.function != "call") continue;
    const double formula = crr_price(n, s0, c.strike, r, a, b);
    const double oracle = binomial_tree_price(n, s0, c.strike, r, a, b);
    out[c.name] = {{"strike", num(c.strike)},
                   {"crr", num(formula)},
                   {"oracle", num(oracle)},
                   {"difference", num(formula - oracle)}};
  }
  if (out.empty()) throw UsageError("crr needs at least one call claim");
  return {{"N", n}, {"claims", out}};
}

json dispatch(Command cmd, Context& ctx) {
  switch (cmd) {
    case Command::kCheckArbitrage:
      return check_arbitrage(ctx);
    case Command::kPrice:
      require_claims(ctx.scenario, cmd);
      return price(ctx, true);
    case Command::kInterval:
      require_claims(ctx.scenario, cmd);
      return price(ctx, false);
    case Command::kReplicate:
      require_claims(ctx.scenario, cmd);
      return replicate_all(ctx);
    case Command::kDecompose:
      return decompose(ctx);
    case Command::kDisk:
      return disk(ctx);
    case Command::kCrr:
      return crr(ctx);
  }
  throw UsageError("unknown command");
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::kCheckArbitrage, Command::kPrice, Command::kInterval, Command::kReplicate,
                    Command::kDecompose, Command::kDisk, Command::kCrr}) {
    if (command_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string command_name(Command command) {
  switch (command) {
    case Command::kCheckArbitrage:
      return "check-arbitrage";
    case Command::kPrice:
      return "price";
    case Command::kInterval:
      return "interval";
    case Command::kReplicate:
      return "replicate";
    case Command::kDecompose:
      return "decompose";
    case Command::kDisk:
      return "disk";
    case Command::kCrr:
      return "crr";
  }
  return "unknown";
}

RunOutput run(Command command, const Scenario& scenario) {
  json report = {{"schema", kReportSchema},
                 {"version", QMARKET_VERSION},
                 {"command", command_name(command)},
                 {"market", scenario.market_kind()},
                 {"seed", scenario.solver.seed}};
  RunOutput out;
  json error = nullptr;
  json diagnostics = {{"max_iterations", scenario.solver.max_iterations},
                      {"gap_tolerance", num(scenario.solver.gap_tolerance)}};
  try {
    Context ctx(scenario);
    try {
      report["results"] = dispatch(command, ctx);
    } catch (...) {
      diagnostics["solver_iterations"] = ctx.iterations;
      throw;
    }
    diagnostics["solver_iterations"] = ctx.iterations;
    diagnostics["max_certified_gap"] = num(ctx.max_gap);
    if (!ctx.indeterminate.empty()) {
      out.exit_code = kExitIndeterminate;
      error = {{"type", "indeterminate"}, {"message", ctx.indeterminate}};
    }
  } catch (const ArbitrageError& e) {
    const bool undecided = e.certificate().status == FeasibilityStatus::kIndeterminate;
    out.exit_code = undecided ? kExitIndeterminate : kExitValidation;
    error = {{"type", "arbitrage"}, {"status", to_string(e.certificate().status)}, {"message", e.what()}};
  } catch (const SuperReplicationError& e) {
    out.exit_code = kExitValidation;
    error = {{"type", "super_replication"}, {"period", e.period()},
             {"best_lambda", num(e.best_lambda())}, {"message", e.what()}};
  } catch (const ValidationError& e) {
    out.exit_code = kExitValidation;
    error = {{"type", "validation"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    out.exit_code = kExitConsistency;
    error = {{"type", "internal"}, {"message", e.what()}};
  }
  report["diagnostics"] = diagnostics;
  if (!error.is_null()) {
    report["error"] = error;
    out.message = error["message"].get<std::string>();
    if (!report.contains("results")) report["results"] = nullptr;
  }
  out.report = report.dump(2) + "\n";
  return out;
}

}  // namespace qmarket::cli
