#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "qmarket/cli.hpp"

namespace qmarket::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

void require_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) fail(path + "." + item.key(), "unknown field");
  }
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

Complex as_entry(const json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
  fail(path, "matrix entry must be a number or an [re, im] pair");
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  if (n > kMaxDim) fail(path, "dimension exceeds " + std::to_string(kMaxDim));
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      fail(rp, "row must have " + std::to_string(n) + " entries");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = as_entry(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

HermitianOperator as_hermitian(const Matrix& m, const std::string& path) {
  try {
    return HermitianOperator(m);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 numbers");
  return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]"), as_number(j[2], path + "[2]")};
}

QubitMarketSpec parse_qubit(const json& j, const std::string& path) {
  require_keys(j, path, {"x", "r", "S0", "B0"});
  const json& x = member(j, "x", path);
  if (!x.is_array() || x.size() != 4) fail(path + ".x", "expected [x0, x1, x2, x3]");
  QubitMarketSpec s;
  s.x0 = as_number(x[0], path + ".x[0]");
  s.x1 = as_number(x[1], path + ".x[1]");
  s.x2 = as_number(x[2], path + ".x[2]");
  s.x3 = as_number(x[3], path + ".x[3]");
  s.r = as_number(member(j, "r", path), path + ".r");
  s.S0 = number_or(j, "S0", path, s.S0);
  s.B0 = number_or(j, "B0", path, s.B0);
  try {
    s.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return s;
}

NPeriodSpec parse_nperiod(const json& j, const std::string& path) {
  require_keys(j, path, {"N", "a", "b", "r", "S0", "B0", "pauli"});
  NPeriodSpec s;
  s.N = as_int(member(j, "N", path), path + ".N");
  s.a = as_number(member(j, "a", path), path + ".a");
  s.b = as_number(member(j, "b", path), path + ".b");
  s.r = as_number(member(j, "r", path), path + ".r");
  s.S0 = number_or(j, "S0", path, s.S0);
  s.B0 = number_or(j, "B0", path, s.B0);
  if (auto it = j.find("pauli"); it != j.end()) {
    if (!it->is_array()) fail(path + ".pauli", "expected an array of 3-vectors");
    for (std::size_t k = 0; k < it->size(); ++k) {
      s.pauli.push_back(as_vec3((*it)[k], path + ".pauli[" + std::to_string(k) + "]"));
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return s;
}

AlgebraSpec parse_algebra(const json& j, const std::string& path) {
  AlgebraSpec a;
  if (j.is_string()) {
    a.kind = j.get<std::string>();
  } else if (j.is_object() && j.contains("basis")) {
    require_keys(j, path, {"basis"});
    a.kind = "basis";
    const json& b = j["basis"];
    if (!b.is_array() || b.empty()) fail(path + ".basis", "expected a non-empty array of matrices");
    for (std::size_t k = 0; k < b.size(); ++k) {
      a.basis.push_back(as_matrix(b[k], path + ".basis[" + std::to_string(k) + "]"));
    }
    return a;
  } else if (j.is_object() && j.contains("blocks")) {
    require_keys(j, path, {"blocks", "full"});
    a.kind = "blocks";
    const json& b = j["blocks"];
    if (!b.is_array() || b.empty()) fail(path + ".blocks", "expected block sizes");
    for (std::size_t k = 0; k < b.size(); ++k) {
      a.blocks.push_back(as_int(b[k], path + ".blocks[" + std::to_string(k) + "]"));
    }
    if (auto it = j.find("full"); it != j.end()) {
      if (!it->is_boolean()) fail(path + ".full", "expected a boolean");
      a.full_blocks = it->get<bool>();
    }
    return a;
  } else {
    fail(path, "expected \"scalars\", \"full\", \"diagonal\", {\"blocks\": ...} or {\"basis\": ...}");
  }
  if (a.kind != "scalars" && a.kind != "full" && a.kind != "diagonal") {
    fail(path, "unknown algebra \"" + a.kind + "\"");
  }
  return a;
}

OperatorAlgebra build_algebra(const AlgebraSpec& a, int dim) {
  if (a.kind == "scalars") return OperatorAlgebra::scalars(dim);
  if (a.kind == "full") return OperatorAlgebra::full(dim);
  if (a.kind == "diagonal") return OperatorAlgebra::diagonal(dim);
  if (a.kind == "blocks") return OperatorAlgebra::block_diagonal(a.blocks, a.full_blocks);
  std::vector<ComplexMatrix> basis;
  for (const Matrix& m : a.basis) basis.emplace_back(m);
  return OperatorAlgebra::from_basis(std::move(basis));
}

ExplicitMarketSpec parse_explicit(const json& j, const std::string& path) {
  require_keys(j, path, {"dim", "bank", "filtration", "assets"});
  ExplicitMarketSpec s;
  s.dim = as_int(member(j, "dim", path), path + ".dim");
  if (s.dim < 1 || s.dim > kMaxDim) fail(path + ".dim", "must lie in 1.." + std::to_string(kMaxDim));
  const json& bank = member(j, "bank", path);
  if (!bank.is_array() || bank.size() < 2) fail(path + ".bank", "expected B_0 .. B_T with T >= 1");
  for (std::size_t t = 0; t < bank.size(); ++t) {
    s.bank.push_back(as_number(bank[t], path + ".bank[" + std::to_string(t) + "]"));
  }
  const json& filt = member(j, "filtration", path);
  if (!filt.is_array() || filt.size() != bank.size()) {
    fail(path + ".filtration", "expected one algebra per date (" + std::to_string(bank.size()) + ")");
  }
  for (std::size_t t = 0; t < filt.size(); ++t) {
    s.filtration.push_back(parse_algebra(filt[t], path + ".filtration[" + std::to_string(t) + "]"));
  }
  const json& assets = member(j, "assets", path);
  if (!assets.is_array() || assets.empty()) fail(path + ".assets", "expected at least one asset path");
  for (std::size_t k = 0; k < assets.size(); ++k) {
    const std::string ap = path + ".assets[" + std::to_string(k) + "]";
    if (!assets[k].is_array() || assets[k].size() != bank.size()) {
      fail(ap, "expected one operator per date (" + std::to_string(bank.size()) + ")");
    }
    std::vector<Matrix> series;
    for (std::size_t t = 0; t < assets[k].size(); ++t) {
      const std::string mp = ap + "[" + std::to_string(t) + "]";
      Matrix m = as_matrix(assets[k][t], mp);
      if (m.rows() != s.dim) fail(mp, "expected a " + std::to_string(s.dim) + "x" + std::to_string(s.dim) + " matrix");
      as_hermitian(m, mp);
      series.push_back(std::move(m));
    }
    s.assets.push_back(std::move(series));
  }
  return s;
}

ClaimSpec parse_claim(const json& j, const std::string& path) {
  ClaimSpec c;
  if (!j.is_object()) fail(path, "expected an object");
  c.name = as_string(member(j, "name", path), path + ".name");
  if (c.name.empty()) fail(path + ".name", "must not be empty");
  const int kinds = static_cast<int>(j.contains("call")) + static_cast<int>(j.contains("spectral")) +
                    static_cast<int>(j.contains("matrix"));
  if (kinds != 1) fail(path, "exactly one of \"call\", \"spectral\", \"matrix\" is required");
  if (j.contains("call")) {
    require_keys(j, path, {"name", "call"});
    const std::string cp = path + ".call";
    const json& call = j["call"];
    require_keys(call, cp, {"strike", "asset"});
    c.kind = ClaimSpec::Kind::kCall;
    c.function = "call";
    c.strike = as_number(member(call, "strike", cp), cp + ".strike");
    if (auto it = call.find("asset"); it != call.end()) c.asset = as_int(*it, cp + ".asset");
  } else if (j.contains("spectral")) {
    require_keys(j, path, {"name", "spectral"});
    const std::string sp = path + ".spectral";
    const json& spec = j["spectral"];
    require_keys(spec, sp, {"function", "strike", "asset"});
    c.kind = ClaimSpec::Kind::kSpectral;
    c.function = as_string(member(spec, "function", sp), sp + ".function");
    if (c.function != "call" && c.function != "put" && c.function != "digital" && c.function != "asset") {
      fail(sp + ".function", "expected call, put, digital or asset");
    }
    c.strike = number_or(spec, "strike", sp, 0.0);
    if (auto it = spec.find("asset"); it != spec.end()) c.asset = as_int(*it, sp + ".asset");
  } else {
    require_keys(j, path, {"name", "matrix"});
    c.kind = ClaimSpec::Kind::kMatrix;
    c.matrix = as_matrix(j["matrix"], path + ".matrix");
    as_hermitian(c.matrix, path + ".matrix");
  }
  if (c.kind != ClaimSpec::Kind::kMatrix && c.strike < 0.0) fail(path, "strike must be non-negative");
  return c;
}

SolverSettings parse_solver(const json& j, const std::string& path) {
  require_keys(j, path, {"max_iterations", "gap_tolerance", "seed", "samples"});
  SolverSettings s;
  if (auto it = j.find("max_iterations"); it != j.end()) {
    s.max_iterations = as_int(*it, path + ".max_iterations");
    if (s.max_iterations < 1) fail(path + ".max_iterations", "must be positive");
  }
  s.gap_tolerance = number_or(j, "gap_tolerance", path, s.gap_tolerance);
  if (!(s.gap_tolerance > 0.0)) fail(path + ".gap_tolerance", "must be positive");
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      fail(path + ".seed", "expected a non-negative integer");
    }
    s.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("samples"); it != j.end()) {
    s.samples = as_int(*it, path + ".samples");
    if (s.samples < 1 || s.samples > 100000) fail(path + ".samples", "must lie in 1..100000");
  }
  return s;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json algebra_json(const AlgebraSpec& a) {
  if (a.kind == "blocks") return {{"blocks", a.blocks}, {"full", a.full_blocks}};
  if (a.kind == "basis") {
    json b = json::array();
    for (const Matrix& m : a.basis) b.push_back(matrix_json(m));
    return {{"basis", b}};
  }
  return a.kind;
}

}  // namespace

std::string Scenario::market_kind() const {
  switch (kind) {
    case MarketKind::kQubit:
      return "qubit";
    case MarketKind::kNPeriod:
      return "nperiod";
    case MarketKind::kExplicit:
      return "explicit";
  }
  return "unknown";
}

MarketModel Scenario::market() const {
  switch (kind) {
    case MarketKind::kQubit:
      return build_single_period(qubit);
    case MarketKind::kNPeriod:
      return build_n_period(nperiod);
    case MarketKind::kExplicit:
      break;
  }
  const ExplicitMarketSpec& e = explicit_market;
  std::vector<OperatorAlgebra> algebras;
  for (const AlgebraSpec& a : e.filtration) algebras.push_back(build_algebra(a, e.dim));
  std::vector<std::vector<HermitianOperator>> assets;
  for (const auto& series : e.assets) {
    std::vector<HermitianOperator> path;
    for (const Matrix& m : series) path.emplace_back(m);
    assets.push_back(std::move(path));
  }
  return MarketModel(Filtration(std::move(algebras)), e.bank, std::move(assets));
}

HermitianOperator Scenario::payoff(const ClaimSpec& claim, const MarketModel& market) const {
  if (claim.kind == ClaimSpec::Kind::kMatrix) {
    require_same_dim(static_cast<int>(claim.matrix.rows()), market.dim(), "claim matrix");
    return HermitianOperator(claim.matrix);
  }
  if (claim.asset < 0 || claim.asset >= market.num_assets()) {
    throw ValidationError("claim " + claim.name + ": asset index out of range");
  }
  const HermitianOperator& s = market.asset(claim.asset, market.periods());
  const double k = claim.strike;
  const double edge = k + 1e-12 * std::max(1.0, k);
  if (claim.function == "call") return call_payoff(s, k);
  if (claim.function == "put") return apply_function(s, [k](double x) { return std::max(k - x, 0.0); });
  if (claim.function == "digital") return apply_function(s, [edge](double x) { return x > edge ? 1.0 : 0.0; });
  return s;
}

SolverOptions Scenario::solver_options() const {
  SolverOptions o;
  o.max_iterations = solver.max_iterations;
  o.gap_tolerance = solver.gap_tolerance;
  return o;
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("syntax error: ") + e.what());
  }
  const std::string top = "scenario";
  require_keys(root, top, {"schema", "market", "claims", "solver", "value_process"});
  if (auto it = root.find("schema"); it != root.end()) {
    if (as_string(*it, top + ".schema") != kScenarioSchema) {
      fail(top + ".schema", std::string("expected \"") + kScenarioSchema + "\"");
    }
  }

  Scenario s;
  const std::string mp = top + ".market";
  const json& market = member(root, "market", top);
  require_keys(market, mp, {"qubit", "nperiod", "explicit"});
  if (market.size() != 1) fail(mp, "exactly one of \"qubit\", \"nperiod\", \"explicit\" is required");
  if (market.contains("qubit")) {
    s.kind = Scenario::MarketKind::kQubit;
    s.qubit = parse_qubit(market["qubit"], mp + ".qubit");
  } else if (market.contains("nperiod")) {
    s.kind = Scenario::MarketKind::kNPeriod;
    s.nperiod = parse_nperiod(market["nperiod"], mp + ".nperiod");
  } else {
    s.kind = Scenario::MarketKind::kExplicit;
    s.explicit_market = parse_explicit(market["explicit"], mp + ".explicit");
  }

  std::optional<MarketModel> model;
  try {
    model.emplace(s.market());
  } catch (const Error& e) {
    fail(mp, e.what());
  }

  if (auto it = root.find("claims"); it != root.end()) {
    if (!it->is_array()) fail(top + ".claims", "expected an array");
    std::set<std::string> names;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string cp = top + ".claims[" + std::to_string(k) + "]";
      ClaimSpec c = parse_claim((*it)[k], cp);
      if (!names.insert(c.name).second) fail(cp + ".name", "duplicate claim name \"" + c.name + "\"");
      try {
        const HermitianOperator h = s.payoff(c, *model);
        if (!model->filtration().at(model->periods()).contains(h.matrix())) {
          throw ValidationError("payoff is not adapted to A_T");
        }
      } catch (const Error& e) {
        fail(cp, e.what());
      }
      s.claims.push_back(std::move(c));
    }
    std::sort(s.claims.begin(), s.claims.end(),
              [](const ClaimSpec& x, const ClaimSpec& y) { return x.name < y.name; });
  }

  if (auto it = root.find("solver"); it != root.end()) s.solver = parse_solver(*it, top + ".solver");

  if (auto it = root.find("value_process"); it != root.end()) {
    const std::string vp = top + ".value_process";
    if (!it->is_array() || static_cast<int>(it->size()) != model->periods() + 1) {
      fail(vp, "expected one operator per date (" + std::to_string(model->periods() + 1) + ")");
    }
    for (std::size_t t = 0; t < it->size(); ++t) {
      const std::string p = vp + "[" + std::to_string(t) + "]";
      Matrix m = as_matrix((*it)[t], p);
      if (m.rows() != model->dim()) fail(p, "dimension does not match the market");
      const HermitianOperator h = as_hermitian(m, p);
      if (!model->filtration().at(static_cast<int>(t)).contains(h.matrix())) {
        fail(p, "V_" + std::to_string(t) + " is not adapted to A_" + std::to_string(t));
      }
      s.value_process.push_back(std::move(m));
    }
  }
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  root["schema"] = kScenarioSchema;
  json market;
  switch (s.kind) {
    case Scenario::MarketKind::kQubit: {
      const QubitMarketSpec& q = s.qubit;
      market["qubit"] = {{"x", {q.x0, q.x1, q.x2, q.x3}}, {"r", q.r}, {"S0", q.S0}, {"B0", q.B0}};
      break;
    }
    case Scenario::MarketKind::kNPeriod: {
      const NPeriodSpec& n = s.nperiod;
      json spec = {{"N", n.N}, {"a", n.a}, {"b", n.b}, {"r", n.r}, {"S0", n.S0}, {"B0", n.B0}};
      if (!n.pauli.empty()) spec["pauli"] = n.pauli;
      market["nperiod"] = spec;
      break;
    }
    case Scenario::MarketKind::kExplicit: {
      const ExplicitMarketSpec& e = s.explicit_market;
      json filt = json::array();
      for (const AlgebraSpec& a : e.filtration) filt.push_back(algebra_json(a));
      json assets = json::array();
      for (const auto& series : e.assets) {
        json path = json::array();
        for (const Matrix& m : series) path.push_back(matrix_json(m));
        assets.push_back(std::move(path));
      }
      market["explicit"] = {{"dim", e.dim}, {"bank", e.bank}, {"filtration", filt}, {"assets", assets}};
      break;
    }
  }
  root["market"] = market;

  json claims = json::array();
  for (const ClaimSpec& c : s.claims) {
    switch (c.kind) {
      case ClaimSpec::Kind::kCall:
        claims.push_back({{"name", c.name}, {"call", {{"strike", c.strike}, {"asset", c.asset}}}});
        break;
      case ClaimSpec::Kind::kSpectral:
        claims.push_back({{"name", c.name},
                          {"spectral", {{"function", c.function}, {"strike", c.strike}, {"asset", c.asset}}}});
        break;
      case ClaimSpec::Kind::kMatrix:
        claims.push_back({{"name", c.name}, {"matrix", matrix_json(c.matrix)}});
        break;
    }
  }
  root["claims"] = claims;
  root["solver"] = {{"max_iterations", s.solver.max_iterations},
                    {"gap_tolerance", s.solver.gap_tolerance},
                    {"seed", s.solver.seed},
                    {"samples", s.solver.samples}};
  if (!s.value_process.empty()) {
    json vp = json::array();
    for (const Matrix& m : s.value_process) vp.push_back(matrix_json(m));
    root["value_process"] = vp;
  }
  return root.dump(2) + "\n";
}

std::optional<int> max_iterations_from_env() {
  const char* raw = std::getenv("QMARKET_MAX_ITERS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1 || v > 100000000) {
    throw UsageError(std::string("QMARKET_MAX_ITERS must be a positive integer, got \"") + raw + "\"");
  }
  return static_cast<int>(v);
}

}  // namespace qmarket::cli
