#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmarket/binomial_models.hpp"
#include "qmarket/cli.hpp"
#include "qmarket/error.hpp"

namespace py = pybind11;
using namespace qmarket;

namespace {

py::dict run_command(const std::string& command, const std::string& scenario_text,
                     std::optional<std::uint64_t> seed) {
  const auto cmd = cli::parse_command(command);
  if (!cmd) throw cli::UsageError("unknown command \"" + command + "\"");
  cli::Scenario scenario = cli::parse_scenario(scenario_text);
  if (seed) scenario.solver.seed = *seed;
  const cli::RunOutput out = cli::run(*cmd, scenario);
  py::dict d;
  d["report"] = out.report;
  d["exit_code"] = out.exit_code;
  d["message"] = out.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qmarket, m) {
  m.doc() = "Quantum binomial market pricing";

  static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<ConsistencyError> consistency_error(m, "ConsistencyError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      validation_error(e.what());
    } catch (const ConsistencyError& e) {
      consistency_error(e.what());
    }
  });

  m.attr("REPORT_SCHEMA") = cli::kReportSchema;
  m.attr("SCENARIO_SCHEMA") = cli::kScenarioSchema;

  py::class_<QubitMarketSpec>(m, "QubitMarketSpec")
      .def(py::init([](double x0, double x1, double x2, double x3, double r, double S0, double B0) {
             QubitMarketSpec s{x0, x1, x2, x3, r, S0, B0};
             s.validate();
             return s;
           }),
           py::arg("x0"), py::arg("x1"), py::arg("x2"), py::arg("x3"), py::arg("r"), py::arg("S0") = 100.0,
           py::arg("B0") = 1.0)
      .def_readonly("x0", &QubitMarketSpec::x0)
      .def_readonly("x1", &QubitMarketSpec::x1)
      .def_readonly("x2", &QubitMarketSpec::x2)
      .def_readonly("x3", &QubitMarketSpec::x3)
      .def_readonly("r", &QubitMarketSpec::r)
      .def_readonly("S0", &QubitMarketSpec::S0)
      .def_readonly("B0", &QubitMarketSpec::B0)
      .def_property_readonly("a", &QubitMarketSpec::a)
      .def_property_readonly("b", &QubitMarketSpec::b);

  py::class_<RiskNeutralDisk>(m, "RiskNeutralDisk")
      .def_readonly("normal", &RiskNeutralDisk::normal)
      .def_readonly("offset", &RiskNeutralDisk::offset)
      .def_readonly("radius", &RiskNeutralDisk::radius)
      .def_readonly("open", &RiskNeutralDisk::open)
      .def_property_readonly("center", &RiskNeutralDisk::center)
      .def("contains", &RiskNeutralDisk::contains, py::arg("v"), py::arg("tol") = 1e-10);

  m.def("risk_neutral_disk", &risk_neutral_disk, py::arg("spec"));
  m.def("sample_disk_points", &sample_disk_points, py::arg("disk"), py::arg("n"), py::arg("seed"));
  m.def(
      "euro_call_replication",
      [](const QubitMarketSpec& s, double k) {
        const CallReplication c = euro_call_replication(s, k);
        return py::make_tuple(c.beta, c.gamma);
      },
      py::arg("spec"), py::arg("strike"));
  m.def("euro_call_price", &euro_call_price, py::arg("spec"), py::arg("strike"));
  m.def("crr_price", &crr_price, py::arg("N"), py::arg("S0"), py::arg("K"), py::arg("r"), py::arg("a"), py::arg("b"));
  m.def("binomial_tree_price", &binomial_tree_price, py::arg("N"), py::arg("S0"), py::arg("K"), py::arg("r"),
        py::arg("a"), py::arg("b"));
  m.def("complementary_binomial", &complementary_binomial, py::arg("m"), py::arg("n"), py::arg("p"));

  m.def(
      "canonical_scenario", [](const std::string& text) { return cli::serialize_scenario(cli::parse_scenario(text)); },
      py::arg("text"));
  m.def("run_command", &run_command, py::arg("command"), py::arg("scenario"), py::arg("seed") = py::none(),
        "Runs a driver command on scenario JSON text; returns {report, exit_code, message}.");
}
