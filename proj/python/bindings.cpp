#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>

#include "globalsdp/cli.hpp"
#include "globalsdp/error.hpp"
#include "globalsdp/oracle.hpp"
#include "globalsdp/problems.hpp"
#include "globalsdp/report.hpp"
#include "globalsdp/solver.hpp"

namespace py = pybind11;
using namespace globalsdp;

namespace {

SymMat from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> dense;
  for (const auto& r : rows) {
    if (r.size() != n) throw UsageError("matrix must be square");
    dense.insert(dense.end(), r.begin(), r.end());
  }
  return SymMat::from_dense_lower(n, dense);
}

ProblemInstance load(const std::string& problem, const std::string& text) {
  if (problem.empty() == text.empty()) throw UsageError("give exactly one of problem or text");
  return problem.empty() ? parse_problem_file(text) : catalog_problem(problem);
}

}  // namespace

PYBIND11_MODULE(_globalsdp, m) {
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", PyExc_RuntimeError);

  m.def("catalog_ids", [] { return catalog_ids(); });

  m.def(
      "solve",
      [](const std::string& problem, const std::string& text, double tol, bool override_assumptions, bool trace) {
        const ProblemInstance p = load(problem, text);
        SolveOptions o;
        o.tol_y = tol;
        o.override_assumptions = override_assumptions;
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = bisection_solve(p, o);
        }
        return to_json(r, ReportFlags{trace, false}).dump();
      },
      py::arg("problem") = "", py::arg("text") = "", py::arg("tol") = 1e-8,
      py::arg("override_assumptions") = false, py::arg("trace") = false);

  m.def(
      "multistart",
      [](const std::string& problem, std::size_t starts, std::uint64_t seed, bool override_assumptions,
         unsigned threads) {
        const ProblemInstance p = catalog_problem(problem);
        MultistartOptions o;
        o.starts = starts;
        o.seed = seed;
        o.threads = threads;
        o.solve.override_assumptions = override_assumptions;
        MultistartReport r;
        {
          py::gil_scoped_release release;
          r = multistart(p, o);
        }
        return to_json(r, ReportFlags{}).dump();
      },
      py::arg("problem"), py::arg("starts") = 16, py::arg("seed") = 42, py::arg("override_assumptions") = false,
      py::arg("threads") = 0);

  m.def(
      "check_assumptions",
      [](const std::string& problem, std::size_t samples, std::uint64_t seed) {
        AssumptionOptions o;
        o.sample_count = samples;
        o.seed = seed;
        return to_json(check_assumptions(catalog_problem(problem), o)).dump();
      },
      py::arg("problem"), py::arg("samples") = 200, py::arg("seed") = AssumptionOptions{}.seed);

  m.def(
      "verify_kkt",
      [](const std::string& problem, const std::vector<double>& x, double y, double tol) {
        return to_json(verify_kkt(catalog_problem(problem), x, y, tol)).dump();
      },
      py::arg("problem"), py::arg("x"), py::arg("y"), py::arg("tol") = kCertTol);

  m.def(
      "oracle",
      [](const std::string& problem, double step) {
        const ProblemInstance p = catalog_problem(problem);
        const GridSpec g = step > 0.0 ? GridSpec::uniform(*p.x_box, step) : fixture_grid(problem).value();
        GridResult r;
        {
          py::gil_scoped_release release;
          r = grid_search(p, g, resolve_thread_count(0));
        }
        return to_json(r).dump();
      },
      py::arg("problem"), py::arg("step") = 0.0);

  m.def(
      "gen_eig_min",
      [](const std::vector<std::vector<double>>& k, const std::vector<std::vector<double>>& mm) {
        return gen_eig_min(from_rows(k), from_rows(mm));
      },
      py::arg("K"), py::arg("M"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
