#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "globalsdp/error.hpp"
#include "globalsdp/oracle.hpp"
#include "globalsdp/problems.hpp"
#include "globalsdp/report.hpp"
#include "globalsdp/solver.hpp"

using namespace globalsdp;
using doctest::Approx;

namespace {

SymMat scalar(double v) {
  SymMat a(1);
  a.set(0, 0, v);
  return a;
}

BilinearAffineForm scalar_form(double a0, double a1, double c0, double b0, double b1) {
  BilinearAffineForm f;
  f.A0 = scalar(a0);
  f.Aj = {scalar(a1)};
  f.C0 = scalar(c0);
  f.Cj = {scalar(0.0)};
  f.B0 = scalar(b0);
  f.Bj = {scalar(b1)};
  return f;
}

void check_trace_consistent(const SolveReport& r, double tol) {
  for (const TraceEntry& e : r.trace) {
    if (e.feasible) CHECK(e.y >= r.y_star - tol);
    if (!e.feasible) CHECK(e.y <= r.y_star + tol);
  }
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("feasibility_margin on the fractional program") {
    const ProblemInstance p = make_fractional();
    const Vec x0{5.0};
    const InnerResult half = feasibility_margin(p, 0.5, x0);
    // max over x of min(0.5 - 0.5 x, x) is attained at x = 1/3.
    double grid_best = -1e300;
    for (int k = 0; k <= 10000; ++k) {
      const double x = 1e-3 * k;
      grid_best = std::max(grid_best, std::min(0.5 - 0.5 * x, x));
    }
    CHECK(half.t >= grid_best - 1e-9);
    CHECK(half.t <= grid_best + 1e-3);
    CHECK(half.t == Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(half.x[0] == Approx(1.0 / 3.0).epsilon(1e-5));
    CHECK(half.sandwich_violations == 0);
    CHECK(half.t_upper >= half.t);

    const InnerResult one = feasibility_margin(p, 1.0, x0);
    CHECK(one.t == Approx(1.0).epsilon(1e-8));
    CHECK(one.sandwich_violations == 0);

    const InnerResult neg = feasibility_margin(p, -0.1, x0);
    CHECK(neg.t < 0.0);
    CHECK_FALSE(neg.feasible(1e-8));
    CHECK(neg.sandwich_violations == 0);
  }

  TEST_CASE("analytic optima") {
    const SolveReport f = bisection_solve(make_fractional());
    CHECK(f.status == SolveStatus::optimal);
    CHECK(std::abs(f.y_star) <= 1e-6);
    CHECK(std::abs(f.x_star[0]) <= 1e-4);
    check_trace_consistent(f, 1e-7);

    const SolveReport s = bisection_solve(make_sqrt_scalar());
    CHECK(s.status == SolveStatus::optimal);
    CHECK(s.y_star == Approx(1.0).epsilon(1e-6));
    CHECK(s.x_star[0] == Approx(1.0).epsilon(1e-5));
    check_trace_consistent(s, 1e-7);
  }

  TEST_CASE("two-bar truss matches the grid oracle") {
    const ProblemInstance p = catalog_problem("truss-2bar");
    const SolveReport r = bisection_solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    const GridResult g = grid_search(p, GridSpec::uniform(*p.x_box, 1e-2));
    REQUIRE(g.feasible);
    CHECK(r.y_star <= g.best_y + 1e-8);
    CHECK(r.y_star >= g.best_y - 1e-2);
    CHECK(r.y_star == Approx(-(std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-6));
  }

  TEST_CASE("optimal means a feasible point with an accepted certificate") {
    for (const char* id : {"fractional", "sqrt", "norm-quadratic", "truss-2bar", "grasp-2finger"}) {
      CAPTURE(id);
      const ProblemInstance p = catalog_problem(id);
      const SolveReport r = bisection_solve(p);
      REQUIRE(r.status == SolveStatus::optimal);
      REQUIRE(r.certificate);
      CHECK(r.certificate->accepted);
      CHECK(eval_constraints(p, r.x_star, r.y_star, 1e-6).feasible);
      check_trace_consistent(r, 1e-7);
    }
  }

  TEST_CASE("multistart agreement") {
    MultistartOptions o;
    o.starts = 4;
    const MultistartReport f = multistart(make_fractional(), o);
    CHECK(f.accepted == 4);
    CHECK(f.y_spread <= 1e-6);
    CHECK(f.uncertified_runs.empty());

    const MultistartReport t = multistart(catalog_problem("truss-2bar"), o);
    CHECK(t.accepted == 4);
    CHECK(t.y_spread <= 1e-6);

    const MultistartReport sc = multistart(make_strictly_concave_variant(), o);
    CHECK(sc.accepted == 4);
    CHECK(sc.x_spread <= 1e-4);
  }

  TEST_CASE("multistart output does not depend on the thread count") {
    MultistartOptions o;
    o.starts = 6;
    o.threads = 1;
    const std::string one = to_json(multistart(make_fractional(), o), {}).dump();
    o.threads = 4;
    const std::string four = to_json(multistart(make_fractional(), o), {}).dump();
    CHECK(one == four);
  }

  TEST_CASE("assumption refusal and override") {
    const ProblemInstance p = make_sqrt_scalar(SqrtVariant::relaxed);
    CHECK_THROWS_AS(bisection_solve(p), AssumptionViolation);
    SolveOptions o;
    o.override_assumptions = true;
    const SolveReport r = bisection_solve(p, o);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.warnings.back().find("(b)") != std::string::npos);
    CHECK(std::abs(r.y_star) <= 1e-6);
  }

  TEST_CASE("infeasible and unbounded instances") {
    SolveOptions o;
    o.check_assumptions = false;
    o.max_expansions = 6;

    // B(x) = -1 everywhere.
    const BilinearAffineForm bad_b = scalar_form(0.0, -1.0, 1.0, -1.0, 0.0);
    const ProblemInstance inf =
        ProblemInstance::make(bad_b.to_fn_pair(), Box{{0.0}, {1.0}}, YBracket{-1.0, 1.0}, "infeasible");
    const SolveReport ri = bisection_solve(inf, o);
    CHECK(ri.status == SolveStatus::infeasible);
    CHECK_FALSE(ri.certificate);

    // A = [1e-3 y - 1e6] stays infeasible throughout the expansion cap.
    const BilinearAffineForm far = scalar_form(-1e6, 0.0, 1e-3, 1.0, 0.0);
    const ProblemInstance fp =
        ProblemInstance::make(far.to_fn_pair(), Box{{0.0}, {1.0}}, YBracket{-1.0, 1.0}, "far");
    CHECK(bisection_solve(fp, o).status == SolveStatus::bracket_failure);

    // A = [y + x] with x unbounded: every y is feasible.
    const BilinearAffineForm open = scalar_form(0.0, 1.0, 1.0, 1.0, 0.0);
    const ProblemInstance up = ProblemInstance::make(open.to_fn_pair(), std::nullopt, std::nullopt, "open");
    o.max_expansions = 3;
    const SolveReport ru = bisection_solve(up, o);
    CHECK(ru.status == SolveStatus::bracket_failure);
    CHECK(ru.message == "objective appears unbounded below");
  }

  TEST_CASE("bad options") {
    const ProblemInstance p = make_fractional();
    SolveOptions o;
    o.tol_y = 0.0;
    CHECK_THROWS_AS(bisection_solve(p, o), UsageError);
    o = {};
    o.x0 = Vec{1.0, 2.0};
    CHECK_THROWS_AS(bisection_solve(p, o), UsageError);
    InnerOpts in;
    in.mu_factor = 1.0;
    CHECK_THROWS_AS(feasibility_margin(p, 0.0, Vec{1.0}, in), UsageError);
    MultistartOptions m;
    m.starts = 1;
    CHECK_THROWS_AS(multistart(p, m), UsageError);
    CHECK(resolve_thread_count(3) == 3);
  }
}
