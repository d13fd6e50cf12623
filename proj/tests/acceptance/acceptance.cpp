// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance <fixtures.json>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "globalsdp/error.hpp"
#include "globalsdp/kkt.hpp"
#include "globalsdp/oracle.hpp"
#include "globalsdp/problems.hpp"
#include "globalsdp/solver.hpp"

using namespace globalsdp;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SymMat scalar(double v) {
  SymMat a(1);
  a.set(0, 0, v);
  return a;
}

SymMat random_sym(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SymMat a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, nd(rng));
  return a;
}

SymMat random_spd(std::size_t n, std::mt19937_64& rng) {
  const SymMat g = random_sym(n, rng);
  SymMat a = SymMat::identity(n);
  a *= 0.5;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g(i, k) * g(j, k);
      a.add(i, j, s);
    }
  return a;
}

Outcome c1() {
  Outcome o;
  const auto started = std::chrono::steady_clock::now();
  for (const char* id : {"fractional", "sqrt", "norm-quadratic", "minimax", "truss-2bar", "truss-10bar"}) {
    MultistartOptions opts;
    opts.starts = 16;
    opts.solve.cert_tol = 1e-6;
    const MultistartReport r = multistart(catalog_problem(id), opts);
    o.require(r.accepted == 16 && r.y_spread <= 1e-5,
              std::string(id) + ": " + std::to_string(r.accepted) + "/16 accepted, y_spread " +
                  fmt("%.2e", r.y_spread));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  o.require(secs <= 120.0, "runtime " + fmt("%.1f s", secs) + " (budget 120 s)");
  return o;
}

Outcome c2() {
  Outcome o;
  MultistartOptions opts;
  opts.starts = 16;
  const MultistartReport r = multistart(make_strictly_concave_variant(), opts);
  o.require(r.accepted == 16 && r.x_spread <= 1e-4,
            "strict-concave: " + std::to_string(r.accepted) + "/16 accepted, x_spread " + fmt("%.2e", r.x_spread));
  return o;
}

double solve_y(const ProblemInstance& p, bool override_flag = false) {
  SolveOptions s;
  s.override_assumptions = override_flag;
  const SolveReport r = bisection_solve(p, s);
  return r.status == SolveStatus::optimal ? r.y_star : std::nan("");
}

Outcome c3() {
  Outcome o;
  const double f = solve_y(make_fractional());
  o.require(std::abs(f) <= 1e-6, "fractional y* = " + fmt("%.10g", f));
  const double s = solve_y(make_sqrt_scalar());
  o.require(std::abs(s - 1.0) <= 1e-6, "sqrt y* = " + fmt("%.10g", s));
  const double n = solve_y(catalog_problem("norm-quadratic"));
  o.require(std::abs(n - 2.0) <= 1e-5, "norm-quadratic y* = " + fmt("%.10g", n));
  return o;
}

Outcome c4(const std::map<std::string, Fixture>& fixtures) {
  Outcome o;
  const auto it = fixtures.find("truss-2bar");
  if (it == fixtures.end()) {
    o.require(false, "fixtures file has no truss-2bar entry");
  } else {
    const double ref = it->second.oracle_y;
    const double y = solve_y(catalog_problem("truss-2bar"));
    const double rel = std::abs(y - ref) / std::max(1e-12, std::abs(ref));
    o.require(rel <= 1e-3, "truss-2bar y* = " + fmt("%.10g", y) + " vs grid " + fmt("%.10g", ref) +
                               " (step " + fmt("%g", it->second.grid.step[0]) + "), rel " + fmt("%.2e", rel));
  }
  const double g = solve_y(catalog_problem("grasp-2finger"), true);
  const double ref = grasp_analytic_two_finger(1.0, 10.0);
  o.require(std::abs(g - ref) <= 1e-4, "grasp-2finger y* = " + fmt("%.10g", g) + " vs statics " + fmt("%g", ref));
  return o;
}

Outcome c5() {
  Outcome o;
  std::mt19937_64 rng(5150);
  double worst_sup = 0.0, worst_ray = 0.0;
  auto one = [&](const SymMat& k, const SymMat& m, std::uint64_t seed) {
    const double v = gen_eig_min(k, m);
    worst_sup = std::max(worst_sup, std::abs(v - gen_eig_sup_bisection(k, m)));
    worst_ray = std::max(worst_ray, v - rayleigh_sample_min(k, m, 2000, seed));
  };
  for (int i = 0; i < 20; ++i) one(random_sym(5, rng), random_spd(5, rng), 100 + i);

  const TrussModel t = truss_10bar_model();
  const ProblemInstance p = make_truss_problem(t);
  const TrussMatrices tm = assemble_truss_matrices(t);
  int designs = 0;
  while (designs < 20) {
    Vec x(p.m());
    for (double& v : x) v = std::uniform_real_distribution<double>(t.x_min, 0.6)(rng);
    if (min_eig_psd(checked_B(p.fn, x)).lambda_min < 0.0) continue;
    one(tm.stiffness(x), tm.mass(x), 200 + designs);
    ++designs;
  }
  o.require(worst_sup <= 1e-8, "max |gen_eig_min - sup-bisection| = " + fmt("%.2e", worst_sup));
  o.require(worst_ray <= 1e-8, "max (gen_eig_min - min Rayleigh sample) = " + fmt("%.2e", worst_ray));
  return o;
}

Outcome c6() {
  Outcome o;
  const ProblemInstance p = make_fractional();
  const KktResiduals r = kkt_residuals(p, Vec{0.0}, 0.0, scalar(1.0), scalar(1.0));
  o.require(r.max() <= 1e-12, "analytic certificate max residual " + fmt("%.2e", r.max()));
  const KktResiduals z = kkt_residuals(p, Vec{0.0}, 0.0, scalar(0.0), scalar(0.0));
  o.require(z.stat_y == 1.0, "zero multipliers stat_y = " + fmt("%.17g", z.stat_y));
  const KktCertificate c = verify_kkt(p, Vec{1.0}, 0.9);
  o.require(!c.accepted && c.reason == "empty active set", "interior point (1, 0.9): " + c.reason);
  return o;
}

Outcome c7() {
  Outcome o;
  for (const std::string& id : catalog_ids()) {
    const ProblemInstance p = catalog_problem(id);
    std::mt19937_64 rng(7000);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      Vec x(p.m());
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = std::uniform_real_distribution<double>(p.x_box->lower[j], p.x_box->upper[j])(rng);
      const double y = std::uniform_real_distribution<double>(p.y_hint->lo, std::min(p.y_hint->hi, 5.0))(rng);
      worst = std::max(worst, check_derivatives(p, x, y).worst());
    }
    o.require(worst <= 1e-4, id + ": worst relative error " + fmt("%.2e", worst));
  }
  return o;
}

Outcome c8() {
  Outcome o;
  AssumptionOptions opts;
  for (const char* id : {"fractional", "sqrt", "truss-2bar"}) {
    const AssumptionReport r = check_assumptions(catalog_problem(id), opts);
    o.require(r.all_pass(), std::string(id) + ": a=" + to_string(r.a) + " b=" + to_string(r.b) +
                                " c=" + to_string(r.c));
  }
  const AssumptionReport g = check_assumptions(catalog_problem("grasp-2finger"), opts);
  o.require(g.b == Verdict::fail,
            std::string("grasp-2finger (b) = ") + to_string(g.b) + ", min eig dA/dy " + fmt("%.3g", g.min_dA_dy_eig) +
                ". The catalog entry uses the symmetric cone block, whose dA/dy is positive definite and "
                "whose optimum 0.05 is the statics value required above; the literal block flags (b) "
                "but its optimum is 0.0025");
  const AssumptionReport lit = check_assumptions(catalog_problem("grasp-2finger-literal"), opts);
  o.notes.push_back(std::string("info grasp-2finger-literal (b) = ") + to_string(lit.b));
  const AssumptionReport s = check_assumptions(make_sqrt_scalar(SqrtVariant::relaxed), opts);
  o.require(s.b == Verdict::fail, std::string("sqrt with x >= 0: (b) = ") + to_string(s.b));
  return o;
}

Outcome c9() {
  Outcome o;
  const ScalarFn frac{[](ConstVec x) { return x[0] / (x[0] + 1.0); },
                      [](ConstVec x) { return Vec{1.0 / ((x[0] + 1.0) * (x[0] + 1.0))}; }};
  const PseudoconvexReport a = pseudoconvex_check(frac, Box{{0.0}, {10.0}}, 1000, 9);
  o.require(a.violations == 0, "x/(x+1): " + std::to_string(a.violations) + " violations in " +
                                   std::to_string(a.pairs) + " pairs");
  const ScalarFn cap{[](ConstVec x) { return -x[0] * x[0]; }, [](ConstVec x) { return Vec{-2.0 * x[0]}; }};
  const PseudoconvexReport b = pseudoconvex_check(cap, Box{{-1.0}, {1.0}}, 1000, 9);
  o.require(b.violations > 0, "-x^2: " + std::to_string(b.violations) + " violations");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <fixtures.json>\n";
    return 2;
  }
  std::map<std::string, Fixture> fixtures;
  try {
    std::ifstream f(argv[1]);
    if (!f) throw UsageError(std::string("cannot read ") + argv[1]);
    std::stringstream ss;
    ss << f.rdbuf();
    fixtures = fixtures_from_json(ss.str());
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 multistart agreement on six instances", c1},
      {"C2 unique optimizer of the strictly concave variant", c2},
      {"C3 analytic optima", c3},
      {"C4 oracle agreement (truss grid, grasp statics)", [&] { return c4(fixtures); }},
      {"C5 generalized eigenvalue characterizations", c5},
      {"C6 KKT residual fidelity", c6},
      {"C7 derivative fidelity", c7},
      {"C8 assumption checker verdicts", c8},
      {"C9 pseudoconvexity sampling", c9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << "\n";
    for (const std::string& n : o.notes) std::cout << "         " << n << "\n";
    std::cout.flush();
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
