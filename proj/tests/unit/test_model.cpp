#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "globalsdp/error.hpp"
#include "globalsdp/model.hpp"
#include "globalsdp/problems.hpp"
#include "helpers.hpp"

using namespace globalsdp;
using doctest::Approx;

namespace {

Vec sample_box(const Box& b, std::mt19937_64& rng) {
  Vec x(b.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = std::uniform_real_distribution<double>(b.lower[j], b.upper[j])(rng);
  return x;
}

BilinearAffineForm small_bilinear() {
  std::mt19937_64 rng(21);
  BilinearAffineForm f;
  f.A0 = testutil::random_sym(3, rng);
  f.C0 = testutil::random_spd(3, rng);
  f.Aj = {testutil::random_sym(3, rng), testutil::random_sym(3, rng)};
  f.Cj = {testutil::random_sym(3, rng), testutil::random_sym(3, rng)};
  f.B0 = SymMat::identity(2);
  f.Bj = {testutil::random_sym(2, rng), testutil::random_sym(2, rng)};
  return f;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("eval_constraints on the fractional program") {
    const ProblemInstance p = make_fractional();
    const Vec x{1.0};
    const ConstraintValues at = eval_constraints(p, x, 0.5);
    CHECK(at.A(0, 0) == Approx(0.0));
    CHECK(at.B(0, 0) == 1.0);
    CHECK(at.feasible);
    CHECK(std::abs(at.margin) <= 1e-12);

    const ConstraintValues below = eval_constraints(p, x, 0.4);
    CHECK(below.A(0, 0) == Approx(-0.2));
    CHECK_FALSE(below.feasible);
    CHECK(below.margin == Approx(-0.2));
  }

  TEST_CASE("truss feasibility straddles the fundamental frequency") {
    const TrussModel t = truss_2bar_model();
    const ProblemInstance p = make_truss_problem(t);
    const TrussMatrices mats = assemble_truss_matrices(t);
    const Vec x{0.5, 0.5};
    const double lambda = gen_eig_min(mats.stiffness(x), mats.mass(x));
    CHECK(lambda > 0.0);
    CHECK(eval_constraints(p, x, -0.99 * lambda).feasible);
    CHECK_FALSE(eval_constraints(p, x, -1.01 * lambda).feasible);
  }

  TEST_CASE("eval_gradients on the fractional program") {
    const ProblemInstance p = make_fractional();
    const Vec x{2.0};
    const GradientBundle g = eval_gradients(p, x, 0.25);
    REQUIRE(g.grad_A.size() == 1);
    CHECK(g.grad_A[0](0, 0) == Approx(-0.75));
    CHECK(g.dA_dy(0, 0) == Approx(3.0));
    CHECK(g.grad_B[0](0, 0) == Approx(1.0));
  }

  TEST_CASE("declared derivatives match finite differences across the catalog") {
    for (const std::string& id : catalog_ids()) {
      CAPTURE(id);
      const ProblemInstance p = catalog_problem(id);
      REQUIRE(p.x_box);
      REQUIRE(p.y_hint);
      std::mt19937_64 rng(1000);
      for (int k = 0; k < 10; ++k) {
        const Vec x = sample_box(*p.x_box, rng);
        const double y =
            std::uniform_real_distribution<double>(p.y_hint->lo, std::min(p.y_hint->hi, 5.0))(rng);
        const DerivativeCheck d = check_derivatives(p, x, y);
        CHECK(d.worst() <= 1e-5);
      }
    }
  }

  TEST_CASE("assumption verdicts") {
    AssumptionOptions opts;
    opts.sample_count = 60;
    const AssumptionReport frac = check_assumptions(make_fractional(), opts);
    CHECK(frac.all_pass());
    CHECK(frac.samples >= 60);
    const AssumptionReport sq = check_assumptions(make_sqrt_scalar(), opts);
    CHECK(sq.all_pass());

    const AssumptionReport relaxed = check_assumptions(make_sqrt_scalar(SqrtVariant::relaxed), opts);
    CHECK(relaxed.b == Verdict::fail);

    const AssumptionReport sym = check_assumptions(catalog_problem("grasp-2finger"), opts);
    CHECK(sym.b == Verdict::pass);
    const AssumptionReport lit = check_assumptions(catalog_problem("grasp-2finger-literal"), opts);
    CHECK(lit.b == Verdict::fail);
    CHECK(lit.min_dA_dy_eig <= 1e-9);
  }

  TEST_CASE("A is Loewner-monotone in y where B(x) >= 0") {
    for (const std::string id : {"fractional", "sqrt", "minimax", "truss-2bar", "grasp-2finger"}) {
      CAPTURE(id);
      const ProblemInstance p = catalog_problem(id);
      std::mt19937_64 rng(77);
      for (int k = 0; k < 10;) {
        const Vec x = sample_box(*p.x_box, rng);
        if (!min_eig_psd(checked_B(p.fn, x)).is_psd) continue;
        ++k;
        std::uniform_real_distribution<double> yd(p.y_hint->lo, std::min(p.y_hint->hi, 5.0));
        double y1 = yd(rng), y2 = yd(rng);
        if (y1 > y2) std::swap(y1, y2);
        const SymMat a1 = checked_A(p.fn, x, y1), a2 = checked_A(p.fn, x, y2);
        const double scale = std::max(1.0, std::max(a1.max_abs(), a2.max_abs()));
        CHECK(min_eig_psd(a2 - a1).lambda_min >= -1e-12 * scale);
      }
    }
  }

  TEST_CASE("bilinear forms evaluate exactly and are affine in each argument") {
    const BilinearAffineForm f = small_bilinear();
    f.validate();
    const Vec x{0.3, -1.2};
    const double y = 0.7;
    SymMat expect = f.A0 + y * f.C0;
    for (std::size_t j = 0; j < 2; ++j) expect += x[j] * (f.Aj[j] + y * f.Cj[j]);
    CHECK(testutil::max_diff(f.eval_A(x, y), expect) <= 1e-14);

    const Vec x2{-0.5, 2.0};
    const double t = 0.3;
    const Vec xm{t * x[0] + (1 - t) * x2[0], t * x[1] + (1 - t) * x2[1]};
    CHECK(testutil::max_diff(f.eval_A(xm, y), t * f.eval_A(x, y) + (1 - t) * f.eval_A(x2, y)) <= 1e-12);
    CHECK(testutil::max_diff(f.eval_A(x, 0.4), 0.5 * f.eval_A(x, 0.1) + 0.5 * f.eval_A(x, 0.7)) <= 1e-12);
    CHECK(testutil::max_diff(f.eval_B(xm), t * f.eval_B(x) + (1 - t) * f.eval_B(x2)) <= 1e-12);

    const MatFnPair fp = f.to_fn_pair();
    CHECK(fp.m == 2);
    CHECK(fp.n_A == 3);
    CHECK(fp.n_B == 2);
    CHECK(testutil::max_diff(fp.dA_dy(x, y), f.dA_dy(x)) == 0.0);

    BilinearAffineForm bad = f;
    bad.Cj.pop_back();
    CHECK_THROWS_AS(bad.validate(), ConstructionError);
  }

  TEST_CASE("scalar adapters produce exactly diagonal matrices") {
    std::vector<ScalarFn> g{
        {[](ConstVec x) { return x[0] * x[0] + x[1] - 1.0; }, [](ConstVec x) { return Vec{2 * x[0], 1.0}; }},
        {[](ConstVec x) { return std::exp(x[1]) - 3.0; }, [](ConstVec x) { return Vec{0.0, std::exp(x[1])}; }},
        {[](ConstVec x) { return -x[0]; }, [](ConstVec) { return Vec{-1.0, 0.0}; }}};
    const ScalarDiagAdapter ad = ScalarDiagAdapter::from_inequalities(2, g);
    const Vec x{0.4, -0.8};
    const SymMat b = ad.eval(x);
    CHECK(b.is_diagonal());
    CHECK(b(0, 0) == Approx(-(0.16 - 0.8 - 1.0)));
    CHECK(b(2, 2) == Approx(0.4));
    for (const SymMat& d : ad.gradient(x)) CHECK(d.is_diagonal());

    const MatFnPair cp = from_convex_program(
        2, {[](ConstVec x) { return x[0] * x[0] + x[1] * x[1]; }, [](ConstVec x) { return Vec{2 * x[0], 2 * x[1]}; }},
        g);
    CHECK(cp.n_A == 1);
    CHECK(cp.n_B == 3);
    CHECK(cp.eval_B(x).is_diagonal());
  }

  TEST_CASE("input validation") {
    const ProblemInstance p = make_fractional();
    CHECK_THROWS_AS(eval_constraints(p, Vec{1.0, 2.0}, 0.0), UsageError);
    CHECK_THROWS_AS(eval_constraints(p, Vec{11.0}, 0.0), UsageError);
    CHECK_THROWS_AS(eval_constraints(p, Vec{1.0}, std::nan("")), UsageError);

    MatFnPair broken = p.fn;
    broken.eval_A = [](ConstVec, double) {
      SymMat a(1);
      a.set(0, 0, std::numeric_limits<double>::quiet_NaN());
      return a;
    };
    const ProblemInstance q = ProblemInstance::make(broken, p.x_box, p.y_hint, "broken");
    try {
      eval_constraints(q, Vec{1.0}, 0.5);
      FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
      CHECK(std::string(e.what()).find("eval_A") != std::string::npos);
    }

    CHECK_THROWS_AS(ProblemInstance::make(p.fn, Box{{1.0}, {0.0}}, p.y_hint, "x"), ConstructionError);
    CHECK_THROWS_AS(ProblemInstance::make(p.fn, p.x_box, YBracket{1.0, 1.0}, "x"), ConstructionError);
    CHECK_THROWS_AS(ProblemInstance::make(p.fn, Box{{0.0, 0.0}, {1.0, 1.0}}, p.y_hint, "x"),
                    ConstructionError);
    MatFnPair unset = p.fn;
    unset.dA_dy = nullptr;
    CHECK_THROWS_AS(ProblemInstance::make(unset, p.x_box, p.y_hint, "x"), ConstructionError);

    AssumptionOptions zero;
    zero.sample_count = 0;
    CHECK_THROWS_AS(check_assumptions(p, zero), UsageError);
  }

  TEST_CASE("boundary_y") {
    const ProblemInstance p = make_fractional();
    const auto b = boundary_y(p, Vec{1.0}, -1.0, 2.0);
    REQUIRE(b);
    CHECK(*b == Approx(0.5).epsilon(1e-9));
    CHECK_FALSE(boundary_y(p, Vec{1.0}, -1.0, 0.4));
  }
}
