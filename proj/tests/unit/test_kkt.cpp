#include <doctest.h>

#include <cmath>

#include "globalsdp/error.hpp"
#include "globalsdp/kkt.hpp"
#include "globalsdp/problems.hpp"

using namespace globalsdp;

namespace {

SymMat scalar(double v) {
  SymMat a(1);
  a.set(0, 0, v);
  return a;
}

ProblemInstance scaled(const ProblemInstance& p, double c) {
  MatFnPair f = p.fn;
  f.eval_A = [g = p.fn.eval_A, c](ConstVec x, double y) { return c * g(x, y); };
  f.dA_dy = [g = p.fn.dA_dy, c](ConstVec x, double y) { return c * g(x, y); };
  f.grad_x_A = [g = p.fn.grad_x_A, c](ConstVec x, double y) {
    auto v = g(x, y);
    for (SymMat& a : v) a *= c;
    return v;
  };
  return ProblemInstance::make(f, p.x_box, p.y_hint, p.name + "-scaled");
}

void check_invariants(const KktCertificate& c) {
  CHECK(c.accepted);
  CHECK(c.residuals.max() <= c.tol);
  CHECK(min_eig_psd(c.Z).lambda_min >= -c.tol);
  CHECK(min_eig_psd(c.W).lambda_min >= -c.tol);
  CHECK(c.reason.empty());
}

}  // namespace

TEST_SUITE("kkt") {
  TEST_CASE("residuals at the fractional optimum") {
    const ProblemInstance p = make_fractional();
    const KktResiduals r = kkt_residuals(p, Vec{0.0}, 0.0, scalar(1.0), scalar(1.0));
    CHECK(r.max() <= 1e-12);

    const KktResiduals zero = kkt_residuals(p, Vec{0.0}, 0.0, scalar(0.0), scalar(0.0));
    CHECK(zero.stat_y == 1.0);
    CHECK(zero.stat_y_signed == 1.0);
    CHECK(zero.violations(1e-6) == "stat_y");
  }

  TEST_CASE("residuals at the square-root optimum") {
    const ProblemInstance p = make_sqrt_scalar();
    const double z[] = {0.5, 0.0};
    const KktResiduals r = kkt_residuals(p, Vec{1.0}, 1.0, SymMat::diagonal(z), scalar(0.5));
    CHECK(r.stat_y == 0.0);
    CHECK(r.max() <= 1e-12);
  }

  TEST_CASE("verify_kkt accepts the known optima") {
    const KktCertificate f = verify_kkt(make_fractional(), Vec{0.0}, 0.0, 1e-8);
    check_invariants(f);
    CHECK(f.Z(0, 0) == doctest::Approx(1.0));
    CHECK(f.W(0, 0) == doctest::Approx(1.0));

    const KktCertificate s = verify_kkt(make_sqrt_scalar(), Vec{1.0}, 1.0, 1e-8);
    check_invariants(s);
    CHECK(s.Z(0, 0) == doctest::Approx(0.5));
    CHECK(s.Z(1, 1) == doctest::Approx(0.0));
  }

  TEST_CASE("recovery reports why no certificate exists") {
    const ProblemInstance p = make_fractional();
    const MultiplierRecovery ok = recover_multipliers(p, Vec{0.0}, 0.0);
    CHECK(ok.ok);
    CHECK(ok.active_A == 1);
    CHECK(ok.active_B == 1);

    const KktCertificate mid = verify_kkt(p, Vec{1.0}, 0.5);
    CHECK_FALSE(mid.accepted);
    CHECK(mid.reason == "no KKT multipliers at this point");

    const KktCertificate slack = verify_kkt(p, Vec{1.0}, 0.9);
    CHECK_FALSE(slack.accepted);
    CHECK(slack.reason == "empty active set");

    const KktCertificate infeasible = verify_kkt(p, Vec{1.0}, 0.2);
    CHECK_FALSE(infeasible.accepted);
    CHECK(infeasible.reason == "point is infeasible");
  }

  TEST_CASE("scaling A rescales the multiplier") {
    const ProblemInstance p = scaled(make_fractional(), 2.0);
    const KktResiduals r = kkt_residuals(p, Vec{0.0}, 0.0, scalar(1.0), scalar(1.0));
    CHECK(r.stat_y == doctest::Approx(1.0));
    const KktCertificate c = verify_kkt(p, Vec{0.0}, 0.0, 1e-8);
    check_invariants(c);
    CHECK(c.Z(0, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("certificate at the two-bar truss optimum") {
    const KktCertificate t = verify_kkt(catalog_problem("truss-2bar"),
                                        Vec{0.5, 0.5}, -(std::sqrt(2.0) - 1.0) / 2.0, 1e-6);
    check_invariants(t);
  }

  TEST_CASE("usage errors") {
    const ProblemInstance p = make_fractional();
    CHECK_THROWS_AS(kkt_residuals(p, Vec{0.0}, 0.0, SymMat::identity(2), scalar(1.0)), UsageError);
    CHECK_THROWS_AS(verify_kkt(p, Vec{0.0}, 0.0, 0.0), UsageError);
    CHECK_THROWS_AS(verify_kkt(p, Vec{0.0}, std::nan("")), UsageError);
  }
}
