#pragma once

// Problem representation for
//
//     minimize y  subject to  A(x, y) >= 0,  B(x) >= 0   (Loewner order)
//
// where A(., y) and B are concave, A(x, .) is convex and dA/dy is positive
// definite on the feasible set. Constraint maps are plain callables with
// user-declared first derivatives; finite-difference checks police them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "globalsdp/symmat.hpp"

namespace globalsdp {

using ConstVec = std::span<const double>;

/// The pair (A(x, y), B(x)) with first derivatives. Component j of grad_x_A
/// is dA/dx_j. Maps must be pure: instances are shared across threads.
struct MatFnPair {
  std::size_t m = 0;
  std::size_t n_A = 0;
  std::size_t n_B = 0;
  std::function<SymMat(ConstVec, double)> eval_A;
  std::function<std::vector<SymMat>(ConstVec, double)> grad_x_A;
  std::function<SymMat(ConstVec, double)> dA_dy;
  std::function<SymMat(ConstVec)> eval_B;
  std::function<std::vector<SymMat>(ConstVec)> grad_x_B;
};

/// A(x, y) = A0 + sum_j x_j A_j + y (C0 + sum_j x_j C_j),  B(x) = B0 + sum_j x_j B_j.
/// Affine in x for fixed y and affine in y for fixed x.
struct BilinearAffineForm {
  SymMat A0;
  SymMat C0;
  std::vector<SymMat> Aj;
  std::vector<SymMat> Cj;
  SymMat B0;
  std::vector<SymMat> Bj;

  std::size_t m() const noexcept { return Aj.size(); }
  /// Throws ConstructionError on inconsistent sizes or non-finite data.
  void validate() const;

  SymMat eval_A(ConstVec x, double y) const;
  SymMat dA_dy(ConstVec x) const;
  SymMat eval_B(ConstVec x) const;

  MatFnPair to_fn_pair() const;
};

/// Scalar function of x with gradient.
struct ScalarFn {
  std::function<double(ConstVec)> value;
  std::function<Vec(ConstVec)> gradient;
};

/// Scalar function of (x, y) with its partial derivatives.
struct ScalarFnXY {
  std::function<double(ConstVec, double)> value;
  std::function<Vec(ConstVec, double)> grad_x;
  std::function<double(ConstVec, double)> d_dy;
};

/// Stacks q scalar functions h_1..h_q of x as diag(h_1(x), ..., h_q(x)).
struct ScalarDiagAdapter {
  std::size_t m = 0;
  std::vector<ScalarFn> entries;

  /// The constraints g_i(x) <= 0 as diag(-g_1(x), ..., -g_q(x)) >= 0.
  static ScalarDiagAdapter from_inequalities(std::size_t m, const std::vector<ScalarFn>& g);

  std::size_t q() const noexcept { return entries.size(); }
  SymMat eval(ConstVec x) const;
  std::vector<SymMat> gradient(ConstVec x) const;
};

/// A(x, y) = diag(a_1(x, y), ..., a_p(x, y)) with B given by an adapter.
MatFnPair make_diagonal_pair(std::size_t m, std::vector<ScalarFnXY> a_rows,
                             ScalarDiagAdapter b);

/// The smooth convex program min f(x) s.t. g_i(x) <= 0 as A = [y - f(x)],
/// B = diag(-g_i(x)).
MatFnPair from_convex_program(std::size_t m, ScalarFn f, const std::vector<ScalarFn>& g);

struct Box {
  Vec lower;
  Vec upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(ConstVec x, double tol = 0.0) const;
  Vec clamp(ConstVec x) const;
  Vec center() const;
};

struct YBracket {
  double lo;
  double hi;
};

struct ProblemInstance {
  MatFnPair fn;
  std::optional<Box> x_box;
  std::optional<YBracket> y_hint;
  std::string name;

  /// Validates dimensions, box ordering and bracket ordering.
  static ProblemInstance make(MatFnPair fn, std::optional<Box> x_box,
                              std::optional<YBracket> y_hint, std::string name);

  std::size_t m() const noexcept { return fn.m; }
};

struct ConstraintValues {
  SymMat A;
  SymMat B;
  double lambda_min_A;
  double lambda_min_B;
  /// min(lambda_min(A), lambda_min(B))
  double margin;
  bool feasible;
};

struct GradientBundle {
  std::vector<SymMat> grad_A;
  SymMat dA_dy;
  std::vector<SymMat> grad_B;
};

/// Feasibility tolerance used by eval_constraints.
inline constexpr double kFeasTol = 1e-9;

ConstraintValues eval_constraints(const ProblemInstance& p, ConstVec x, double y,
                                  double tol = kFeasTol);
GradientBundle eval_gradients(const ProblemInstance& p, ConstVec x, double y);

/// Checked single evaluations; throw EvaluationError naming the map on a
/// wrong dimension or non-finite output.
SymMat checked_A(const MatFnPair& f, ConstVec x, double y);
SymMat checked_B(const MatFnPair& f, ConstVec x);

/// Central finite differences (step h) against the declared derivatives.
/// Errors are max-norm and relative to max(1, ||declared||_max).
struct DerivativeCheck {
  double grad_A_error = 0.0;
  double dA_dy_error = 0.0;
  double grad_B_error = 0.0;

  double worst() const noexcept;
};

DerivativeCheck check_derivatives(const ProblemInstance& p, ConstVec x, double y,
                                  double h = 1e-6);

/// Smallest y in [lo, hi] (to 64 bisection steps) with A(x, y) >= 0, assuming
/// monotone feasibility in y. Empty when B(x) is infeasible or A(x, hi) is.
std::optional<double> boundary_y(const ProblemInstance& p, ConstVec x, double lo, double hi,
                                 int steps = 64, double tol = kFeasTol);

enum class Verdict { pass, fail, not_assessed };
const char* to_string(Verdict v) noexcept;

struct AssumptionOptions {
  std::size_t sample_count = 200;
  std::uint64_t seed = 20240611;
  /// Midpoint gaps must satisfy lambda_min >= -convexity_tol * max(1, scale).
  double convexity_tol = 1e-8;
  /// (b) requires lambda_min(dA/dy) > pd_tol.
  double pd_tol = 1e-9;
};

struct AssumptionReport {
  /// (a) concavity of A(., y) and B, convexity of A(x, .)
  Verdict a = Verdict::not_assessed;
  /// (b) dA/dy positive definite at sampled feasible points
  Verdict b = Verdict::not_assessed;
  /// (c) constraint qualification, approximated by a strict-feasibility probe
  Verdict c = Verdict::not_assessed;

  double worst_concavity_A_x = 0.0;
  double worst_concavity_B = 0.0;
  double worst_convexity_A_y = 0.0;
  /// min over pairs of lambda_min(midpoint gap) / ||x - x'||^2 for A(., y)
  double strict_concavity_A_x = 0.0;
  double min_dA_dy_eig = 0.0;
  double best_margin = 0.0;
  std::size_t samples = 0;
  std::size_t feasible_samples = 0;
  std::vector<std::string> notes;

  bool all_pass() const noexcept {
    return a == Verdict::pass && b == Verdict::pass && c == Verdict::pass;
  }
};

AssumptionReport check_assumptions(const ProblemInstance& p, const AssumptionOptions& opts = {});

}  // namespace globalsdp
