#pragma once

// Catalog instances and builders: fractional and square-root scalar
// programs, norm minimization, minimax epigraphs, truss eigenvalue design
// and grasping-force optimization.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "globalsdp/model.hpp"

namespace globalsdp {

// ---------------------------------------------------------------------------
// Scalar programs

/// A = [y (x + 1) - x], B = [x], x in [0, 10].
ProblemInstance make_fractional();

enum class SqrtVariant {
  /// x in [1, 100], B = [x - 1]
  standard,
  /// x in [0, 100], B = [x]; dA/dy is singular at the optimum
  relaxed,
};

/// A = diag(y^2 - x, y).
ProblemInstance make_sqrt_scalar(SqrtVariant variant = SqrtVariant::standard);

/// min sqrt(x^T Q x) s.t. g(x) <= 0 as A = diag(y^2 - x^T Q x, y), B = [-g(x)].
/// Throws ConstructionError when Q is not positive definite or when x = 0 lies
/// in the box and satisfies g(0) <= 0.
ProblemInstance make_norm_quadratic(const SymMat& q, ScalarFn g, Box x_box,
                                    std::string name = "norm-quadratic");

// ---------------------------------------------------------------------------
// Minimax epigraph

enum class ComponentTag {
  /// row y - f(x); f convex
  plain,
  /// row exp(y) - f(x); minimizes log f with f convex and positive
  log,
  /// row y g(x) - f(x); minimizes f / g with f convex positive, g concave positive
  ratio,
};

struct MinimaxComponent {
  ComponentTag tag = ComponentTag::plain;
  std::string name;
  ScalarFn f;
  /// Denominator, ratio components only.
  std::optional<ScalarFn> g;

  /// The value this component contributes to the max (f, log f or f / g).
  double objective(ConstVec x) const;
};

/// minimize max_i objective_i(x) over x_box and extra constraints c_k(x) <= 0.
/// B stacks the box rows and the extra constraints. The y bracket is taken
/// from sampled objective values. Positivity required by log and ratio
/// components is checked on box vertices and seeded samples.
ProblemInstance make_minimax_epigraph(std::vector<MinimaxComponent> components, Box x_box,
                                      std::vector<ScalarFn> extra = {},
                                      std::string name = "minimax");

// ---------------------------------------------------------------------------
// Trusses

struct TrussModel {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> bars;
  double young_modulus = 1.0;
  double density = 1.0;
  /// Nonstructural mass per node (empty means none).
  Vec node_mass;
  /// Constrained displacement indices, 2 * node + {0, 1}.
  std::vector<std::size_t> fixed_dofs;
  double x_min = 0.1;
  double V0 = 1.0;

  Vec lengths() const;
  /// Unconstrained dofs in ascending order.
  std::vector<std::size_t> free_dofs() const;
  /// Throws ConstructionError on a broken model.
  void validate() const;
};

struct TrussMatrices {
  /// Per-unit-area stiffness and lumped mass of each bar, on the free dofs.
  std::vector<SymMat> K;
  std::vector<SymMat> M;
  /// Nonstructural mass on the free dofs.
  SymMat M0;
  std::vector<std::size_t> free_dofs;

  SymMat stiffness(ConstVec x) const;
  SymMat mass(ConstVec x) const;
};

TrussMatrices assemble_truss_matrices(const TrussModel& t);

/// y = -lambda: A(x, y) = K(x) + y M(x), B(x) = diag(x_j - x_min, V0 - l^T x).
ProblemInstance make_truss_problem(const TrussModel& t, std::string name = "truss");

/// Nodes (0,0), (2,0) fixed, (1,1) free with unit mass; E = rho = 1,
/// x_min = 0.1, V0 = sqrt(2).
TrussModel truss_2bar_model();
/// Two-bay cantilever: nodes (0,0), (0,1) fixed; (1,0), (1,1), (2,0), (2,1)
/// free; four horizontals, two verticals, four diagonals; unit tip masses;
/// x_min = 0.05, V0 = 5.
TrussModel truss_10bar_model();

// ---------------------------------------------------------------------------
// Grasping forces

struct Contact {
  std::array<double, 3> p;
  /// Unit inward normal.
  std::array<double, 3> b;
};

enum class GraspLmiForm {
  /// [[y n I, A x], [x^T A^T, y n]]: ||A x|| <= y n (dA/dy positive definite)
  symmetric,
  /// [[y n I, A x], [x^T A^T, n]]: ||A x||^2 <= y n^2 (dA/dy singular)
  literal,
};

struct GraspSpec {
  std::vector<Contact> contacts;
  std::array<double, 3> f_ext{};
  std::array<double, 3> T_ext{};
  double f_max = 10.0;
  double eps_n = 1e-3;
  GraspLmiForm form = GraspLmiForm::symmetric;

  void validate() const;
};

/// Contact forces x = x_p + N z satisfying sum x_i = -f_ext and
/// sum p_i x x_i = -T_ext for every z.
struct GraspElimination {
  Vec x_p;
  /// Orthonormal null-space basis, one column per entry.
  std::vector<Vec> N;
  std::size_t rank = 0;
  bool rank_deficient = false;

  Vec forces(ConstVec z) const;
};

/// Throws ConstructionError when the equilibrium equations are inconsistent.
GraspElimination grasp_equilibrium(const GraspSpec& g);

/// ||sum x_i + f_ext|| + ||sum p_i x x_i + T_ext||
double equilibrium_residual(const GraspSpec& g, ConstVec forces);

/// Block-diagonal LMI over contacts in the null-space variable z;
/// B(z) = diag(f_max - n_i, n_i - eps_n) with n_i = b_i^T x_i(z).
ProblemInstance make_grasp_problem(const GraspSpec& g, std::string name = "grasp");

/// Fingers at (-a, 0, 0) and (a, 0, 0) pressing inward, vertical load.
GraspSpec grasp_two_finger_spec(double load = 1.0, double f_max = 10.0, double a = 0.5);

/// max_i ||A_i x_i|| / (b_i^T x_i) at z; infinity when some n_i <= 0.
double grasp_friction_ratio(const GraspSpec& g, const GraspElimination& e, ConstVec z);

// ---------------------------------------------------------------------------

/// A = [y - x1^2 - x2^2 + 2 x1], box rows on [-2, 2]^2.
ProblemInstance make_strictly_concave_variant();

/// Identifiers accepted by catalog_problem, in listing order.
const std::vector<std::string>& catalog_ids();
/// Throws UsageError on an unknown identifier.
ProblemInstance catalog_problem(std::string_view id);
std::string catalog_description(std::string_view id);

// ---------------------------------------------------------------------------
// File formats (JSON syntax). Errors are UsageError with line or field
// diagnostics.

TrussModel parse_truss(std::string_view text);
GraspSpec parse_grasp(std::string_view text);
/// Bilinear instance: m, nA, nB, lower-triangular rows for A0, C0, Aj[],
/// Cj[], B0, Bj[], optional x_box {lower, upper}, y_hint [lo, hi], name.
ProblemInstance parse_bilinear(std::string_view text);
/// Dispatches on the "kind" field ("truss", "grasp" or "bilinear", the
/// default).
ProblemInstance parse_problem_file(std::string_view text);

}  // namespace globalsdp
