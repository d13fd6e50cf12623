#pragma once

// Global solver: bisection on y with an inner concave margin maximization
// over x. For fixed y the set {x : A(x, y) >= 0, B(x) >= 0} is convex and
// feasibility is monotone in y, so the infimum of feasible y is found by
// bisection; the result is then certified a posteriori with verify_kkt.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "globalsdp/kkt.hpp"
#include "globalsdp/model.hpp"

namespace globalsdp {

struct InnerOpts {
  /// Smoothing schedule for phi_mu = -mu log sum_k exp(-lambda_k / mu).
  double mu_start = 1e-1;
  double mu_end = 1e-4;
  double mu_factor = 10.0;
  /// Gradient-ascent iterations per smoothing stage.
  int max_iter = 500;
  double armijo = 1e-4;
  /// Projected-gradient norm at which a smoothing stage stops.
  double grad_tol = 1e-10;
  /// Extra stage-one runs from seeded random points in x_box.
  int restarts = 0;
  /// Log-barrier refinement: the path parameter is driven down to nu_end.
  bool refine = true;
  double nu_end = 1e-11;
  int newton_max_iter = 60;
  /// A probe is feasible iff the returned margin is >= -feas_tol.
  double feas_tol = 1e-8;
};

struct InnerResult {
  Vec x;
  /// min(lambda_min(A(x, y)), lambda_min(B(x))) at the returned x.
  double t = 0.0;
  /// Upper bound on the maximal margin over x_box (infinity if unknown).
  double t_upper = 0.0;
  /// phi_mu at the end of the smoothing stages.
  double phi = 0.0;
  /// mu of the last smoothing stage.
  double mu = 0.0;
  int iterations = 0;
  bool exact = true;
  /// Iterates at which t - mu log(N) <= phi_mu <= t failed (should stay 0).
  int sandwich_violations = 0;

  bool feasible(double feas_tol) const noexcept { return t >= -feas_tol; }
};

/// Maximizes the feasibility margin over x in x_box for fixed y, starting at x0.
InnerResult feasibility_margin(const ProblemInstance& p, double y, ConstVec x0,
                               const InnerOpts& opts = {});

/// Same, for B alone (used to tell an infeasible instance from a bad bracket).
InnerResult feasibility_margin_B(const ProblemInstance& p, ConstVec x0, const InnerOpts& opts = {});

enum class SolveStatus { optimal, infeasible, bracket_failure, iteration_cap, uncertified };
const char* to_string(SolveStatus s) noexcept;

struct TraceEntry {
  double y;
  double margin;
  int inner_iterations;
  bool feasible;
};

struct SolveOptions {
  double tol_y = 1e-8;
  InnerOpts inner;
  /// Expansion cap for the y bracket (the width doubles each time).
  int max_expansions = 60;
  double cert_tol = kCertTol;
  double active_tol = 1e-6;
  /// Run check_assumptions first and refuse on (a) or (b) failures.
  bool check_assumptions = true;
  bool override_assumptions = false;
  AssumptionOptions assumption;
  /// Starting point of the first probe; box center when empty.
  std::optional<Vec> x0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::bracket_failure;
  Vec x_star;
  double y_star = 0.0;
  std::optional<KktCertificate> certificate;
  std::vector<TraceEntry> trace;
  double wall_time = 0.0;
  std::string message;
  std::vector<std::string> warnings;
  std::optional<AssumptionReport> assumptions;
};

/// Throws AssumptionViolation when the check fails and no override is set.
SolveReport bisection_solve(const ProblemInstance& p, const SolveOptions& opts = {});

struct MultistartOptions {
  std::size_t starts = 16;
  std::uint64_t seed = 42;
  SolveOptions solve;
  /// 0: GLOBALSDP_THREADS if set, else hardware concurrency.
  unsigned threads = 0;
};

struct MultistartRun {
  std::size_t index = 0;
  Vec x0;
  SolveReport report;
};

struct MultistartReport {
  std::vector<MultistartRun> runs;
  std::size_t accepted = 0;
  /// max |y_i - y_j| over runs with accepted certificates.
  double y_spread = 0.0;
  /// max ||x_i - x_j||_inf over runs with accepted certificates.
  double x_spread = 0.0;
  /// Runs that ended without an accepted certificate.
  std::vector<std::size_t> uncertified_runs;
  std::optional<AssumptionReport> assumptions;
  std::vector<std::string> warnings;
};

/// Independent bisection solves from seeded random starting points. The
/// report does not depend on the thread schedule.
MultistartReport multistart(const ProblemInstance& p, const MultistartOptions& opts = {});

/// Thread count used by multistart for a requested value (0 = auto).
unsigned resolve_thread_count(unsigned requested);

}  // namespace globalsdp
