#pragma once

// Brute-force and closed-form references for checking solver output.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "globalsdp/model.hpp"
#include "globalsdp/problems.hpp"

namespace globalsdp {

struct GridSpec {
  Vec lower;
  Vec upper;
  Vec step;

  static constexpr std::size_t kMaxPoints = 10'000'000;

  static GridSpec uniform(const Box& box, double step);
  /// Points along coordinate j (both ends included when they fall on the grid).
  std::size_t points(std::size_t j) const;
  /// Product of points(j); saturates instead of overflowing.
  std::size_t total() const;
  /// Throws UsageError on bad ranges, non-positive steps or > kMaxPoints.
  void validate() const;
  Vec point(std::size_t flat) const;
};

struct GridResult {
  bool feasible = false;
  double best_y = 0.0;
  Vec best_x;
  std::size_t points = 0;
  std::size_t feasible_points = 0;
};

/// Smallest feasible y over grid points (64-step bisection in y within the
/// instance's y_hint at each point). Ties break on y, then lexicographic x.
GridResult grid_search(const ProblemInstance& p, const GridSpec& g, unsigned threads = 1);

/// lambda_min(K(x), M(x)) of a truss design by a generalized eigensolve.
double truss_direct(const TrussModel& t, ConstVec x);

/// sup{lambda : K - lambda M >= 0} by bisection on PSD tests.
double gen_eig_sup_bisection(const SymMat& k, const SymMat& m);
/// min over seeded random v of v^T K v / v^T M v.
double rayleigh_sample_min(const SymMat& k, const SymMat& m, std::size_t samples, std::uint64_t seed);

struct PseudoconvexReport {
  std::size_t pairs = 0;
  /// Pairs with f(x) > f(y).
  std::size_t ordered_pairs = 0;
  std::size_t violations = 0;
  /// Largest <grad f(x), y - x> over ordered pairs (should be < 0).
  double worst = 0.0;
  std::optional<std::pair<Vec, Vec>> example;
};

/// Samples pairs (x, y) in the box and checks f(x) > f(y) => <grad f(x), y - x> < 0.
PseudoconvexReport pseudoconvex_check(const ScalarFn& f, const Box& domain, std::size_t samples,
                                      std::uint64_t seed);

/// (load / 2) / f_max for the symmetric two-finger grasp.
double grasp_analytic_two_finger(double load, double f_max);

struct GraspRatioResult {
  bool feasible = false;
  double best_ratio = 0.0;
  Vec best_z;
};

/// min over grid points z with eps_n <= n_i(z) <= f_max of max_i ||A_i x_i|| / n_i.
GraspRatioResult grasp_ratio_search(const GraspSpec& g, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Fixtures: catalog id -> reference value computed by grid_search.

struct Fixture {
  double oracle_y = 0.0;
  Vec oracle_x;
  GridSpec grid;
  std::string checksum;
};

/// Default oracle grid of a catalog id; empty when the dimension is too high.
std::optional<GridSpec> fixture_grid(std::string_view id);
/// Throws UsageError when the id has no grid or the grid finds nothing.
Fixture compute_fixture(std::string_view id);
std::string fixture_checksum(double y, ConstVec x, const GridSpec& g);

std::string fixtures_to_json(const std::map<std::string, Fixture>& f);
/// Throws UsageError on malformed text or a checksum mismatch.
std::map<std::string, Fixture> fixtures_from_json(std::string_view text);

}  // namespace globalsdp
