#include "globalsdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool better(double y, ConstVec x, double best_y, ConstVec best_x) {
  if (y != best_y) return y < best_y;
  return std::lexicographical_compare(x.begin(), x.end(), best_x.begin(), best_x.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

GridSpec GridSpec::uniform(const Box& box, double step) {
  return GridSpec{box.lower, box.upper, Vec(box.size(), step)};
}

std::size_t GridSpec::points(std::size_t j) const {
  return static_cast<std::size_t>(std::floor((upper[j] - lower[j]) / step[j] + 1e-9)) + 1;
}

std::size_t GridSpec::total() const {
  std::size_t t = 1;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    const std::size_t pj = points(j);
    if (t > std::numeric_limits<std::size_t>::max() / pj) return std::numeric_limits<std::size_t>::max();
    t *= pj;
  }
  return t;
}

void GridSpec::validate() const {
  if (lower.empty() || lower.size() != upper.size() || lower.size() != step.size()) {
    throw UsageError("grid: lower, upper and step need the same nonzero length");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j])
      throw UsageError("grid: bad range on coordinate " + std::to_string(j));
    if (!(step[j] > 0.0)) throw UsageError("grid: resolutions must be > 0");
  }
  if (total() > kMaxPoints) {
    throw UsageError("grid: more than " + std::to_string(kMaxPoints) + " points");
  }
}

Vec GridSpec::point(std::size_t flat) const {
  Vec x(lower.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const std::size_t pj = points(j);
    x[j] = std::min(upper[j], lower[j] + static_cast<double>(flat % pj) * step[j]);
    flat /= pj;
  }
  return x;
}

GridResult grid_search(const ProblemInstance& p, const GridSpec& g, unsigned threads) {
  g.validate();
  if (g.lower.size() != p.m()) throw UsageError("grid dimension does not match the problem");
  if (!p.y_hint) throw UsageError("grid_search needs a y_hint to bisect within");
  const std::size_t total = g.total();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(total, 1024))));

  std::vector<GridResult> shards(threads);
  auto work = [&](unsigned s) {
    GridResult& r = shards[s];
    r.best_y = kInf;
    for (std::size_t i = s; i < total; i += threads) {
      const Vec x = g.point(i);
      ++r.points;
      const auto y = boundary_y(p, x, p.y_hint->lo, p.y_hint->hi, 64);
      if (!y) continue;
      ++r.feasible_points;
      if (!r.feasible || better(*y, x, r.best_y, r.best_x)) {
        r.feasible = true;
        r.best_y = *y;
        r.best_x = x;
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
  }

  GridResult out;
  out.best_y = kInf;
  for (const GridResult& r : shards) {
    out.points += r.points;
    out.feasible_points += r.feasible_points;
    if (r.feasible && (!out.feasible || better(r.best_y, r.best_x, out.best_y, out.best_x))) {
      out.feasible = true;
      out.best_y = r.best_y;
      out.best_x = r.best_x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generalized eigenvalues

double truss_direct(const TrussModel& t, ConstVec x) {
  const TrussMatrices tm = assemble_truss_matrices(t);
  if (x.size() != t.bars.size()) throw UsageError("truss_direct: x needs one entry per bar");
  for (double v : x)
    if (!(v >= t.x_min)) throw UsageError("truss_direct: x must satisfy x >= x_min");
  return gen_eig_min(tm.stiffness(x), tm.mass(x));
}

double gen_eig_sup_bisection(const SymMat& k, const SymMat& m) {
  auto psd = [&](double l) { return min_eig_psd(k - l * m, 0.0).lambda_min >= 0.0; };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && !psd(lo); ++i) lo *= 2.0;
  for (int i = 0; i < 200 && psd(hi); ++i) hi *= 2.0;
  if (!psd(lo) || psd(hi)) throw NumericalError("gen_eig_sup_bisection: could not bracket");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (psd(mid) ? lo : hi) = mid;
  }
  return lo;
}

double rayleigh_sample_min(const SymMat& k, const SymMat& m, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double best = kInf;
  Vec v(k.n());
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& c : v) c = nd(rng);
    best = std::min(best, k.quad(v) / m.quad(v));
  }
  return best;
}

// ---------------------------------------------------------------------------

PseudoconvexReport pseudoconvex_check(const ScalarFn& f, const Box& domain, std::size_t samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw UsageError("pseudoconvex_check: samples must be >= 1");
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    Vec x(domain.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = std::uniform_real_distribution<double>(domain.lower[j], domain.upper[j])(rng);
    return x;
  };
  PseudoconvexReport r;
  r.worst = -kInf;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec x = draw(), y = draw();
    ++r.pairs;
    if (!(f.value(x) > f.value(y))) continue;
    ++r.ordered_pairs;
    const Vec gx = f.gradient(x);
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d += gx[j] * (y[j] - x[j]);
    r.worst = std::max(r.worst, d);
    if (!(d < 0.0)) {
      if (r.violations == 0) r.example = std::pair{x, y};
      ++r.violations;
    }
  }
  return r;
}

double grasp_analytic_two_finger(double load, double f_max) {
  if (!(load >= 0.0) || !(f_max > 0.0)) throw UsageError("grasp_analytic_two_finger: need load >= 0, f_max > 0");
  return 0.5 * load / f_max;
}

GraspRatioResult grasp_ratio_search(const GraspSpec& g, const GridSpec& grid) {
  grid.validate();
  const GraspElimination e = grasp_equilibrium(g);
  if (grid.lower.size() != e.N.size()) throw UsageError("grid dimension does not match the null space");
  GraspRatioResult out;
  out.best_ratio = kInf;
  const std::size_t total = grid.total();
  for (std::size_t i = 0; i < total; ++i) {
    const Vec z = grid.point(i);
    const Vec x = e.forces(z);
    bool ok = true;
    for (std::size_t c = 0; c < g.contacts.size() && ok; ++c) {
      const auto& b = g.contacts[c].b;
      const double n = b[0] * x[3 * c] + b[1] * x[3 * c + 1] + b[2] * x[3 * c + 2];
      ok = n >= g.eps_n && n <= g.f_max;
    }
    if (!ok) continue;
    const double r = grasp_friction_ratio(g, e, z);
    if (!out.feasible || better(r, z, out.best_ratio, out.best_z)) {
      out.feasible = true;
      out.best_ratio = r;
      out.best_z = z;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

std::optional<GridSpec> fixture_grid(std::string_view id) {
  const ProblemInstance p = catalog_problem(id);
  double step = 0.0;
  if (id == "fractional" || id == "truss-2bar" || id == "grasp-2finger" || id == "grasp-2finger-literal") {
    step = 1e-3;
  } else if (id == "sqrt" || id == "sqrt-relaxed" || id == "norm-quadratic" || id == "strict-concave") {
    step = 1e-2;
  } else if (id == "minimax") {
    step = 5e-3;
  } else {
    return std::nullopt;
  }
  return GridSpec::uniform(*p.x_box, step);
}

std::string fixture_checksum(double y, ConstVec x, const GridSpec& g) {
  std::string s;
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    s += buf;
  };
  put(y);
  for (double v : x) put(v);
  for (const Vec* part : {&g.lower, &g.upper, &g.step})
    for (double v : *part) put(v);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Fixture compute_fixture(std::string_view id) {
  const auto grid = fixture_grid(id);
  if (!grid) throw UsageError("no oracle grid for '" + std::string(id) + "'");
  const GridResult r = grid_search(catalog_problem(id), *grid, 1);
  if (!r.feasible) throw UsageError("oracle grid found no feasible point for '" + std::string(id) + "'");
  Fixture f{r.best_y, r.best_x, *grid, ""};
  f.checksum = fixture_checksum(f.oracle_y, f.oracle_x, f.grid);
  return f;
}

std::string fixtures_to_json(const std::map<std::string, Fixture>& fixtures) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [id, f] : fixtures) {
    doc[id] = {{"oracle_y", f.oracle_y},
               {"oracle_x", f.oracle_x},
               {"grid_spec", {{"lower", f.grid.lower}, {"upper", f.grid.upper}, {"step", f.grid.step}}},
               {"checksum", f.checksum}};
  }
  return doc.dump(2) + "\n";
}

std::map<std::string, Fixture> fixtures_from_json(std::string_view text) {
  std::map<std::string, Fixture> out;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    for (const auto& [id, v] : doc.items()) {
      Fixture f;
      f.oracle_y = v.at("oracle_y").get<double>();
      f.oracle_x = v.at("oracle_x").get<Vec>();
      const auto& g = v.at("grid_spec");
      f.grid = GridSpec{g.at("lower").get<Vec>(), g.at("upper").get<Vec>(), g.at("step").get<Vec>()};
      f.checksum = v.at("checksum").get<std::string>();
      if (f.checksum != fixture_checksum(f.oracle_y, f.oracle_x, f.grid)) {
        throw UsageError("fixture '" + id + "': checksum mismatch");
      }
      out.emplace(id, std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("fixtures file: ") + e.what());
  }
  return out;
}

}  // namespace globalsdp
