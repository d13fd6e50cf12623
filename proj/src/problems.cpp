#include "globalsdp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <json.hpp>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

SymMat diag_unit(std::size_t n, std::size_t i, double v) {
  SymMat s(n);
  s.set(i, i, v);
  return s;
}

/// lower_j - x_j <= 0 and x_j - upper_j <= 0
std::vector<ScalarFn> box_rows(const Box& box) {
  std::vector<ScalarFn> rows;
  const std::size_t m = box.size();
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = box.lower[j], hi = box.upper[j];
    rows.push_back({[j, lo](ConstVec x) { return lo - x[j]; },
                    [j, m](ConstVec) {
                      Vec g(m, 0.0);
                      g[j] = -1.0;
                      return g;
                    }});
    rows.push_back({[j, hi](ConstVec x) { return x[j] - hi; },
                    [j, m](ConstVec) {
                      Vec g(m, 0.0);
                      g[j] = 1.0;
                      return g;
                    }});
  }
  return rows;
}

/// Box vertices (up to 64) followed by seeded uniform samples.
std::vector<Vec> probe_points(const Box& box, std::size_t samples, std::uint64_t seed) {
  const std::size_t m = box.size();
  std::vector<Vec> pts;
  const std::size_t vertices = m <= 6 ? (std::size_t{1} << m) : 0;
  for (std::size_t v = 0; v < vertices; ++v) {
    Vec x(m);
    for (std::size_t j = 0; j < m; ++j) x[j] = ((v >> j) & 1U) ? box.upper[j] : box.lower[j];
    pts.push_back(std::move(x));
  }
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    Vec x(m);
    for (std::size_t j = 0; j < m; ++j)
      x[j] = std::uniform_real_distribution<double>(box.lower[j], box.upper[j])(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

Box make_box(Vec lower, Vec upper) { return Box{std::move(lower), std::move(upper)}; }

std::array<double, 3> cross(const std::array<double, 3>& a, const double* b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const std::array<double, 3>& a, const double* b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar programs

ProblemInstance make_fractional() {
  BilinearAffineForm f;
  f.A0 = SymMat(1);
  f.C0 = SymMat::identity(1);
  f.Aj = {diag_unit(1, 0, -1.0)};
  f.Cj = {diag_unit(1, 0, 1.0)};
  f.B0 = SymMat(1);
  f.Bj = {diag_unit(1, 0, 1.0)};
  return ProblemInstance::make(f.to_fn_pair(), make_box({0.0}, {10.0}), YBracket{-1.0, 2.0},
                               "fractional");
}

ProblemInstance make_sqrt_scalar(SqrtVariant variant) {
  const bool relaxed = variant == SqrtVariant::relaxed;
  const double x_lo = relaxed ? 0.0 : 1.0;
  std::vector<ScalarFnXY> rows{
      {[](ConstVec x, double y) { return y * y - x[0]; }, [](ConstVec, double) { return Vec{-1.0}; },
       [](ConstVec, double y) { return 2.0 * y; }},
      {[](ConstVec, double y) { return y; }, [](ConstVec, double) { return Vec{0.0}; },
       [](ConstVec, double) { return 1.0; }},
  };
  ScalarFn g{[x_lo](ConstVec x) { return x_lo - x[0]; }, [](ConstVec) { return Vec{-1.0}; }};
  auto fn = make_diagonal_pair(1, std::move(rows), ScalarDiagAdapter::from_inequalities(1, {g}));
  return ProblemInstance::make(std::move(fn), make_box({x_lo}, {100.0}),
                               relaxed ? YBracket{-0.5, 11.0} : YBracket{0.5, 11.0},
                               relaxed ? "sqrt-relaxed" : "sqrt");
}

ProblemInstance make_norm_quadratic(const SymMat& q, ScalarFn g, Box x_box, std::string name) {
  const std::size_t m = q.n();
  if (m == 0 || x_box.size() != m) throw ConstructionError("norm-quadratic: Q and x_box sizes differ");
  try {
    chol(q);
  } catch (const NotPositiveDefinite&) {
    throw ConstructionError("norm-quadratic: Q must be positive definite");
  }
  const Vec zero(m, 0.0);
  if (x_box.contains(zero) && g.value(zero) <= 0.0) {
    throw ConstructionError("norm-quadratic: x = 0 is feasible, so the objective is not smooth at the optimum");
  }
  auto qp = std::make_shared<const SymMat>(q);
  std::vector<ScalarFnXY> rows{
      {[qp](ConstVec x, double y) { return y * y - qp->quad(x); },
       [qp](ConstVec x, double) {
         Vec g2 = qp->apply(x);
         for (double& v : g2) v *= -2.0;
         return g2;
       },
       [](ConstVec, double y) { return 2.0 * y; }},
      {[](ConstVec, double y) { return y; }, [m](ConstVec, double) { return Vec(m, 0.0); },
       [](ConstVec, double) { return 1.0; }},
  };
  // x^T Q x <= ||Q||_F ||x||^2 on the box
  double r2 = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    r2 += std::max(x_box.lower[j] * x_box.lower[j], x_box.upper[j] * x_box.upper[j]);
  const double hi = q.frobenius() * r2;
  auto fn = make_diagonal_pair(m, std::move(rows), ScalarDiagAdapter::from_inequalities(m, {g}));
  return ProblemInstance::make(std::move(fn), std::move(x_box), YBracket{-1.0, std::sqrt(hi) + 1.0},
                               std::move(name));
}

// ---------------------------------------------------------------------------
// Minimax

double MinimaxComponent::objective(ConstVec x) const {
  const double v = f.value(x);
  switch (tag) {
    case ComponentTag::plain:
      return v;
    case ComponentTag::log:
      return std::log(v);
    case ComponentTag::ratio:
      return v / g->value(x);
  }
  return v;
}

ProblemInstance make_minimax_epigraph(std::vector<MinimaxComponent> components, Box x_box,
                                      std::vector<ScalarFn> extra, std::string name) {
  if (components.empty()) throw ConstructionError("minimax: no components");
  const std::size_t m = x_box.size();
  if (m == 0) throw ConstructionError("minimax: empty x_box");
  bool has_ratio = false;
  for (const MinimaxComponent& c : components) {
    if (!c.f.value || !c.f.gradient) throw ConstructionError("minimax: component '" + c.name + "' has no f");
    if (c.tag == ComponentTag::ratio) {
      has_ratio = true;
      if (!c.g || !c.g->value || !c.g->gradient)
        throw ConstructionError("minimax: ratio component '" + c.name + "' has no denominator");
    }
  }

  double lo = kInf, hi = -kInf;
  for (const Vec& x : probe_points(x_box, 256, 7)) {
    double fmax = -kInf;
    for (const MinimaxComponent& c : components) {
      if (c.tag != ComponentTag::plain && !(c.f.value(x) > 0.0)) {
        throw ConstructionError("minimax: component '" + c.name + "' needs f > 0 on x_box");
      }
      if (c.tag == ComponentTag::ratio && !(c.g->value(x) > 0.0)) {
        throw ConstructionError("minimax: component '" + c.name + "' needs g > 0 on x_box");
      }
      fmax = std::max(fmax, c.objective(x));
    }
    lo = std::min(lo, fmax);
    hi = std::max(hi, fmax);
  }
  lo -= 1.0;
  if (has_ratio) lo = std::max(lo, 0.0);
  hi += 1.0;

  std::vector<ScalarFnXY> rows;
  for (const MinimaxComponent& c : components) {
    const ScalarFn f = c.f;
    switch (c.tag) {
      case ComponentTag::plain:
        rows.push_back({[f](ConstVec x, double y) { return y - f.value(x); },
                        [f](ConstVec x, double) {
                          Vec d = f.gradient(x);
                          for (double& v : d) v = -v;
                          return d;
                        },
                        [](ConstVec, double) { return 1.0; }});
        break;
      case ComponentTag::log:
        rows.push_back({[f](ConstVec x, double y) { return std::exp(y) - f.value(x); },
                        [f](ConstVec x, double) {
                          Vec d = f.gradient(x);
                          for (double& v : d) v = -v;
                          return d;
                        },
                        [](ConstVec, double y) { return std::exp(y); }});
        break;
      case ComponentTag::ratio: {
        const ScalarFn g = *c.g;
        rows.push_back({[f, g](ConstVec x, double y) { return y * g.value(x) - f.value(x); },
                        [f, g](ConstVec x, double y) {
                          Vec d = f.gradient(x);
                          const Vec dg = g.gradient(x);
                          for (std::size_t j = 0; j < d.size(); ++j) d[j] = y * dg[j] - d[j];
                          return d;
                        },
                        [g](ConstVec x, double) { return g.value(x); }});
        break;
      }
    }
  }
  std::vector<ScalarFn> cons = box_rows(x_box);
  for (ScalarFn& e : extra) cons.push_back(std::move(e));
  auto fn = make_diagonal_pair(m, std::move(rows), ScalarDiagAdapter::from_inequalities(m, cons));
  return ProblemInstance::make(std::move(fn), std::move(x_box), YBracket{lo, hi}, std::move(name));
}

// ---------------------------------------------------------------------------
// Trusses

Vec TrussModel::lengths() const {
  Vec l;
  l.reserve(bars.size());
  for (const auto& [a, b] : bars) {
    l.push_back(std::hypot(nodes[b][0] - nodes[a][0], nodes[b][1] - nodes[a][1]));
  }
  return l;
}

std::vector<std::size_t> TrussModel::free_dofs() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < 2 * nodes.size(); ++d)
    if (std::find(fixed_dofs.begin(), fixed_dofs.end(), d) == fixed_dofs.end()) out.push_back(d);
  return out;
}

void TrussModel::validate() const {
  if (nodes.empty() || bars.empty()) throw ConstructionError("truss: needs nodes and bars");
  for (std::size_t j = 0; j < bars.size(); ++j) {
    const auto [a, b] = bars[j];
    if (a >= nodes.size() || b >= nodes.size())
      throw ConstructionError("truss: bar " + std::to_string(j) + " references a missing node");
    if (a == b) throw ConstructionError("truss: bar " + std::to_string(j) + " connects a node to itself");
  }
  const Vec l = lengths();
  for (std::size_t j = 0; j < l.size(); ++j)
    if (!(l[j] > 0.0)) throw ConstructionError("truss: bar " + std::to_string(j) + " has zero length");
  for (std::size_t d : fixed_dofs)
    if (d >= 2 * nodes.size()) throw ConstructionError("truss: fixed dof " + std::to_string(d) + " out of range");
  if (free_dofs().empty()) throw ConstructionError("truss: all dofs are fixed");
  if (!node_mass.empty() && node_mass.size() != nodes.size())
    throw ConstructionError("truss: node_mass needs one entry per node");
  for (double v : node_mass)
    if (!(v >= 0.0)) throw ConstructionError("truss: node masses must be >= 0");
  if (!(young_modulus > 0.0) || !(density > 0.0)) throw ConstructionError("truss: E and rho must be > 0");
  if (!(x_min > 0.0)) throw ConstructionError("truss: x_min must be > 0");
  double total = 0.0;
  for (double v : l) total += v;
  if (!(V0 >= x_min * total)) {
    throw ConstructionError("truss: V0 < x_min * sum(l); the volume constraint cannot be met");
  }
}

SymMat TrussMatrices::stiffness(ConstVec x) const {
  SymMat out(free_dofs.size());
  for (std::size_t j = 0; j < K.size(); ++j) out.axpy(x[j], K[j]);
  return out;
}

SymMat TrussMatrices::mass(ConstVec x) const {
  SymMat out = M0;
  for (std::size_t j = 0; j < M.size(); ++j) out.axpy(x[j], M[j]);
  return out;
}

TrussMatrices assemble_truss_matrices(const TrussModel& t) {
  t.validate();
  TrussMatrices out;
  out.free_dofs = t.free_dofs();
  const std::size_t n = out.free_dofs.size();
  std::vector<long> slot(2 * t.nodes.size(), -1);
  for (std::size_t k = 0; k < n; ++k) slot[out.free_dofs[k]] = static_cast<long>(k);

  const Vec l = t.lengths();
  for (std::size_t j = 0; j < t.bars.size(); ++j) {
    const auto [a, b] = t.bars[j];
    const double c = (t.nodes[b][0] - t.nodes[a][0]) / l[j];
    const double s = (t.nodes[b][1] - t.nodes[a][1]) / l[j];
    const std::array<std::size_t, 4> dofs{2 * a, 2 * a + 1, 2 * b, 2 * b + 1};
    const std::array<double, 4> dir{-c, -s, c, s};
    Vec d(n, 0.0);
    SymMat mj(n);
    for (int k = 0; k < 4; ++k) {
      if (slot[dofs[k]] < 0) continue;
      d[slot[dofs[k]]] = dir[k];
      mj.set(slot[dofs[k]], slot[dofs[k]], 0.5 * t.density * l[j]);
    }
    out.K.push_back((t.young_modulus / l[j]) * SymMat::outer(d));
    out.M.push_back(std::move(mj));
  }
  out.M0 = SymMat(n);
  if (!t.node_mass.empty()) {
    for (std::size_t k = 0; k < n; ++k) out.M0.set(k, k, t.node_mass[out.free_dofs[k] / 2]);
  }
  return out;
}

ProblemInstance make_truss_problem(const TrussModel& t, std::string name) {
  TrussMatrices tm = assemble_truss_matrices(t);
  const std::size_t m = t.bars.size(), n = tm.free_dofs.size();
  const Vec l = t.lengths();
  double total = 0.0;
  for (double v : l) total += v;

  BilinearAffineForm f;
  f.A0 = SymMat(n);
  f.Aj = tm.K;
  f.C0 = tm.M0;
  f.Cj = tm.M;
  f.B0 = SymMat(m + 1);
  for (std::size_t j = 0; j < m; ++j) f.B0.set(j, j, -t.x_min);
  f.B0.set(m, m, t.V0);
  for (std::size_t j = 0; j < m; ++j) {
    SymMat bj(m + 1);
    bj.set(j, j, 1.0);
    bj.set(m, m, -l[j]);
    f.Bj.push_back(std::move(bj));
  }

  Box box{Vec(m, t.x_min), Vec(m)};
  for (std::size_t j = 0; j < m; ++j) box.upper[j] = (t.V0 - t.x_min * (total - l[j])) / l[j];

  // lambda_min(K, M) <= K_ii / M_ii <= max_j K_j,ii / M_j,ii for every i.
  double bound = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double worst = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (tm.M[j](i, i) > 0.0) {
        worst = std::max(worst, tm.K[j](i, i) / tm.M[j](i, i));
        any = true;
      }
    }
    if (any) bound = std::min(bound, worst);
  }
  if (!std::isfinite(bound) || bound <= 0.0) bound = 1.0;
  return ProblemInstance::make(f.to_fn_pair(), std::move(box), YBracket{-1.5 * bound, 0.0},
                               std::move(name));
}

TrussModel truss_2bar_model() {
  TrussModel t;
  t.nodes = {{0.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}};
  t.bars = {{0, 2}, {1, 2}};
  t.node_mass = {0.0, 0.0, 1.0};
  t.fixed_dofs = {0, 1, 2, 3};
  t.x_min = 0.1;
  t.V0 = std::sqrt(2.0);
  return t;
}

TrussModel truss_10bar_model() {
  TrussModel t;
  t.nodes = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}, {2.0, 1.0}};
  t.bars = {{0, 2}, {2, 4}, {1, 3}, {3, 5}, {2, 3}, {4, 5}, {0, 3}, {1, 2}, {2, 5}, {3, 4}};
  t.node_mass = {0.0, 0.0, 0.0, 0.0, 1.0, 1.0};
  t.fixed_dofs = {0, 1, 2, 3};
  t.x_min = 0.05;
  t.V0 = 5.0;
  return t;
}

// ---------------------------------------------------------------------------
// Grasping

void GraspSpec::validate() const {
  if (contacts.size() < 2) throw ConstructionError("grasp: at least 2 contacts are required");
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto& b = contacts[i].b;
    const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    if (std::abs(nb - 1.0) > 1e-12)
      throw ConstructionError("grasp: normal of contact " + std::to_string(i) + " is not a unit vector");
  }
  if (!(f_max > 0.0)) throw ConstructionError("grasp: f_max must be > 0");
  if (!(eps_n > 0.0) || eps_n >= f_max) throw ConstructionError("grasp: need 0 < eps_n < f_max");
}

Vec GraspElimination::forces(ConstVec z) const {
  Vec x = x_p;
  for (std::size_t k = 0; k < N.size(); ++k)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += z[k] * N[k][i];
  return x;
}

namespace {

// Rows 0..2: force balance; rows 3..5: moment balance.
std::vector<Vec> equilibrium_rows(const GraspSpec& g) {
  const std::size_t dim = 3 * g.contacts.size();
  std::vector<Vec> rows(6, Vec(dim, 0.0));
  for (std::size_t i = 0; i < g.contacts.size(); ++i) {
    const auto& p = g.contacts[i].p;
    for (int r = 0; r < 3; ++r) rows[r][3 * i + r] = 1.0;
    // p x e_c for unit vectors e_c
    for (int c = 0; c < 3; ++c) {
      double e[3] = {0.0, 0.0, 0.0};
      e[c] = 1.0;
      const auto pc = cross(p, e);
      for (int r = 0; r < 3; ++r) rows[3 + r][3 * i + c] = pc[r];
    }
  }
  return rows;
}

}  // namespace

double equilibrium_residual(const GraspSpec& g, ConstVec forces) {
  const std::vector<Vec> rows = equilibrium_rows(g);
  double rf = 0.0, rt = 0.0;
  for (int r = 0; r < 6; ++r) {
    double v = 0.0;
    for (std::size_t k = 0; k < forces.size(); ++k) v += rows[r][k] * forces[k];
    v += r < 3 ? g.f_ext[r] : g.T_ext[r - 3];
    (r < 3 ? rf : rt) += v * v;
  }
  return std::sqrt(rf) + std::sqrt(rt);
}

GraspElimination grasp_equilibrium(const GraspSpec& g) {
  g.validate();
  const std::vector<Vec> rows = equilibrium_rows(g);
  const std::size_t dim = 3 * g.contacts.size();
  Vec rhs(6);
  for (int r = 0; r < 3; ++r) {
    rhs[r] = -g.f_ext[r];
    rhs[3 + r] = -g.T_ext[r];
  }
  SymMat ete(dim);
  Vec etr(dim, 0.0);
  for (const Vec& row : rows)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b <= a; ++b) ete.add(a, b, row[a] * row[b]);
  for (int r = 0; r < 6; ++r)
    for (std::size_t a = 0; a < dim; ++a) etr[a] += rows[r][a] * rhs[r];

  const SpectralDecomp d = eigh(ete);
  const double tol = 1e-10 * std::max(1.0, d.eigenvalues.back());
  GraspElimination out;
  out.x_p.assign(dim, 0.0);
  for (std::size_t k = 0; k < d.n(); ++k) {
    const Vec& q = d.eigenvectors[k];
    if (d.eigenvalues[k] <= tol) {
      out.N.push_back(q);
      continue;
    }
    ++out.rank;
    double c = 0.0;
    for (std::size_t a = 0; a < dim; ++a) c += q[a] * etr[a];
    c /= d.eigenvalues[k];
    for (std::size_t a = 0; a < dim; ++a) out.x_p[a] += c * q[a];
  }
  out.rank_deficient = out.rank < 6;
  double scale = 0.0;
  for (double v : rhs) scale = std::max(scale, std::abs(v));
  if (equilibrium_residual(g, out.x_p) > 1e-9 * std::max(1.0, scale)) {
    throw ConstructionError("grasp: equilibrium equations are inconsistent for this load");
  }
  return out;
}

double grasp_friction_ratio(const GraspSpec& g, const GraspElimination& e, ConstVec z) {
  const Vec x = e.forces(z);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.contacts.size(); ++i) {
    const auto& b = g.contacts[i].b;
    const double* xi = &x[3 * i];
    const double n = dot3(b, xi);
    if (!(n > 0.0)) return kInf;
    double t2 = 0.0;
    for (int r = 0; r < 3; ++r) {
      const double t = xi[r] - n * b[r];
      t2 += t * t;
    }
    worst = std::max(worst, std::sqrt(t2) / n);
  }
  return worst;
}

ProblemInstance make_grasp_problem(const GraspSpec& g, std::string name) {
  const GraspElimination e = grasp_equilibrium(g);
  const std::size_t k = e.N.size(), nc = g.contacts.size();
  if (k == 0) throw ConstructionError("grasp: equilibrium fixes all contact forces; nothing to optimize");
  const bool sym = g.form == GraspLmiForm::symmetric;

  BilinearAffineForm f;
  f.A0 = SymMat(4 * nc);
  f.C0 = SymMat(4 * nc);
  f.Aj.assign(k, SymMat(4 * nc));
  f.Cj.assign(k, SymMat(4 * nc));
  f.B0 = SymMat(2 * nc);
  f.Bj.assign(k, SymMat(2 * nc));

  // Writes the contact-i block of a force vector v (x_p or a null vector)
  // into the A and C coefficients; `with_load` adds the B offsets of x_p.
  auto fill = [&](const Vec& v, SymMat& a, SymMat& c, SymMat& b, bool with_load) {
    for (std::size_t i = 0; i < nc; ++i) {
      const auto& bi = g.contacts[i].b;
      const double* xi = &v[3 * i];
      const double n = dot3(bi, xi);
      const std::size_t o = 4 * i;
      for (int r = 0; r < 3; ++r) {
        a.set(o + 3, o + r, xi[r] - n * bi[r]);
        c.set(o + r, o + r, n);
      }
      if (sym) {
        c.set(o + 3, o + 3, n);
      } else {
        a.set(o + 3, o + 3, n);
      }
      b.set(2 * i, 2 * i, (with_load ? g.f_max : 0.0) - n);
      b.set(2 * i + 1, 2 * i + 1, n - (with_load ? g.eps_n : 0.0));
    }
  };
  fill(e.x_p, f.A0, f.C0, f.B0, true);
  for (std::size_t j = 0; j < k; ++j) fill(e.N[j], f.Aj[j], f.Cj[j], f.Bj[j], false);

  double xp_norm = 0.0;
  for (double v : e.x_p) xp_norm += v * v;
  const double r = 4.0 * (g.f_max * static_cast<double>(nc) + std::sqrt(xp_norm) + 1.0);
  return ProblemInstance::make(f.to_fn_pair(), Box{Vec(k, -r), Vec(k, r)}, YBracket{-1.0, 10.0},
                               std::move(name));
}

GraspSpec grasp_two_finger_spec(double load, double f_max, double a) {
  GraspSpec g;
  g.contacts = {{{-a, 0.0, 0.0}, {1.0, 0.0, 0.0}}, {{a, 0.0, 0.0}, {-1.0, 0.0, 0.0}}};
  g.f_ext = {0.0, 0.0, -load};
  g.T_ext = {0.0, 0.0, 0.0};
  g.f_max = f_max;
  return g;
}

// ---------------------------------------------------------------------------

ProblemInstance make_strictly_concave_variant() {
  std::vector<ScalarFnXY> rows{
      {[](ConstVec x, double y) { return y - x[0] * x[0] - x[1] * x[1] + 2.0 * x[0]; },
       [](ConstVec x, double) { return Vec{2.0 - 2.0 * x[0], -2.0 * x[1]}; },
       [](ConstVec, double) { return 1.0; }},
  };
  Box box{{-2.0, -2.0}, {2.0, 2.0}};
  auto fn = make_diagonal_pair(2, std::move(rows), ScalarDiagAdapter::from_inequalities(2, box_rows(box)));
  return ProblemInstance::make(std::move(fn), std::move(box), YBracket{-2.0, 13.0}, "strict-concave");
}

namespace {

ProblemInstance catalog_norm_quadratic() {
  const double q[2] = {4.0, 1.0};
  ScalarFn g{[](ConstVec x) { return 1.0 - x[0]; }, [](ConstVec) { return Vec{-1.0, 0.0}; }};
  return make_norm_quadratic(SymMat::diagonal(q), std::move(g), Box{{-3.0, -3.0}, {3.0, 3.0}});
}

ProblemInstance catalog_minimax() {
  std::vector<MinimaxComponent> c;
  c.push_back({ComponentTag::plain, "distance",
               {[](ConstVec x) { return (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0); },
                [](ConstVec x) { return Vec{2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)}; }},
               std::nullopt});
  c.push_back({ComponentTag::ratio, "ratio",
               {[](ConstVec x) { return x[0] * x[0] + 1.0; }, [](ConstVec x) { return Vec{2.0 * x[0], 0.0}; }},
               ScalarFn{[](ConstVec x) { return x[1]; }, [](ConstVec) { return Vec{0.0, 1.0}; }}});
  c.push_back({ComponentTag::log, "log",
               {[](ConstVec x) { return std::exp(x[0] - x[1]); },
                [](ConstVec x) {
                  const double v = std::exp(x[0] - x[1]);
                  return Vec{v, -v};
                }},
               std::nullopt});
  return make_minimax_epigraph(std::move(c), Box{{0.5, 0.5}, {3.0, 3.0}});
}

struct CatalogEntry {
  const char* id;
  const char* description;
  ProblemInstance (*build)();
};

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries{
      {"fractional", "y(x+1) - x >= 0, x >= 0 on [0, 10]; min x/(x+1), optimum 0 at x = 0",
       make_fractional},
      {"sqrt", "diag(y^2 - x, y) >= 0, x >= 1 on [1, 100]; min sqrt(x), optimum 1 at x = 1",
       [] { return make_sqrt_scalar(SqrtVariant::standard); }},
      {"sqrt-relaxed", "sqrt with x >= 0 on [0, 100]; dA/dy is singular at the optimum",
       [] { return make_sqrt_scalar(SqrtVariant::relaxed); }},
      {"norm-quadratic", "min sqrt(x^T Q x), Q = diag(4, 1), x1 >= 1 on [-3, 3]^2; optimum 2",
       catalog_norm_quadratic},
      {"minimax", "max of a plain, a ratio and a log component on [0.5, 3]^2", catalog_minimax},
      {"truss-2bar", "two-bar truss, maximize the fundamental eigenvalue (y = -lambda)",
       [] { return make_truss_problem(truss_2bar_model(), "truss-2bar"); }},
      {"truss-10bar", "two-bay ten-bar cantilever, maximize the fundamental eigenvalue",
       [] { return make_truss_problem(truss_10bar_model(), "truss-10bar"); }},
      {"grasp-2finger", "two opposing fingers, unit vertical load, f_max = 10; min friction coefficient",
       [] { return make_grasp_problem(grasp_two_finger_spec(), "grasp-2finger"); }},
      {"grasp-2finger-literal", "grasp-2finger with the lower-right block n instead of y n",
       [] {
         GraspSpec g = grasp_two_finger_spec();
         g.form = GraspLmiForm::literal;
         return make_grasp_problem(g, "grasp-2finger-literal");
       }},
      {"strict-concave", "y - x1^2 - x2^2 + 2 x1 >= 0 on [-2, 2]^2; unique optimum -1 at (1, 0)",
       make_strictly_concave_variant},
  };
  return entries;
}

const CatalogEntry& find_entry(std::string_view id) {
  for (const CatalogEntry& e : catalog())
    if (id == e.id) return e;
  std::string known;
  for (const CatalogEntry& e : catalog()) known += (known.empty() ? "" : ", ") + std::string(e.id);
  throw UsageError("unknown catalog id '" + std::string(id) + "' (known: " + known + ")");
}

}  // namespace

const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const CatalogEntry& e : catalog()) out.emplace_back(e.id);
    return out;
  }();
  return ids;
}

ProblemInstance catalog_problem(std::string_view id) { return find_entry(id).build(); }

std::string catalog_description(std::string_view id) { return find_entry(id).description; }

// ---------------------------------------------------------------------------
// File formats

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw UsageError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw UsageError("field '" + path + "': " + what);
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) bad_field(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad_field(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_field(path, "not finite");
  return d;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad_field(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

Vec numbers(const json& v, const std::string& path, std::size_t expected = 0) {
  if (!v.is_array()) bad_field(path, "expected an array of numbers");
  if (expected > 0 && v.size() != expected)
    bad_field(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  Vec out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::array<double, 3> vec3(const json& v, const std::string& path) {
  const Vec a = numbers(v, path, 3);
  return {a[0], a[1], a[2]};
}

const json& array_field(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_array()) bad_field(join(path, key), "expected an array");
  return v;
}

/// Rows of the lower triangle (row i has i + 1 entries) or full square rows.
SymMat lower_matrix(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array() || v.size() != n) bad_field(path, "expected " + std::to_string(n) + " rows");
  SymMat out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || (v[i].size() != i + 1 && v[i].size() != n))
      bad_field(rp, "expected " + std::to_string(i + 1) + " (lower triangle) or " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j <= i; ++j) out.set(i, j, number(v[i][j], rp + "[" + std::to_string(j) + "]"));
  }
  return out;
}

std::vector<SymMat> matrix_list(const json& obj, const char* key, std::size_t m, std::size_t n) {
  const json& v = array_field(obj, "", key);
  if (v.size() != m) bad_field(key, "expected m = " + std::to_string(m) + " matrices");
  std::vector<SymMat> out;
  for (std::size_t j = 0; j < m; ++j) out.push_back(lower_matrix(v[j], n, std::string(key) + "[" + std::to_string(j) + "]"));
  return out;
}

std::optional<Box> read_box(const json& doc, std::size_t m) {
  auto it = doc.find("x_box");
  if (it == doc.end()) return std::nullopt;
  Box b{numbers(require(*it, "x_box", "lower"), "x_box.lower", m),
        numbers(require(*it, "x_box", "upper"), "x_box.upper", m)};
  for (std::size_t j = 0; j < m; ++j)
    if (b.lower[j] > b.upper[j]) bad_field("x_box", "lower > upper at index " + std::to_string(j));
  return b;
}

std::optional<YBracket> read_hint(const json& doc) {
  auto it = doc.find("y_hint");
  if (it == doc.end()) return std::nullopt;
  const Vec h = numbers(*it, "y_hint", 2);
  if (!(h[0] < h[1])) bad_field("y_hint", "need lo < hi");
  return YBracket{h[0], h[1]};
}

std::string read_name(const json& doc, const char* fallback) {
  auto it = doc.find("name");
  if (it == doc.end()) return fallback;
  if (!it->is_string()) bad_field("name", "expected a string");
  return it->get<std::string>();
}

template <class F>
auto constructing(F&& f) {
  try {
    return f();
  } catch (const ConstructionError& e) {
    throw UsageError(e.what());
  }
}

TrussModel truss_from(const json& doc) {
  TrussModel t;
  const json& nodes = array_field(doc, "", "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec p = numbers(nodes[i], "nodes[" + std::to_string(i) + "]", 2);
    t.nodes.push_back({p[0], p[1]});
  }
  const json& bars = array_field(doc, "", "bars");
  for (std::size_t j = 0; j < bars.size(); ++j) {
    const std::string path = "bars[" + std::to_string(j) + "]";
    if (!bars[j].is_array() || bars[j].size() != 2) bad_field(path, "expected a pair of node indices");
    t.bars.emplace_back(count(bars[j][0], path + "[0]"), count(bars[j][1], path + "[1]"));
  }
  t.young_modulus = number(require(doc, "", "E"), "E");
  t.density = number(require(doc, "", "rho"), "rho");
  if (doc.contains("node_mass")) t.node_mass = numbers(doc["node_mass"], "node_mass", t.nodes.size());
  const json& fixed = array_field(doc, "", "fixed_dofs");
  for (std::size_t i = 0; i < fixed.size(); ++i)
    t.fixed_dofs.push_back(count(fixed[i], "fixed_dofs[" + std::to_string(i) + "]"));
  t.x_min = number(require(doc, "", "x_min"), "x_min");
  t.V0 = number(require(doc, "", "V0"), "V0");
  constructing([&] {
    t.validate();
    return 0;
  });
  return t;
}

GraspSpec grasp_from(const json& doc) {
  GraspSpec g;
  const json& contacts = array_field(doc, "", "contacts");
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const std::string path = "contacts[" + std::to_string(i) + "]";
    g.contacts.push_back({vec3(require(contacts[i], path, "p"), path + ".p"),
                          vec3(require(contacts[i], path, "b"), path + ".b")});
  }
  g.f_ext = vec3(require(doc, "", "f_ext"), "f_ext");
  g.T_ext = vec3(require(doc, "", "T_ext"), "T_ext");
  g.f_max = number(require(doc, "", "f_max"), "f_max");
  if (doc.contains("eps_n")) g.eps_n = number(doc["eps_n"], "eps_n");
  if (doc.contains("form")) {
    const json& f = doc["form"];
    if (f == "symmetric") {
      g.form = GraspLmiForm::symmetric;
    } else if (f == "literal") {
      g.form = GraspLmiForm::literal;
    } else {
      bad_field("form", "expected \"symmetric\" or \"literal\"");
    }
  }
  constructing([&] {
    g.validate();
    return 0;
  });
  return g;
}

ProblemInstance bilinear_from(const json& doc) {
  const std::size_t m = count(require(doc, "", "m"), "m");
  const std::size_t na = count(require(doc, "", "nA"), "nA");
  const std::size_t nb = count(require(doc, "", "nB"), "nB");
  if (m == 0 || na == 0 || nb == 0) bad_field("m", "m, nA and nB must be >= 1");
  BilinearAffineForm f;
  f.A0 = lower_matrix(require(doc, "", "A0"), na, "A0");
  f.C0 = lower_matrix(require(doc, "", "C0"), na, "C0");
  f.Aj = matrix_list(doc, "Aj", m, na);
  f.Cj = matrix_list(doc, "Cj", m, na);
  f.B0 = lower_matrix(require(doc, "", "B0"), nb, "B0");
  f.Bj = matrix_list(doc, "Bj", m, nb);
  auto box = read_box(doc, m);
  auto hint = read_hint(doc);
  return constructing([&] { return ProblemInstance::make(f.to_fn_pair(), box, hint, read_name(doc, "bilinear")); });
}

}  // namespace

TrussModel parse_truss(std::string_view text) { return truss_from(parse_json(text)); }

GraspSpec parse_grasp(std::string_view text) { return grasp_from(parse_json(text)); }

ProblemInstance parse_bilinear(std::string_view text) { return bilinear_from(parse_json(text)); }

ProblemInstance parse_problem_file(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw UsageError("line 1, column 1: expected a JSON object");
  std::string kind = "bilinear";
  if (auto it = doc.find("kind"); it != doc.end()) {
    if (!it->is_string()) bad_field("kind", "expected a string");
    kind = it->get<std::string>();
  }
  if (kind == "truss") {
    const TrussModel t = truss_from(doc);
    return constructing([&] { return make_truss_problem(t, read_name(doc, "truss")); });
  }
  if (kind == "grasp") {
    const GraspSpec g = grasp_from(doc);
    return constructing([&] { return make_grasp_problem(g, read_name(doc, "grasp")); });
  }
  if (kind == "bilinear") return bilinear_from(doc);
  bad_field("kind", "expected \"bilinear\", \"truss\" or \"grasp\"");
}

}  // namespace globalsdp
