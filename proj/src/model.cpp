#include "globalsdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

void require_finite(const SymMat& a, std::size_t n, const char* what) {
  if (a.n() != n) {
    throw EvaluationError(std::string(what) + " returned a " + std::to_string(a.n()) + "x" +
                          std::to_string(a.n()) + " matrix, expected " + std::to_string(n));
  }
  if (!a.all_finite()) throw EvaluationError(std::string(what) + " returned non-finite entries");
}

void require_finite_list(const std::vector<SymMat>& list, std::size_t m, std::size_t n,
                         const char* what) {
  if (list.size() != m) {
    throw EvaluationError(std::string(what) + " returned " + std::to_string(list.size()) +
                          " matrices, expected " + std::to_string(m));
  }
  for (const SymMat& a : list) require_finite(a, n, what);
}

void require_x(const ProblemInstance& p, ConstVec x, double y) {
  if (x.size() != p.m()) {
    throw UsageError("x has length " + std::to_string(x.size()) + ", problem has m = " +
                     std::to_string(p.m()));
  }
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }) ||
      !std::isfinite(y)) {
    throw UsageError("x and y must be finite");
  }
  if (p.x_box && !p.x_box->contains(x, 1e-9)) throw UsageError("x lies outside x_box");
}

double rel_scale(const SymMat& a) { return std::max(1.0, a.max_abs()); }

Vec uniform_in(const Box& box, std::mt19937_64& rng) {
  Vec x(box.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::uniform_real_distribution<double> d(box.lower[j], box.upper[j]);
    x[j] = d(rng);
  }
  return x;
}

double uniform(double lo, double hi, std::mt19937_64& rng) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// BilinearAffineForm

void BilinearAffineForm::validate() const {
  const std::size_t m = Aj.size();
  if (A0.empty() || C0.empty() || B0.empty()) throw ConstructionError("empty coefficient matrix");
  if (Cj.size() != m || Bj.size() != m) {
    throw ConstructionError("Aj, Cj and Bj must all have m entries");
  }
  const std::size_t na = A0.n(), nb = B0.n();
  if (C0.n() != na) throw ConstructionError("C0 must match A0's dimension");
  for (std::size_t j = 0; j < m; ++j) {
    if (Aj[j].n() != na || Cj[j].n() != na) throw ConstructionError("Aj/Cj dimension mismatch");
    if (Bj[j].n() != nb) throw ConstructionError("Bj dimension mismatch");
  }
  auto finite = [](const SymMat& a) { return a.all_finite(); };
  if (!finite(A0) || !finite(C0) || !finite(B0) || !std::all_of(Aj.begin(), Aj.end(), finite) ||
      !std::all_of(Cj.begin(), Cj.end(), finite) || !std::all_of(Bj.begin(), Bj.end(), finite)) {
    throw ConstructionError("non-finite coefficient");
  }
}

SymMat BilinearAffineForm::eval_A(ConstVec x, double y) const {
  SymMat out = A0;
  for (std::size_t j = 0; j < Aj.size(); ++j) out.axpy(x[j], Aj[j]);
  return out.axpy(y, dA_dy(x));
}

SymMat BilinearAffineForm::dA_dy(ConstVec x) const {
  SymMat out = C0;
  for (std::size_t j = 0; j < Cj.size(); ++j) out.axpy(x[j], Cj[j]);
  return out;
}

SymMat BilinearAffineForm::eval_B(ConstVec x) const {
  SymMat out = B0;
  for (std::size_t j = 0; j < Bj.size(); ++j) out.axpy(x[j], Bj[j]);
  return out;
}

MatFnPair BilinearAffineForm::to_fn_pair() const {
  validate();
  auto self = std::make_shared<const BilinearAffineForm>(*this);
  MatFnPair f;
  f.m = m();
  f.n_A = A0.n();
  f.n_B = B0.n();
  f.eval_A = [self](ConstVec x, double y) { return self->eval_A(x, y); };
  f.grad_x_A = [self](ConstVec, double y) {
    std::vector<SymMat> g;
    g.reserve(self->m());
    for (std::size_t j = 0; j < self->m(); ++j) {
      SymMat gj = self->Aj[j];
      g.push_back(gj.axpy(y, self->Cj[j]));
    }
    return g;
  };
  f.dA_dy = [self](ConstVec x, double) { return self->dA_dy(x); };
  f.eval_B = [self](ConstVec x) { return self->eval_B(x); };
  f.grad_x_B = [self](ConstVec) { return self->Bj; };
  return f;
}

// ---------------------------------------------------------------------------
// Diagonal adapters

ScalarDiagAdapter ScalarDiagAdapter::from_inequalities(std::size_t m,
                                                       const std::vector<ScalarFn>& g) {
  ScalarDiagAdapter out;
  out.m = m;
  for (const ScalarFn& gi : g) {
    out.entries.push_back(
        {[gi](ConstVec x) { return -gi.value(x); },
         [gi](ConstVec x) {
           Vec d = gi.gradient(x);
           for (double& v : d) v = -v;
           return d;
         }});
  }
  return out;
}

SymMat ScalarDiagAdapter::eval(ConstVec x) const {
  Vec d(entries.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = entries[i].value(x);
  return SymMat::diagonal(d);
}

std::vector<SymMat> ScalarDiagAdapter::gradient(ConstVec x) const {
  std::vector<SymMat> g(m, SymMat(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Vec gi = entries[i].gradient(x);
    if (gi.size() != m) throw EvaluationError("diagonal entry gradient has wrong length");
    for (std::size_t j = 0; j < m; ++j) g[j].set(i, i, gi[j]);
  }
  return g;
}

MatFnPair make_diagonal_pair(std::size_t m, std::vector<ScalarFnXY> a_rows, ScalarDiagAdapter b) {
  if (a_rows.empty() || b.entries.empty()) {
    throw ConstructionError("diagonal pair needs at least one A row and one B row");
  }
  b.m = m;
  auto rows = std::make_shared<const std::vector<ScalarFnXY>>(std::move(a_rows));
  auto badapt = std::make_shared<const ScalarDiagAdapter>(std::move(b));
  MatFnPair f;
  f.m = m;
  f.n_A = rows->size();
  f.n_B = badapt->q();
  f.eval_A = [rows](ConstVec x, double y) {
    Vec d(rows->size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*rows)[i].value(x, y);
    return SymMat::diagonal(d);
  };
  f.grad_x_A = [rows, m](ConstVec x, double y) {
    std::vector<SymMat> g(m, SymMat(rows->size()));
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const Vec gi = (*rows)[i].grad_x(x, y);
      if (gi.size() != m) throw EvaluationError("grad_x_A row gradient has wrong length");
      for (std::size_t j = 0; j < m; ++j) g[j].set(i, i, gi[j]);
    }
    return g;
  };
  f.dA_dy = [rows](ConstVec x, double y) {
    Vec d(rows->size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*rows)[i].d_dy(x, y);
    return SymMat::diagonal(d);
  };
  f.eval_B = [badapt](ConstVec x) { return badapt->eval(x); };
  f.grad_x_B = [badapt](ConstVec x) { return badapt->gradient(x); };
  return f;
}

MatFnPair from_convex_program(std::size_t m, ScalarFn f, const std::vector<ScalarFn>& g) {
  ScalarFnXY row{[f](ConstVec x, double y) { return y - f.value(x); },
                 [f](ConstVec x, double) {
                   Vec d = f.gradient(x);
                   for (double& v : d) v = -v;
                   return d;
                 },
                 [](ConstVec, double) { return 1.0; }};
  return make_diagonal_pair(m, {row}, ScalarDiagAdapter::from_inequalities(m, g));
}

// ---------------------------------------------------------------------------
// Box / ProblemInstance

bool Box::contains(ConstVec x, double tol) const {
  if (x.size() != size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double slack = tol * std::max(1.0, std::abs(x[j]));
    if (x[j] < lower[j] - slack || x[j] > upper[j] + slack) return false;
  }
  return true;
}

Vec Box::clamp(ConstVec x) const {
  Vec out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::clamp(out[j], lower[j], upper[j]);
  return out;
}

Vec Box::center() const {
  Vec c(size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (lower[j] + upper[j]);
  return c;
}

ProblemInstance ProblemInstance::make(MatFnPair fn, std::optional<Box> x_box,
                                      std::optional<YBracket> y_hint, std::string name) {
  if (fn.m == 0) throw ConstructionError("problem needs m >= 1");
  if (fn.n_A == 0 || fn.n_B == 0) throw ConstructionError("constraint dimensions must be >= 1");
  if (!fn.eval_A || !fn.grad_x_A || !fn.dA_dy || !fn.eval_B || !fn.grad_x_B) {
    throw ConstructionError("all five constraint maps must be set");
  }
  if (x_box) {
    if (x_box->lower.size() != fn.m || x_box->upper.size() != fn.m) {
      throw ConstructionError("x_box must have m lower and m upper bounds");
    }
    for (std::size_t j = 0; j < fn.m; ++j) {
      if (!(x_box->lower[j] <= x_box->upper[j])) {
        throw ConstructionError("x_box lower bound exceeds upper bound at coordinate " +
                                std::to_string(j));
      }
    }
  }
  if (y_hint && !(y_hint->lo < y_hint->hi)) throw ConstructionError("y_hint requires lo < hi");
  return ProblemInstance{std::move(fn), std::move(x_box), y_hint, std::move(name)};
}

// ---------------------------------------------------------------------------
// Evaluation

SymMat checked_A(const MatFnPair& f, ConstVec x, double y) {
  SymMat a = f.eval_A(x, y);
  require_finite(a, f.n_A, "eval_A");
  return a;
}

SymMat checked_B(const MatFnPair& f, ConstVec x) {
  SymMat b = f.eval_B(x);
  require_finite(b, f.n_B, "eval_B");
  return b;
}

ConstraintValues eval_constraints(const ProblemInstance& p, ConstVec x, double y, double tol) {
  require_x(p, x, y);
  SymMat a = checked_A(p.fn, x, y);
  SymMat b = checked_B(p.fn, x);
  const double la = min_eig_psd(a).lambda_min;
  const double lb = min_eig_psd(b).lambda_min;
  const double margin = std::min(la, lb);
  return {std::move(a), std::move(b), la, lb, margin, margin >= -tol};
}

GradientBundle eval_gradients(const ProblemInstance& p, ConstVec x, double y) {
  require_x(p, x, y);
  GradientBundle g{p.fn.grad_x_A(x, y), p.fn.dA_dy(x, y), p.fn.grad_x_B(x)};
  require_finite_list(g.grad_A, p.m(), p.fn.n_A, "grad_x_A");
  require_finite(g.dA_dy, p.fn.n_A, "dA_dy");
  require_finite_list(g.grad_B, p.m(), p.fn.n_B, "grad_x_B");
  return g;
}

double DerivativeCheck::worst() const noexcept {
  return std::max({grad_A_error, dA_dy_error, grad_B_error});
}

DerivativeCheck check_derivatives(const ProblemInstance& p, ConstVec x, double y, double h) {
  const GradientBundle g = eval_gradients(p, x, y);
  auto rel_err = [](const SymMat& fd, const SymMat& declared) {
    return (fd - declared).max_abs() / rel_scale(declared);
  };
  DerivativeCheck out;
  Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t j = 0; j < p.m(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    SymMat fd_a = (1.0 / (2.0 * step)) * (checked_A(p.fn, xp, y) - checked_A(p.fn, xm, y));
    SymMat fd_b = (1.0 / (2.0 * step)) * (checked_B(p.fn, xp) - checked_B(p.fn, xm));
    out.grad_A_error = std::max(out.grad_A_error, rel_err(fd_a, g.grad_A[j]));
    out.grad_B_error = std::max(out.grad_B_error, rel_err(fd_b, g.grad_B[j]));
    xp[j] = xm[j] = x[j];
  }
  const double step = h * std::max(1.0, std::abs(y));
  SymMat fd_y = (1.0 / (2.0 * step)) * (checked_A(p.fn, x, y + step) - checked_A(p.fn, x, y - step));
  out.dA_dy_error = rel_err(fd_y, g.dA_dy);
  return out;
}

std::optional<double> boundary_y(const ProblemInstance& p, ConstVec x, double lo, double hi,
                                 int steps, double tol) {
  if (min_eig_psd(checked_B(p.fn, x)).lambda_min < -tol) return std::nullopt;
  auto feasible = [&](double y) { return min_eig_psd(checked_A(p.fn, x, y)).lambda_min >= -tol; };
  if (!feasible(hi)) return std::nullopt;
  if (feasible(lo)) return lo;
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::not_assessed:
      return "not_assessed";
  }
  return "not_assessed";
}

// ---------------------------------------------------------------------------
// Sampled assumption checks

AssumptionReport check_assumptions(const ProblemInstance& p, const AssumptionOptions& opts) {
  if (opts.sample_count < 1) throw UsageError("check_assumptions: sample_count must be >= 1");
  if (!p.x_box) throw UsageError("check_assumptions: the instance needs an x_box to sample from");
  if (!p.y_hint) throw UsageError("check_assumptions: the instance needs a y_hint to sample from");
  const Box& box = *p.x_box;
  const double y_lo = p.y_hint->lo, y_hi = p.y_hint->hi;
  const std::size_t m = p.m();
  std::mt19937_64 rng(opts.seed);

  // Box vertices first (all of them for small m), then uniform draws.
  std::vector<Vec> xs;
  const std::size_t vertex_count = m <= 6 ? (std::size_t{1} << m) : 16;
  for (std::size_t v = 0; v < vertex_count; ++v) {
    Vec x(m);
    for (std::size_t j = 0; j < m; ++j) {
      const bool up = m <= 6 ? ((v >> j) & 1U) != 0 : (rng() & 1U) != 0;
      x[j] = up ? box.upper[j] : box.lower[j];
    }
    xs.push_back(std::move(x));
  }
  for (std::size_t k = 0; k < opts.sample_count; ++k) xs.push_back(uniform_in(box, rng));
  xs.push_back(box.lower);
  xs.push_back(box.upper);

  // In higher dimensions uniform draws rarely satisfy B. Draws that miss are
  // pulled toward the sample with the largest B margin, uniformly along the
  // feasible part of the segment (the B-feasible set is convex).
  auto margin_b = [&](ConstVec x) { return min_eig_psd(checked_B(p.fn, x)).lambda_min; };
  std::size_t anchor = 0;
  Vec mb(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mb[k] = margin_b(xs[k]);
    if (mb[k] > mb[anchor]) anchor = k;
  }
  std::size_t pulled = 0;
  if (mb[anchor] >= -kFeasTol) {
    const Vec a = xs[anchor];
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (mb[k] >= -kFeasTol) continue;
      auto at = [&](double t) {
        Vec x(m);
        for (std::size_t j = 0; j < m; ++j) x[j] = a[j] + t * (xs[k][j] - a[j]);
        return x;
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (margin_b(at(mid)) >= 0.0 ? lo : hi) = mid;
      }
      xs[k] = at(uniform(0.0, 1.0, rng) * lo);
      ++pulled;
    }
  }

  struct FeasiblePoint {
    Vec x;
    double y_min;
    double y;
  };
  std::vector<FeasiblePoint> feasible;
  for (const Vec& x : xs) {
    if (auto yb = boundary_y(p, x, y_lo, y_hi)) {
      feasible.push_back({x, *yb, uniform(*yb, y_hi, rng)});
    }
  }

  AssumptionReport r;
  r.samples = xs.size();
  r.feasible_samples = feasible.size();
  if (pulled > 0) {
    r.notes.push_back(std::to_string(pulled) + " samples outside B >= 0 were pulled toward a feasible anchor");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  r.worst_concavity_A_x = r.worst_concavity_B = r.worst_convexity_A_y = inf;
  r.strict_concavity_A_x = inf;

  double y_floor = y_lo;
  if (!feasible.empty()) {
    y_floor = inf;
    for (const auto& fp : feasible) y_floor = std::min(y_floor, fp.y_min);
  } else {
    r.notes.emplace_back("no feasible sample: concavity of A(., y) tested over the whole y_hint");
  }

  for (std::size_t k = 0; k < opts.sample_count; ++k) {
    const Vec x1 = uniform_in(box, rng), x2 = uniform_in(box, rng);
    Vec mid(m);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      mid[j] = 0.5 * (x1[j] + x2[j]);
      dist2 += (x1[j] - x2[j]) * (x1[j] - x2[j]);
    }
    const double y = uniform(y_floor, y_hi, rng);
    const SymMat a1 = checked_A(p.fn, x1, y), a2 = checked_A(p.fn, x2, y);
    const SymMat am = checked_A(p.fn, mid, y);
    const double sa = std::max({rel_scale(a1), rel_scale(a2), rel_scale(am)});
    const double ga = min_eig_psd(am - 0.5 * a1 - 0.5 * a2).lambda_min;
    r.worst_concavity_A_x = std::min(r.worst_concavity_A_x, ga / sa);
    if (dist2 > 0.0) r.strict_concavity_A_x = std::min(r.strict_concavity_A_x, ga / dist2);

    const SymMat b1 = checked_B(p.fn, x1), b2 = checked_B(p.fn, x2), bm = checked_B(p.fn, mid);
    const double sb = std::max({rel_scale(b1), rel_scale(b2), rel_scale(bm)});
    const double gb = min_eig_psd(bm - 0.5 * b1 - 0.5 * b2).lambda_min;
    r.worst_concavity_B = std::min(r.worst_concavity_B, gb / sb);
  }

  // Convexity in y along feasible x; fall back to box samples when none.
  const std::size_t y_pairs = std::max<std::size_t>(opts.sample_count, 1);
  for (std::size_t k = 0; k < y_pairs; ++k) {
    Vec x;
    double lo = y_lo;
    if (!feasible.empty()) {
      const auto& fp = feasible[k % feasible.size()];
      x = fp.x;
      lo = fp.y_min;
    } else {
      x = uniform_in(box, rng);
    }
    const double y1 = uniform(lo, y_hi, rng), y2 = uniform(lo, y_hi, rng);
    const SymMat a1 = checked_A(p.fn, x, y1), a2 = checked_A(p.fn, x, y2);
    const SymMat am = checked_A(p.fn, x, 0.5 * (y1 + y2));
    const double s = std::max({rel_scale(a1), rel_scale(a2), rel_scale(am)});
    const double g = min_eig_psd(0.5 * a1 + 0.5 * a2 - am).lambda_min;
    r.worst_convexity_A_y = std::min(r.worst_convexity_A_y, g / s);
  }

  const double tol = opts.convexity_tol;
  r.a = (r.worst_concavity_A_x >= -tol && r.worst_concavity_B >= -tol &&
         r.worst_convexity_A_y >= -tol)
            ? Verdict::pass
            : Verdict::fail;

  if (feasible.empty()) {
    r.notes.emplace_back("no feasible sample: (b) and (c) not assessed");
    r.min_dA_dy_eig = 0.0;
    r.best_margin = -inf;
    return r;
  }

  r.min_dA_dy_eig = inf;
  bool b_ok = true;
  for (const auto& fp : feasible) {
    for (double y : {fp.y_min, fp.y}) {
      const SymMat d = p.fn.dA_dy(fp.x, y);
      const double l = min_eig_psd(d).lambda_min;
      r.min_dA_dy_eig = std::min(r.min_dA_dy_eig, l);
      if (!(l > opts.pd_tol)) b_ok = false;
    }
  }
  r.b = b_ok ? Verdict::pass : Verdict::fail;

  r.best_margin = -inf;
  for (const Vec& x : xs) {
    const double ma = min_eig_psd(checked_A(p.fn, x, y_hi)).lambda_min;
    const double mb = min_eig_psd(checked_B(p.fn, x)).lambda_min;
    r.best_margin = std::max(r.best_margin, std::min(ma, mb));
  }
  r.c = r.best_margin > kPsdTol ? Verdict::pass : Verdict::fail;
  r.notes.emplace_back("(c) is a strict-feasibility proxy for the constraint qualification");
  return r;
}

}  // namespace globalsdp
