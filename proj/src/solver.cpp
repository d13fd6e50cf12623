#include "globalsdp/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec project(const ProblemInstance& p, Vec x) {
  return p.x_box ? p.x_box->clamp(x) : x;
}

// ---------------------------------------------------------------------------
// Stage one: projected gradient ascent on the log-sum-exp smoothed margin.

struct SmoothEval {
  double phi = -kInf;
  double t = -kInf;
  Vec grad;
  bool sandwich_ok = true;
};

SmoothEval smooth_eval(const ProblemInstance& p, double y, ConstVec x, double mu, bool use_a) {
  struct Block {
    SpectralDecomp spec;
    std::vector<SymMat> grads;
  };
  std::vector<Block> blocks;
  if (use_a) blocks.push_back({eigh(checked_A(p.fn, x, y)), p.fn.grad_x_A(x, y)});
  blocks.push_back({eigh(checked_B(p.fn, x)), p.fn.grad_x_B(x)});

  double lmin = kInf;
  std::size_t count = 0;
  for (const Block& b : blocks) {
    lmin = std::min(lmin, b.spec.eigenvalues.front());
    count += b.spec.n();
  }
  double sum = 0.0;
  for (const Block& b : blocks)
    for (double l : b.spec.eigenvalues) sum += std::exp(-(l - lmin) / mu);

  SmoothEval out;
  out.t = lmin;
  out.phi = lmin - mu * std::log(sum);
  out.grad.assign(p.m(), 0.0);
  for (const Block& b : blocks) {
    for (std::size_t k = 0; k < b.spec.n(); ++k) {
      const double w = std::exp(-(b.spec.eigenvalues[k] - lmin) / mu) / sum;
      if (w < 1e-300) continue;
      for (std::size_t j = 0; j < p.m(); ++j) out.grad[j] += w * b.grads[j].quad(b.spec.eigenvectors[k]);
    }
  }
  const double slack = 1e-12 * (1.0 + std::abs(lmin));
  out.sandwich_ok = out.phi <= out.t + slack &&
                    out.phi >= out.t - mu * std::log(static_cast<double>(count)) - slack;
  return out;
}

struct StageOneResult {
  Vec x;
  SmoothEval last;
  double mu = 0.0;
  int iterations = 0;
  int sandwich_violations = 0;
};

StageOneResult stage_one(const ProblemInstance& p, double y, Vec x, const InnerOpts& o, bool use_a) {
  StageOneResult r;
  x = project(p, std::move(x));
  double mu = o.mu_start;
  for (;;) {
    SmoothEval cur = smooth_eval(p, y, x, mu, use_a);
    if (!cur.sandwich_ok) ++r.sandwich_violations;
    double step = 1.0;
    for (int it = 0; it < o.max_iter; ++it) {
      bool accepted = false;
      double s = step, moved = 0.0;
      for (int ls = 0; ls < 80; ++ls) {
        Vec xn(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) xn[j] = x[j] + s * cur.grad[j];
        xn = project(p, std::move(xn));
        double ascent = 0.0;
        moved = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          ascent += (xn[j] - x[j]) * cur.grad[j];
          moved += (xn[j] - x[j]) * (xn[j] - x[j]);
        }
        if (moved == 0.0) break;
        SmoothEval cand = smooth_eval(p, y, xn, mu, use_a);
        if (cand.phi >= cur.phi + o.armijo * ascent) {
          x = std::move(xn);
          cur = std::move(cand);
          if (!cur.sandwich_ok) ++r.sandwich_violations;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      ++r.iterations;
      if (!accepted) break;
      if (std::sqrt(moved) / s <= o.grad_tol) break;
      step = std::min(2.0 * s, 1e8);
    }
    r.last = std::move(cur);
    r.mu = mu;
    if (mu <= o.mu_end * (1.0 + 1e-12)) break;
    mu = std::max(o.mu_end, mu / o.mu_factor);
  }
  r.x = std::move(x);
  return r;
}

// ---------------------------------------------------------------------------
// Stage two: log-barrier path following in (x, t) for
//   maximize t  s.t.  A(x, y) - t I >= 0,  B(x) - t I >= 0,  x in x_box.
// Scaled barrier objective phi = t / nu + log det(A - tI) + log det(B - tI)
// + sum log(box slacks); Newton steps use the Gauss-Newton Hessian.

struct BarrierParts {
  bool ok = false;
  double t_over_nu = 0.0;
  double logdet = 0.0;
  double log_box = 0.0;
  Vec grad;     // over (free x..., t)
  SymMat neg_h;  // negated Gauss-Newton Hessian
};

class Barrier {
 public:
  Barrier(const ProblemInstance& p, double y, bool use_a) : p_(p), y_(y), use_a_(use_a) {
    for (std::size_t j = 0; j < p.m(); ++j)
      if (!p.x_box || p.x_box->upper[j] > p.x_box->lower[j]) free_.push_back(j);
    dim_ = free_.size() + 1;
    barrier_count_ = (use_a ? p.fn.n_A : 0) + p.fn.n_B + (p.x_box ? 2 * free_.size() : 0);
  }

  std::size_t dim() const { return dim_; }
  std::size_t barrier_count() const { return barrier_count_; }
  const std::vector<std::size_t>& free_coords() const { return free_; }

  BarrierParts eval(ConstVec x, double t, double nu, bool derivs) const {
    BarrierParts out;
    const std::size_t nf = free_.size();
    if (derivs) {
      out.grad.assign(dim_, 0.0);
      out.neg_h = SymMat(dim_);
    }
    if (p_.x_box) {
      for (std::size_t a = 0; a < nf; ++a) {
        const std::size_t j = free_[a];
        const double sl = x[j] - p_.x_box->lower[j], su = p_.x_box->upper[j] - x[j];
        if (!(sl > 0.0) || !(su > 0.0)) return out;
        out.log_box += std::log(sl) + std::log(su);
        if (derivs) {
          out.grad[a] += 1.0 / sl - 1.0 / su;
          out.neg_h.add(a, a, 1.0 / (sl * sl) + 1.0 / (su * su));
        }
      }
    }
    if (use_a_ && !add_block(checked_A(p_.fn, x, y_), t, derivs ? p_.fn.grad_x_A(x, y_) : std::vector<SymMat>{},
                             derivs, out)) {
      return out;
    }
    if (!add_block(checked_B(p_.fn, x), t, derivs ? p_.fn.grad_x_B(x) : std::vector<SymMat>{}, derivs,
                   out)) {
      return out;
    }
    out.t_over_nu = t / nu;
    if (derivs) out.grad[nf] += 1.0 / nu;
    out.ok = true;
    return out;
  }

 private:
  bool add_block(SymMat f, double t, const std::vector<SymMat>& grads, bool derivs,
                 BarrierParts& out) const {
    const std::size_t n = f.n();
    for (std::size_t i = 0; i < n; ++i) f.add(i, i, -t);
    LowerTriangular l;
    try {
      l = chol(f);
    } catch (const NotPositiveDefinite&) {
      return false;
    }
    out.logdet += l.log_det();
    if (!derivs) return true;

    const std::size_t nf = free_.size();
    const Vec g = l.inverse().dense();
    std::vector<Vec> prod(nf, Vec(n * n, 0.0));  // G * dF/dx_j
    for (std::size_t a = 0; a < nf; ++a) {
      const Vec d = grads[free_[a]].dense();
      Vec& pa = prod[a];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          const double gik = g[i * n + k];
          if (gik == 0.0) continue;
          for (std::size_t c = 0; c < n; ++c) pa[i * n + c] += gik * d[k * n + c];
        }
    }
    auto trace_prod = [n](const Vec& u, const Vec& v) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) s += u[i * n + k] * v[k * n + i];
      return s;
    };
    double tr_g = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr_g += g[i * n + i];
    for (std::size_t a = 0; a < nf; ++a) {
      double tr = 0.0;
      for (std::size_t i = 0; i < n; ++i) tr += prod[a][i * n + i];
      out.grad[a] += tr;
      for (std::size_t b = 0; b <= a; ++b) out.neg_h.add(a, b, trace_prod(prod[a], prod[b]));
      out.neg_h.add(nf, a, -trace_prod(prod[a], g));
    }
    out.grad[nf] -= tr_g;
    out.neg_h.add(nf, nf, trace_prod(g, g));
    return true;
  }

  const ProblemInstance& p_;
  double y_;
  bool use_a_;
  std::vector<std::size_t> free_;
  std::size_t dim_ = 1;
  std::size_t barrier_count_ = 0;
};

struct StageTwoResult {
  Vec x;
  double t = 0.0;
  double nu = 0.0;
  int iterations = 0;
  bool centered = true;
};

StageTwoResult stage_two(const ProblemInstance& p, double y, Vec x, double t_now, const InnerOpts& o,
                         bool use_a) {
  Barrier bar(p, y, use_a);
  const auto& free = bar.free_coords();
  const std::size_t nf = free.size();
  if (p.x_box) {
    for (std::size_t j : free) {
      const double lo = p.x_box->lower[j], hi = p.x_box->upper[j];
      const double pad = std::min(1e-6 * (hi - lo), 0.25 * (hi - lo));
      x[j] = std::clamp(x[j], lo + pad, hi - pad);
    }
  }
  double nu = std::max(o.mu_end, o.nu_end);
  // t_now is the margin at the unpadded point; recompute where we start.
  {
    double lmin = min_eig_psd(checked_B(p.fn, x)).lambda_min;
    if (use_a) lmin = std::min(lmin, min_eig_psd(checked_A(p.fn, x, y)).lambda_min);
    t_now = lmin;
  }
  double t = t_now - nu;

  StageTwoResult r;
  r.centered = true;
  Vec cand_x = x;
  for (;;) {
    bool centered = false;
    for (int it = 0; it < o.newton_max_iter; ++it) {
      ++r.iterations;
      BarrierParts cur = bar.eval(x, t, nu, true);
      if (!cur.ok) break;  // cannot happen for an accepted iterate
      SymMat h = cur.neg_h;
      double diag_max = 0.0;
      for (std::size_t a = 0; a < h.n(); ++a) diag_max = std::max(diag_max, h(a, a));
      for (std::size_t a = 0; a < h.n(); ++a) h.add(a, a, 1e-14 * diag_max + 1e-300);
      Vec d;
      try {
        d = chol(h).solve(cur.grad);
      } catch (const NotPositiveDefinite&) {
        break;
      }
      double dec = 0.0;
      for (std::size_t a = 0; a < d.size(); ++a) dec += cur.grad[a] * d[a];
      if (dec <= 1e-10) {
        centered = true;
        break;
      }
      bool accepted = false;
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        cand_x = x;
        for (std::size_t a = 0; a < nf; ++a) cand_x[free[a]] += alpha * d[a];
        const double cand_t = t + alpha * d[nf];
        BarrierParts nxt = bar.eval(cand_x, cand_t, nu, false);
        if (!nxt.ok) continue;
        const double gain = (cand_t - t) / nu + (nxt.logdet - cur.logdet) + (nxt.log_box - cur.log_box);
        if (gain >= 1e-4 * alpha * dec) {
          x = cand_x;
          t = cand_t;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        centered = dec <= 1e-6;
        break;
      }
    }
    if (!centered) r.centered = false;
    if (nu <= o.nu_end * (1.0 + 1e-12)) break;
    nu = std::max(o.nu_end, nu * 0.1);
  }
  r.x = std::move(x);
  r.t = t;
  r.nu = nu;
  return r;
}

double margin_at(const ProblemInstance& p, double y, ConstVec x, bool use_a) {
  double lmin = min_eig_psd(checked_B(p.fn, x)).lambda_min;
  if (use_a) lmin = std::min(lmin, min_eig_psd(checked_A(p.fn, x, y)).lambda_min);
  return lmin;
}

InnerResult maximize_margin(const ProblemInstance& p, double y, ConstVec x0, const InnerOpts& o,
                            bool use_a) {
  if (!(o.mu_start > 0.0) || !(o.mu_end > 0.0) || o.mu_end > o.mu_start || !(o.mu_factor > 1.0)) {
    throw UsageError("inner options: need 0 < mu_end <= mu_start and mu_factor > 1");
  }
  if (o.max_iter < 1 || o.newton_max_iter < 1) throw UsageError("inner options: caps must be >= 1");
  if (x0.size() != p.m()) throw UsageError("x0 has the wrong length");

  std::vector<Vec> starts{Vec(x0.begin(), x0.end())};
  if (o.restarts > 0 && p.x_box) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    for (int k = 0; k < o.restarts; ++k) {
      Vec x(p.m());
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = std::uniform_real_distribution<double>(p.x_box->lower[j], p.x_box->upper[j])(rng);
      starts.push_back(std::move(x));
    }
  }

  InnerResult best;
  best.t = -kInf;
  for (const Vec& s : starts) {
    StageOneResult one = stage_one(p, y, s, o, use_a);
    InnerResult r;
    r.phi = one.last.phi;
    r.mu = one.mu;
    r.iterations = one.iterations;
    r.sandwich_violations = one.sandwich_violations;
    r.x = std::move(one.x);
    r.t = one.last.t;
    r.t_upper = kInf;
    if (o.refine) {
      StageTwoResult two = stage_two(p, y, r.x, r.t, o, use_a);
      r.iterations += two.iterations;
      const double t2 = margin_at(p, y, two.x, use_a);
      if (t2 >= r.t) {
        r.x = std::move(two.x);
        r.t = t2;
      }
      r.exact = two.centered;
      if (two.centered) {
        Barrier bar(p, y, use_a);
        r.t_upper = two.t + 2.0 * static_cast<double>(bar.barrier_count()) * two.nu;
      }
    }
    if (r.t > best.t) best = std::move(r);
  }
  return best;
}

}  // namespace

InnerResult feasibility_margin(const ProblemInstance& p, double y, ConstVec x0, const InnerOpts& opts) {
  if (!std::isfinite(y)) throw UsageError("feasibility_margin: y must be finite");
  return maximize_margin(p, y, x0, opts, true);
}

InnerResult feasibility_margin_B(const ProblemInstance& p, ConstVec x0, const InnerOpts& opts) {
  return maximize_margin(p, 0.0, x0, opts, false);
}

const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::bracket_failure:
      return "bracket_failure";
    case SolveStatus::iteration_cap:
      return "iteration_cap";
    case SolveStatus::uncertified:
      return "uncertified";
  }
  return "uncertified";
}

namespace {

void enforce_assumptions(const AssumptionReport& rep, bool override_flag,
                         std::vector<std::string>& warnings) {
  std::string failed;
  if (rep.a == Verdict::fail) failed += "(a) concavity/convexity";
  if (rep.b == Verdict::fail) failed += std::string(failed.empty() ? "" : ", ") + "(b) dA/dy > 0";
  if (rep.c != Verdict::pass) {
    warnings.emplace_back(std::string("strict-feasibility probe (c): ") + to_string(rep.c));
  }
  if (failed.empty()) return;
  if (!override_flag) {
    throw AssumptionViolation("assumption check failed: " + failed +
                              "; bisection relies on these (use the override flag to solve anyway)");
  }
  warnings.push_back("assumption check failed: " + failed + "; solving under override");
}

}  // namespace

SolveReport bisection_solve(const ProblemInstance& p, const SolveOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  if (!(opts.tol_y > 0.0)) throw UsageError("bisection_solve: tol_y must be > 0");
  if (opts.max_expansions < 1) throw UsageError("bisection_solve: max_expansions must be >= 1");

  SolveReport rep;
  if (opts.check_assumptions) {
    if (p.x_box && p.y_hint) {
      rep.assumptions = check_assumptions(p, opts.assumption);
      enforce_assumptions(*rep.assumptions, opts.override_assumptions, rep.warnings);
    } else {
      rep.warnings.emplace_back("assumption check skipped: instance has no x_box or y_hint");
    }
  }

  Vec x = opts.x0 ? *opts.x0 : (p.x_box ? p.x_box->center() : Vec(p.m(), 0.0));
  if (x.size() != p.m()) throw UsageError("x0 has the wrong length");
  x = project(p, std::move(x));

  const double ft = opts.inner.feas_tol;
  auto probe = [&](double y, ConstVec from) {
    InnerResult r = feasibility_margin(p, y, from, opts.inner);
    rep.trace.push_back({y, r.t, r.iterations, r.feasible(ft)});
    return r;
  };
  auto finish = [&](SolveStatus s, std::string msg) {
    rep.status = s;
    rep.message = std::move(msg);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
  };

  double lo = p.y_hint ? p.y_hint->lo : -1.0;
  double hi = p.y_hint ? p.y_hint->hi : 1.0;

  InnerResult at_hi = probe(hi, x);
  for (int k = 0; !at_hi.feasible(ft); ++k) {
    if (k >= opts.max_expansions) {
      const InnerResult rb = feasibility_margin_B(p, at_hi.x, opts.inner);
      rep.x_star = at_hi.x;
      rep.y_star = hi;
      if (rb.t < -ft) return finish(SolveStatus::infeasible, "B(x) >= 0 has no solution in x_box");
      return finish(SolveStatus::bracket_failure, "no feasible y found within the expansion cap");
    }
    const double w = hi - lo;
    lo = hi;
    hi += 2.0 * w;
    at_hi = probe(hi, at_hi.x);
  }
  Vec x_feas = at_hi.x;

  InnerResult at_lo = probe(lo, x_feas);
  for (int k = 0; at_lo.feasible(ft); ++k) {
    if (k >= opts.max_expansions) {
      rep.x_star = at_lo.x;
      rep.y_star = lo;
      return finish(SolveStatus::bracket_failure, "objective appears unbounded below");
    }
    const double w = hi - lo;
    hi = lo;
    x_feas = at_lo.x;
    lo -= 2.0 * w;
    at_lo = probe(lo, x_feas);
  }

  while (hi - lo > opts.tol_y) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    InnerResult r = probe(mid, x_feas);
    if (r.feasible(ft)) {
      hi = mid;
      x_feas = std::move(r.x);
    } else {
      lo = mid;
    }
  }

  // Polish: one more solve at the certified-feasible end of the bracket.
  InnerResult fin = probe(hi, x_feas);
  rep.y_star = hi;
  rep.x_star = fin.feasible(ft) ? fin.x : x_feas;
  rep.certificate = verify_kkt(p, rep.x_star, rep.y_star, opts.cert_tol, opts.active_tol);
  if (rep.certificate->accepted) return finish(SolveStatus::optimal, "");
  if (!fin.exact || !fin.feasible(ft)) {
    return finish(SolveStatus::iteration_cap,
                  "inner solve at y_star was inexact (margin " + std::to_string(fin.t) +
                      "); certificate: " + rep.certificate->reason);
  }
  return finish(SolveStatus::uncertified, "KKT certificate rejected: " + rep.certificate->reason);
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GLOBALSDP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

MultistartReport multistart(const ProblemInstance& p, const MultistartOptions& opts) {
  if (opts.starts < 2) throw UsageError("multistart: starts must be >= 2");
  MultistartReport out;
  SolveOptions so = opts.solve;
  if (so.check_assumptions) {
    if (p.x_box && p.y_hint) {
      out.assumptions = check_assumptions(p, so.assumption);
      enforce_assumptions(*out.assumptions, so.override_assumptions, out.warnings);
    } else {
      out.warnings.emplace_back("assumption check skipped: instance has no x_box or y_hint");
    }
    so.check_assumptions = false;
  }

  out.runs.resize(opts.starts);
  for (std::size_t i = 0; i < opts.starts; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    Vec x0(p.m());
    for (std::size_t j = 0; j < p.m(); ++j) {
      x0[j] = p.x_box ? std::uniform_real_distribution<double>(p.x_box->lower[j], p.x_box->upper[j])(rng)
                      : std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    out.runs[i].index = i;
    out.runs[i].x0 = std::move(x0);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.runs.size(); i = next++) {
      MultistartRun& run = out.runs[i];
      SolveOptions mine = so;
      mine.x0 = run.x0;
      try {
        run.report = bisection_solve(p, mine);
      } catch (const std::exception& e) {
        run.report = SolveReport{};
        run.report.status = SolveStatus::iteration_cap;
        run.report.message = std::string("run failed: ") + e.what();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(resolve_thread_count(opts.threads),
                                              static_cast<unsigned>(opts.starts));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  std::vector<const MultistartRun*> good;
  for (const MultistartRun& r : out.runs) {
    if (r.report.certificate && r.report.certificate->accepted) {
      good.push_back(&r);
    } else {
      out.uncertified_runs.push_back(r.index);
    }
  }
  out.accepted = good.size();
  for (std::size_t a = 0; a < good.size(); ++a)
    for (std::size_t b = a + 1; b < good.size(); ++b) {
      out.y_spread = std::max(out.y_spread, std::abs(good[a]->report.y_star - good[b]->report.y_star));
      double d = 0.0;
      for (std::size_t j = 0; j < p.m(); ++j)
        d = std::max(d, std::abs(good[a]->report.x_star[j] - good[b]->report.x_star[j]));
      out.x_spread = std::max(out.x_spread, d);
    }
  return out;
}

}  // namespace globalsdp
