#include "globalsdp/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Scaled half-vectorization: svec(M) . svec(S) = <M, S>, ||svec(S)|| = ||S||_F.
std::size_t svec_size(std::size_t k) { return k * (k + 1) / 2; }

void svec_into(const SymMat& a, Vec& out, std::size_t offset) {
  std::size_t idx = offset;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = 0; j <= i; ++j) out[idx++] = (i == j ? 1.0 : kSqrt2) * a(i, j);
}

SymMat smat(ConstVec u, std::size_t k) {
  SymMat s(k);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) s.set(i, j, u[idx++] / (i == j ? 1.0 : kSqrt2));
  return s;
}

SymMat clip_psd(const SymMat& s) {
  const SpectralDecomp d = eigh(s);
  SymMat out(s.n());
  for (std::size_t k = 0; k < d.n(); ++k) {
    const double l = d.eigenvalues[k];
    if (l <= 0.0) continue;
    const Vec& q = d.eigenvectors[k];
    for (std::size_t i = 0; i < s.n(); ++i)
      for (std::size_t j = 0; j <= i; ++j) out.add(i, j, l * q[i] * q[j]);
  }
  return out;
}

std::vector<Vec> active_columns(const SpectralDecomp& d, double tol) {
  std::vector<Vec> cols;
  for (std::size_t k = 0; k < d.n(); ++k)
    if (d.eigenvalues[k] <= tol) cols.push_back(d.eigenvectors[k]);
  return cols;
}

void require_finite_point(ConstVec x, double y) {
  if (!std::isfinite(y) ||
      !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw UsageError("KKT routines need a finite point (x, y)");
  }
}

}  // namespace

double KktResiduals::max() const noexcept {
  return std::max({stat_x, stat_y, comp_A, comp_B, feas_A, feas_B, psd_Z, psd_W});
}

std::string KktResiduals::violations(double tol) const {
  std::string out;
  auto add = [&](const char* name, double v) {
    if (v > tol) out += (out.empty() ? "" : ", ") + std::string(name);
  };
  add("stat_x", stat_x);
  add("stat_y", stat_y);
  add("comp_A", comp_A);
  add("comp_B", comp_B);
  add("feas_A", feas_A);
  add("feas_B", feas_B);
  add("psd_Z", psd_Z);
  add("psd_W", psd_W);
  return out;
}

KktResiduals kkt_residuals(const ProblemInstance& p, ConstVec x, double y, const SymMat& z,
                           const SymMat& w) {
  require_finite_point(x, y);
  if (z.n() != p.fn.n_A || w.n() != p.fn.n_B) {
    throw UsageError("multiplier dimensions do not match the problem (Z must be " +
                     std::to_string(p.fn.n_A) + "x" + std::to_string(p.fn.n_A) +
                     ", W must be " + std::to_string(p.fn.n_B) + "x" + std::to_string(p.fn.n_B) +
                     ")");
  }
  const ConstraintValues cv = eval_constraints(p, x, y);
  const GradientBundle g = eval_gradients(p, x, y);

  KktResiduals r;
  for (std::size_t j = 0; j < p.m(); ++j) {
    r.stat_x = std::max(r.stat_x, std::abs(inner(g.grad_A[j], z) + inner(g.grad_B[j], w)));
  }
  r.stat_y_signed = 1.0 - inner(g.dA_dy, z);
  r.stat_y = std::abs(r.stat_y_signed);
  r.comp_A = std::abs(inner(cv.A, z));
  r.comp_B = std::abs(inner(cv.B, w));
  r.feas_A = std::max(0.0, -cv.lambda_min_A);
  r.feas_B = std::max(0.0, -cv.lambda_min_B);
  r.psd_Z = std::max(0.0, -min_eig_psd(z).lambda_min);
  r.psd_W = std::max(0.0, -min_eig_psd(w).lambda_min);
  return r;
}

MultiplierRecovery recover_multipliers(const ProblemInstance& p, ConstVec x, double y,
                                       const MultiplierOptions& opts) {
  require_finite_point(x, y);
  const std::size_t m = p.m(), na = p.fn.n_A, nb = p.fn.n_B;
  MultiplierRecovery out;
  out.Z = SymMat(na);
  out.W = SymMat(nb);

  const ConstraintValues cv = eval_constraints(p, x, y);
  if (cv.margin < -opts.active_tol) {
    out.reason = "point is infeasible";
    return out;
  }
  const std::vector<Vec> va = active_columns(eigh(cv.A), opts.active_tol);
  const std::vector<Vec> vb = active_columns(eigh(cv.B), opts.active_tol);
  out.active_A = va.size();
  out.active_B = vb.size();
  if (va.empty()) {
    out.reason = "empty active set";
    return out;
  }

  const GradientBundle g = eval_gradients(p, x, y);
  const std::size_t da = svec_size(va.size());
  const std::size_t db = vb.empty() ? 0 : svec_size(vb.size());
  const std::size_t d = da + db;

  // Rows 0..m-1: stationarity in x (target 0); row m: <dA/dy, Z> (target 1).
  std::vector<Vec> rows(m + 1, Vec(d, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    svec_into(congruence(g.grad_A[j], va), rows[j], 0);
    if (db > 0) svec_into(congruence(g.grad_B[j], vb), rows[j], da);
  }
  svec_into(congruence(g.dA_dy, va), rows[m], 0);

  SymMat normal(d);
  for (const Vec& r : rows)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b <= a; ++b) normal.add(a, b, r[a] * r[b]);
  const Vec& rhs = rows[m];

  auto unpack = [&](ConstVec u) {
    SymMat s = smat(u.subspan(0, da), va.size());
    SymMat t = db > 0 ? smat(u.subspan(da, db), vb.size()) : SymMat();
    return std::pair{std::move(s), std::move(t)};
  };
  auto residual_of = [&](ConstVec u) {
    double s = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      const double r = std::inner_product(rows[j].begin(), rows[j].end(), u.begin(), 0.0) -
                       (j == m ? 1.0 : 0.0);
      s += r * r;
    }
    return std::sqrt(s);
  };

  // Minimum-norm least squares through the pseudo-inverse of the normal matrix.
  const SpectralDecomp nd = eigh(normal);
  const double lmax = std::max(0.0, nd.eigenvalues.back());
  Vec u(d, 0.0);
  if (lmax > 0.0) {
    for (std::size_t k = 0; k < d; ++k) {
      const double l = nd.eigenvalues[k];
      if (l <= 1e-12 * lmax) continue;
      const Vec& q = nd.eigenvectors[k];
      const double c = std::inner_product(q.begin(), q.end(), rhs.begin(), 0.0) / l;
      for (std::size_t a = 0; a < d; ++a) u[a] += c * q[a];
    }
  }

  auto is_psd = [](const SymMat& s) {
    return s.empty() || min_eig_psd(s, 0.0).lambda_min >= -1e-12 * std::max(1.0, s.max_abs());
  };
  auto [s_ls, t_ls] = unpack(u);
  if (!is_psd(s_ls) || !is_psd(t_ls)) {
    // Accelerated projected gradient on 0.5 ||G u - e||^2 over S, T >= 0.
    auto project = [&](Vec& v) {
      auto [s, t] = unpack(v);
      svec_into(clip_psd(s), v, 0);
      if (db > 0) svec_into(clip_psd(t), v, da);
    };
    project(u);
    if (lmax > 0.0) {
      Vec prev = u, look = u;
      double theta = 1.0;
      for (int it = 0; it < opts.pg_iterations; ++it) {
        const Vec nv = normal.apply(look);
        Vec next(d);
        for (std::size_t a = 0; a < d; ++a) next[a] = look[a] - (nv[a] - rhs[a]) / lmax;
        project(next);
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        for (std::size_t a = 0; a < d; ++a)
          look[a] = next[a] + ((theta - 1.0) / theta_next) * (next[a] - prev[a]);
        prev = next;
        theta = theta_next;
      }
      u = prev;
    }
  }

  auto [s, t] = unpack(u);
  out.Z = expand(s, va, na);
  if (db > 0) out.W = expand(t, vb, nb);
  out.residual = residual_of(u);
  out.ok = out.residual <= opts.residual_tol;
  if (!out.ok) out.reason = "no KKT multipliers at this point";
  return out;
}

KktCertificate verify_kkt(const ProblemInstance& p, ConstVec x, double y, double tol,
                          double active_tol) {
  if (!(tol > 0.0)) throw UsageError("verify_kkt: tol must be > 0");
  require_finite_point(x, y);
  KktCertificate cert;
  cert.x.assign(x.begin(), x.end());
  cert.y = y;
  cert.tol = tol;

  MultiplierOptions mo;
  mo.active_tol = active_tol;
  mo.residual_tol = tol;
  MultiplierRecovery rec = recover_multipliers(p, x, y, mo);
  cert.Z = std::move(rec.Z);
  cert.W = std::move(rec.W);
  cert.residuals = kkt_residuals(p, x, y, cert.Z, cert.W);
  if (!rec.ok) {
    cert.reason = rec.reason;
    return cert;
  }
  cert.accepted = cert.residuals.max() <= tol;
  if (!cert.accepted) cert.reason = "residuals above tolerance: " + cert.residuals.violations(tol);
  return cert;
}

}  // namespace globalsdp
