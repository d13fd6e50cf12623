#include "globalsdp/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "globalsdp/error.hpp"

namespace globalsdp {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffTol = 1e-12;

void require_n(std::size_t n) {
  if (n == 0) throw UsageError("symmetric matrix dimension must be >= 1");
}

}  // namespace

SymMat::SymMat(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) { require_n(n); }

SymMat SymMat::identity(std::size_t n) {
  SymMat out(n);
  for (std::size_t i = 0; i < n; ++i) out.set(i, i, 1.0);
  return out;
}

SymMat SymMat::diagonal(std::span<const double> d) {
  SymMat out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out.set(i, i, d[i]);
  if (!out.all_finite()) throw UsageError("symmetric matrix has non-finite entries");
  return out;
}

SymMat SymMat::from_packed(std::size_t n, Vec packed) {
  require_n(n);
  if (packed.size() != n * (n + 1) / 2) {
    throw UsageError("packed storage for n = " + std::to_string(n) + " needs " +
                     std::to_string(n * (n + 1) / 2) + " entries, got " +
                     std::to_string(packed.size()));
  }
  SymMat out;
  out.n_ = n;
  out.data_ = std::move(packed);
  if (!out.all_finite()) throw UsageError("symmetric matrix has non-finite entries");
  return out;
}

SymMat SymMat::from_dense_lower(std::size_t n, std::span<const double> rowmajor) {
  if (rowmajor.size() != n * n) throw UsageError("dense input has wrong size");
  SymMat out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) out.set(i, j, rowmajor[i * n + j]);
  if (!out.all_finite()) throw UsageError("symmetric matrix has non-finite entries");
  return out;
}

SymMat SymMat::outer(std::span<const double> v) {
  SymMat out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) out.set(i, j, v[i] * v[j]);
  return out;
}

Vec SymMat::dense() const {
  Vec out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = (*this)(i, j);
  return out;
}

double SymMat::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SymMat::frobenius() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = (*this)(i, j);
      s += (i == j ? 1.0 : 2.0) * v * v;
    }
  return std::sqrt(s);
}

bool SymMat::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool SymMat::is_diagonal() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if ((*this)(i, j) != 0.0) return false;
  return true;
}

double SymMat::quad(std::span<const double> v) const {
  if (v.size() != n_) throw UsageError("quad: vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    s += (*this)(i, i) * v[i] * v[i];
    for (std::size_t j = 0; j < i; ++j) s += 2.0 * (*this)(i, j) * v[i] * v[j];
  }
  return s;
}

Vec SymMat::apply(std::span<const double> v) const {
  if (v.size() != n_) throw UsageError("apply: vector length mismatch");
  Vec out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

void SymMat::require_same(const SymMat& o) const {
  if (o.n_ != n_) {
    throw UsageError("dimension mismatch: " + std::to_string(n_) + " vs " +
                     std::to_string(o.n_));
  }
}

SymMat& SymMat::operator+=(const SymMat& o) {
  require_same(o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  require_same(o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

SymMat& SymMat::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

SymMat& SymMat::axpy(double a, const SymMat& o) {
  require_same(o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += a * o.data_[k];
  return *this;
}

SymMat SpectralDecomp::reconstruct() const {
  const std::size_t n = eigenvalues.size();
  SymMat out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& q = eigenvectors[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) out.add(i, j, eigenvalues[k] * q[i] * q[j]);
  }
  return out;
}

double inner(const SymMat& a, const SymMat& b) {
  if (a.n() != b.n()) {
    throw UsageError("inner: dimension mismatch " + std::to_string(a.n()) + " vs " +
                     std::to_string(b.n()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) {
    s += a(i, i) * b(i, i);
    for (std::size_t j = 0; j < i; ++j) s += 2.0 * a(i, j) * b(i, j);
  }
  return s;
}

SpectralDecomp eigh(const SymMat& input) {
  const std::size_t n = input.n();
  if (n == 0) throw UsageError("eigh: empty matrix");
  if (!input.all_finite()) throw UsageError("eigh: matrix has non-finite entries");

  Vec a = input.dense();
  Vec v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](Vec& m, std::size_t i, std::size_t j) -> double& { return m[i * n + j]; };

  const double norm = input.frobenius();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  int sweep = 0;
  for (double off = off_norm(); off > kOffTol * norm; off = off_norm()) {
    if (++sweep > kMaxSweeps) {
      std::ostringstream msg;
      msg << "eigh: Jacobi did not converge in " << kMaxSweeps
          << " sweeps (n = " << n << ", ||A||_F = " << norm << ", off-diagonal norm = " << off
          << ")";
      throw NumericalError(msg.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        at(a, p, q) = 0.0;
        at(a, q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

  SpectralDecomp out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t k : order) {
    out.eigenvalues.push_back(a[k * n + k]);
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i * n + k];
    out.eigenvectors.push_back(std::move(col));
  }
  return out;
}

PsdTest min_eig_psd(const SymMat& a, double tol) {
  if (tol < 0.0) throw UsageError("min_eig_psd: tol must be >= 0");
  double lmin;
  if (a.is_diagonal()) {
    lmin = a(0, 0);
    for (std::size_t i = 1; i < a.n(); ++i) lmin = std::min(lmin, a(i, i));
  } else {
    lmin = eigh(a).eigenvalues.front();
  }
  return {lmin, lmin >= -tol};
}

Vec LowerTriangular::solve_lower(std::span<const double> b) const {
  if (b.size() != n_) throw UsageError("solve_lower: length mismatch");
  Vec y(b.begin(), b.end());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= (*this)(i, k) * y[k];
    y[i] /= (*this)(i, i);
  }
  return y;
}

Vec LowerTriangular::solve_upper(std::span<const double> b) const {
  if (b.size() != n_) throw UsageError("solve_upper: length mismatch");
  Vec x(b.begin(), b.end());
  for (std::size_t ii = n_; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n_; ++k) x[ii] -= (*this)(k, ii) * x[k];
    x[ii] /= (*this)(ii, ii);
  }
  return x;
}

Vec LowerTriangular::solve(std::span<const double> b) const { return solve_upper(solve_lower(b)); }

SymMat LowerTriangular::inverse() const {
  SymMat out(n_);
  Vec e(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vec col = solve(e);
    for (std::size_t i = j; i < n_; ++i) out.set(i, j, col[i]);
  }
  return out;
}

double LowerTriangular::log_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += std::log((*this)(i, i));
  return 2.0 * s;
}

SymMat LowerTriangular::gram() const {
  SymMat out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += (*this)(i, k) * (*this)(j, k);
      out.set(i, j, s);
    }
  return out;
}

LowerTriangular chol(const SymMat& a) {
  const std::size_t n = a.n();
  if (n == 0) throw UsageError("chol: empty matrix");
  LowerTriangular l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NotPositiveDefinite(j, d);
    const double ljj = std::sqrt(d);
    l.set(j, j, ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l.set(i, j, s / ljj);
    }
  }
  return l;
}

double gen_eig_min(const SymMat& k, const SymMat& m) {
  if (k.n() != m.n()) throw UsageError("gen_eig_min: K and M dimensions differ");
  const std::size_t n = k.n();
  const LowerTriangular l = chol(m);
  // X = L^{-1} K, column by column; then C = L^{-1} X^T.
  std::vector<Vec> x_cols(n);
  Vec col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = k(i, j);
    x_cols[j] = l.solve_lower(col);
  }
  SymMat c(n);
  for (std::size_t j = 0; j < n; ++j) {
    // column j of X^T is row j of X
    for (std::size_t i = 0; i < n; ++i) col[i] = x_cols[i][j];
    const Vec cj = l.solve_lower(col);
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= j) c.add(i, j, 0.5 * cj[i]);
      if (i <= j) c.add(j, i, 0.5 * cj[i]);
    }
  }
  return eigh(c).eigenvalues.front();
}

double gen_eig_max(const SymMat& k, const SymMat& m) { return -gen_eig_min(-k, m); }

SymMat congruence(const SymMat& a, const std::vector<Vec>& columns) {
  const std::size_t r = columns.size();
  if (r == 0) throw UsageError("congruence: no columns");
  std::vector<Vec> av;
  av.reserve(r);
  for (const Vec& c : columns) av.push_back(a.apply(c));
  SymMat out(r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      out.set(i, j, std::inner_product(columns[i].begin(), columns[i].end(), av[j].begin(), 0.0));
  return out;
}

SymMat expand(const SymMat& s, const std::vector<Vec>& columns, std::size_t n) {
  if (s.n() != columns.size()) throw UsageError("expand: dimension mismatch");
  SymMat out(n);
  for (std::size_t a = 0; a < s.n(); ++a)
    for (std::size_t b = 0; b < s.n(); ++b) {
      const double sab = s(a, b);
      if (sab == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) out.add(i, j, sab * columns[a][i] * columns[b][j]);
    }
  return out;
}

SymMat block_diagonal(std::span<const SymMat> blocks) {
  std::size_t n = 0;
  for (const SymMat& b : blocks) n += b.n();
  SymMat out(n);
  std::size_t off = 0;
  for (const SymMat& b : blocks) {
    for (std::size_t i = 0; i < b.n(); ++i)
      for (std::size_t j = 0; j <= i; ++j) out.set(off + i, off + j, b(i, j));
    off += b.n();
  }
  return out;
}

}  // namespace globalsdp
