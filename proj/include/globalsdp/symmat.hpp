#pragma once

// Dense real symmetric matrices in packed lower-triangular storage, with the
// small set of factorizations the rest of the toolkit needs: spectral
// decomposition (cyclic Jacobi), Cholesky, PSD tests and the minimum
// generalized eigenvalue of a pencil (K, M) with M positive definite.

#include <cstddef>
#include <span>
#include <vector>

namespace globalsdp {

using Vec = std::vector<double>;

/// Absolute tolerance on the minimum eigenvalue used by PSD tests.
inline constexpr double kPsdTol = 1e-9;

class SymMat {
 public:
  /// Empty placeholder (n = 0). Every named constructor yields n >= 1.
  SymMat() = default;
  /// n x n zero matrix.
  explicit SymMat(std::size_t n);

  static SymMat zeros(std::size_t n) { return SymMat(n); }
  static SymMat identity(std::size_t n);
  static SymMat diagonal(std::span<const double> d);
  /// Packed lower triangle, row by row: (0,0), (1,0), (1,1), (2,0), ...
  static SymMat from_packed(std::size_t n, Vec packed);
  /// Row-major dense input; only the lower triangle is read.
  static SymMat from_dense_lower(std::size_t n, std::span<const double> rowmajor);
  /// v v^T
  static SymMat outer(std::span<const double> v);

  std::size_t n() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[index(i, j)];
  }
  void set(std::size_t i, std::size_t j, double v) noexcept { data_[index(i, j)] = v; }
  void add(std::size_t i, std::size_t j, double v) noexcept { data_[index(i, j)] += v; }

  std::span<const double> packed() const noexcept { return data_; }
  /// Row-major n x n copy.
  Vec dense() const;

  double max_abs() const noexcept;
  double frobenius() const noexcept;
  bool all_finite() const noexcept;
  bool is_diagonal() const noexcept;

  /// v^T A v
  double quad(std::span<const double> v) const;
  /// A v
  Vec apply(std::span<const double> v) const;

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s) noexcept;
  /// this += a * o
  SymMat& axpy(double a, const SymMat& o);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend SymMat operator-(SymMat a) { return a *= -1.0; }

 private:
  static std::size_t index(std::size_t i, std::size_t j) noexcept {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }
  void require_same(const SymMat& o) const;

  std::size_t n_ = 0;
  Vec data_;
};

/// Eigen-pairs sorted by ascending eigenvalue. eigenvectors[k] is the unit
/// vector paired with eigenvalues[k].
struct SpectralDecomp {
  Vec eigenvalues;
  std::vector<Vec> eigenvectors;

  std::size_t n() const noexcept { return eigenvalues.size(); }
  /// Q diag(lambda) Q^T
  SymMat reconstruct() const;
};

/// <A, B> = tr(AB)
double inner(const SymMat& a, const SymMat& b);

/// Cyclic Jacobi. Stops once the off-diagonal Frobenius norm drops below
/// 1e-12 * ||A||_F; throws NumericalError after 100 sweeps.
SpectralDecomp eigh(const SymMat& a);

struct PsdTest {
  double lambda_min;
  bool is_psd;
};

/// is_psd <=> lambda_min >= -tol
PsdTest min_eig_psd(const SymMat& a, double tol = kPsdTol);

/// Lower-triangular factor in packed row storage.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return j > i ? 0.0 : data_[i * (i + 1) / 2 + j];
  }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * (i + 1) / 2 + j] = v;
  }

  /// Solves L y = b.
  Vec solve_lower(std::span<const double> b) const;
  /// Solves L^T x = b.
  Vec solve_upper(std::span<const double> b) const;
  /// Solves (L L^T) x = b.
  Vec solve(std::span<const double> b) const;
  /// (L L^T)^{-1}
  SymMat inverse() const;
  /// log det(L L^T)
  double log_det() const;
  /// L L^T
  SymMat gram() const;

 private:
  std::size_t n_ = 0;
  Vec data_;
};

/// A = L L^T. Throws NotPositiveDefinite with the failing pivot index.
LowerTriangular chol(const SymMat& a);

/// Smallest lambda with det(K - lambda M) = 0. Requires M positive definite;
/// a failing Cholesky of M surfaces as NotPositiveDefinite.
double gen_eig_min(const SymMat& k, const SymMat& m);
/// Largest generalized eigenvalue, via -gen_eig_min(-K, M).
double gen_eig_max(const SymMat& k, const SymMat& m);

/// V^T A V for V given as a list of column vectors.
SymMat congruence(const SymMat& a, const std::vector<Vec>& columns);
/// V S V^T with V (n x k) given as k column vectors.
SymMat expand(const SymMat& s, const std::vector<Vec>& columns, std::size_t n);

/// Stacks blocks on the diagonal.
SymMat block_diagonal(std::span<const SymMat> blocks);

}  // namespace globalsdp
