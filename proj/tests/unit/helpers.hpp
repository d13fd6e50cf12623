#pragma once

#include <cmath>
#include <random>

#include "globalsdp/symmat.hpp"

namespace testutil {

using globalsdp::SymMat;
using globalsdp::Vec;

inline SymMat random_sym(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  SymMat a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, nd(rng));
  return a;
}

/// G G^T + shift I
inline SymMat random_spd(std::size_t n, std::mt19937_64& rng, double shift = 0.5) {
  std::normal_distribution<double> nd;
  std::vector<Vec> g(n, Vec(n));
  for (auto& r : g)
    for (double& v : r) v = nd(rng);
  SymMat a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = i == j ? shift : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[i][k] * g[j][k];
      a.set(i, j, s);
    }
  return a;
}

/// Columns of a random orthogonal matrix (Gram-Schmidt on Gaussian vectors).
inline std::vector<Vec> random_orthogonal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<Vec> q;
  while (q.size() < n) {
    Vec v(n);
    for (double& c : v) c = nd(rng);
    for (const Vec& u : q) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += u[i] * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= d * u[i];
    }
    double nv = 0.0;
    for (double c : v) nv += c * c;
    nv = std::sqrt(nv);
    if (nv < 1e-8) continue;
    for (double& c : v) c /= nv;
    q.push_back(v);
  }
  return q;
}

inline double max_diff(const SymMat& a, const SymMat& b) { return (a - b).max_abs(); }

}  // namespace testutil
