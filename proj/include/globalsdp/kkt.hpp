#pragma once

// KKT system of  min y  s.t. A(x, y) >= 0, B(x) >= 0:
//
//   <grad_x A(x, y), Z> + <grad B(x), W> = 0
//   1 - <dA/dy(x, y), Z>                 = 0
//   <A(x, y), Z> = 0,  <B(x), W> = 0
//   A(x, y) >= 0, B(x) >= 0, Z >= 0, W >= 0

#include <string>

#include "globalsdp/model.hpp"

namespace globalsdp {

struct KktResiduals {
  double stat_x = 0.0;  ///< max_j |<dA/dx_j, Z> + <dB/dx_j, W>|
  double stat_y = 0.0;  ///< |1 - <dA/dy, Z>|
  double comp_A = 0.0;  ///< |<A, Z>|
  double comp_B = 0.0;  ///< |<B, W>|
  double feas_A = 0.0;  ///< max(0, -lambda_min(A))
  double feas_B = 0.0;
  double psd_Z = 0.0;   ///< max(0, -lambda_min(Z))
  double psd_W = 0.0;
  /// 1 - <dA/dy, Z> before taking the absolute value.
  double stat_y_signed = 0.0;

  double max() const noexcept;
  /// Names of the entries above tol, comma separated.
  std::string violations(double tol) const;
};

struct KktCertificate {
  Vec x;
  double y = 0.0;
  SymMat Z;
  SymMat W;
  KktResiduals residuals;
  double tol = 0.0;
  bool accepted = false;
  std::string reason;
};

KktResiduals kkt_residuals(const ProblemInstance& p, ConstVec x, double y, const SymMat& z,
                           const SymMat& w);

struct MultiplierOptions {
  /// Eigenvalues of A and B at or below this count as active.
  double active_tol = 1e-6;
  /// Largest acceptable ||(stationarity in x, stationarity in y)||_2.
  double residual_tol = 1e-6;
  /// Projected-gradient iterations when the least-squares solution is not PSD.
  int pg_iterations = 500;
};

struct MultiplierRecovery {
  bool ok = false;
  SymMat Z;
  SymMat W;
  /// Euclidean norm of the stationarity residual at the returned pair.
  double residual = 0.0;
  std::size_t active_A = 0;
  std::size_t active_B = 0;
  std::string reason;
};

/// Multipliers supported on the near-null eigenspaces of A(x, y) and B(x),
/// Z = V_A S V_A^T and W = V_B T V_B^T with S, T >= 0, minimizing the
/// stationarity residual. Among exact least-squares solutions the one with
/// minimum Frobenius norm is returned.
MultiplierRecovery recover_multipliers(const ProblemInstance& p, ConstVec x, double y,
                                       const MultiplierOptions& opts = {});

inline constexpr double kCertTol = 1e-6;

/// recover_multipliers + kkt_residuals; accepted iff every residual <= tol.
KktCertificate verify_kkt(const ProblemInstance& p, ConstVec x, double y, double tol = kCertTol,
                          double active_tol = 1e-6);

}  // namespace globalsdp
