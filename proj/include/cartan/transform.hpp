#pragma once

#include <string>
#include <vector>

#include "cartan/coframe.hpp"

namespace cartan {

struct VerificationResult {
  /// fbar - tgt.f(phi, psi, chi, eta).
  Expr residual;
  ZeroVerdict verdict;
  Prolongation prolongation;

  bool verified() const { return verdict.zero(); }
};

/// Checks that the map carries u''' = src.f to u''' = tgt.f.
VerificationResult verify_map(const OdeRhs& src, const OdeRhs& tgt, const PointMap& map,
                              const ZeroTestPolicy& policy = {});

/// The equation u''' = f that the map carries onto u''' = tgt.f:
/// f = (F(phi, psi, chi, eta) D phi - eta_x - p eta_u - q eta_p) / eta_q.
OdeRhs pullback_equation(const OdeRhs& tgt, const PointMap& map, const ZeroTestPolicy& policy = {});

/// Target-side matrix with barred jet coordinates replaced by phi, psi, chi, eta.
CoframeMatrix pullback(const CoframeMatrix& a_tgt, const PointMap& map, const Prolongation& prol);

/// Same sparsity as a coframe matrix: b1; b2 b3; b4 b5 b6; b7 . . b9.
using BMatrix = CoframeMatrix;

/// (abar)^-1 a with abar pulled back along the map's prolongation over src.
BMatrix b_matrix(const CoframeMatrix& a_src, const CoframeMatrix& a_tgt, const PointMap& map,
                 const OdeRhs& src);

/// The matrix b with Phi^*(wbar) = b w induced by the map itself:
/// b1 = psi_u - chi phi_u, b2 = chi_u - eta phi_u, b3 = chi_p,
/// b4 = eta_u - fbar phi_u, b5 = eta_p, b6 = eta_q, b7 = phi_u, b9 = D phi.
BMatrix induced_b_matrix(const OdeRhs& src, const OdeRhs& tgt, const PointMap& map);

using Matrix6 = Eigen::Matrix<Expr, 6, 6>;

/// Six-dimensional coframe on the prolonged space of a branch-D equation,
/// rows theta^1..theta^4, pi^1, pi^2 over (w1..w4, da1, da2).
Matrix6 prolonged_coframe(const BaseInvariants& inv, const Roots& rt,
                          const ProlongedInvariants& pinv, const Expr& a1, const Expr& a2);

/// Inverse of a lower-triangular matrix by forward substitution.
Matrix6 lower_triangular_inverse(const Matrix6& L);

struct ExtendedBMatrix {
  /// barred^-1 * unbarred; slot names follow matrix position.
  Matrix6 b;
  /// Canonical side for u''' = (3/2) u''^2/u' with abar1 = 1, abar2 = 0, pulled back.
  Matrix6 barred;
  Matrix6 unbarred;
};

ExtendedBMatrix extended_b_matrix(const OdeRhs& src, const Expr& a1, const Expr& a2,
                                  const PointMap& map, const Prolongation& prol,
                                  const ZeroTestPolicy& policy = {});

struct EquationCheck {
  std::string equation;
  Expr residual;
  ZeroVerdict verdict;
};

struct SystemDiagnostics {
  std::vector<EquationCheck> equations;
  bool all_zero() const;
};

/// Residuals of the first-order system the map and b must satisfy:
/// D eta = b9 fbar, eta_u = b4 + b7 fbar, eta_p = b5, eta_q = b6,
/// D chi = b9 eta, chi_u = b2 + b7 eta, chi_p = b3, D phi = b9, phi_u = b7,
/// b7 D psi = b9 (psi_u - b1).
SystemDiagnostics check_construction_system(const OdeRhs& src, const OdeRhs& tgt,
                                            const PointMap& map, const BMatrix& b,
                                            const ZeroTestPolicy& policy = {});

/// Branch-D construction: the same system with the 4x4 block of the extended
/// b-matrix, plus the equations for the auxiliary functions a1, a2.
SystemDiagnostics check_branch_d_systems(const OdeRhs& src, const PointMap& map, const Expr& a1,
                                         const Expr& a2, const ZeroTestPolicy& policy = {});

}  // namespace cartan
