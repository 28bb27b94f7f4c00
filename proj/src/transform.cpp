#include "cartan/transform.hpp"

#include "cartan/classify.hpp"

namespace cartan {

using sym::kP;
using sym::kQ;
using sym::kU;
using sym::kX;
using sym::var_p;
using sym::var_q;

namespace {

Expr q(long n, long d) { return Expr::rational(n, d); }

void push(SystemDiagnostics& out, std::string name, const Expr& lhs, const Expr& rhs,
          const ZeroTestPolicy& policy) {
  Expr r = lhs - rhs;
  out.equations.push_back({std::move(name), r, sym::is_zero(r, policy)});
}

// Rows of the 4x4 system shared by the plain and branch-D constructions;
// `b9` sits at (4,4) in both.
void push_map_system(SystemDiagnostics& out, const OdeRhs& src, const PointMap& map,
                     const Prolongation& prol, const Expr& fbar, const CoframeMatrix& b,
                     const ZeroTestPolicy& policy) {
  const Expr& chi = prol.chi;
  const Expr& eta = prol.eta;
  const Expr& b1 = b(0, 0);
  const Expr& b2 = b(1, 0);
  const Expr& b3 = b(1, 1);
  const Expr& b4 = b(2, 0);
  const Expr& b5 = b(2, 1);
  const Expr& b6 = b(2, 2);
  const Expr& b7 = b(3, 0);
  const Expr& b9 = b(3, 3);
  push(out, "D eta = b9 fbar", total_derivative(eta, src), b9 * fbar, policy);
  push(out, "eta_u = b4 + b7 fbar", diff(eta, kU), b4 + b7 * fbar, policy);
  push(out, "eta_p = b5", diff(eta, kP), b5, policy);
  push(out, "eta_q = b6", diff(eta, kQ), b6, policy);
  push(out, "D chi = b9 eta", total_derivative(chi, src), b9 * eta, policy);
  push(out, "chi_u = b2 + b7 eta", diff(chi, kU), b2 + b7 * eta, policy);
  push(out, "chi_p = b3", diff(chi, kP), b3, policy);
  push(out, "D phi = b9", total_derivative(map.phi, src), b9, policy);
  push(out, "phi_u = b7", diff(map.phi, kU), b7, policy);
  push(out, "b7 D psi = b9 (psi_u - b1)", b7 * total_derivative(map.psi, src),
       b9 * (diff(map.psi, kU) - b1), policy);
}

}  // namespace

bool SystemDiagnostics::all_zero() const {
  for (const auto& e : equations)
    if (!e.verdict.zero()) return false;
  return true;
}

VerificationResult verify_map(const OdeRhs& src, const OdeRhs& tgt, const PointMap& map,
                              const ZeroTestPolicy& policy) {
  VerificationResult out;
  out.prolongation = prolong(map, src, policy);
  Expr pulled = substitute(tgt.f, pullback_bindings(map, out.prolongation));
  out.residual = out.prolongation.fbar - pulled;
  out.verdict = sym::is_zero(out.residual, policy);
  return out;
}

OdeRhs pullback_equation(const OdeRhs& tgt, const PointMap& map, const ZeroTestPolicy& policy) {
  OdeRhs blank{Expr(0), {}, tgt.parameters};
  Prolongation prol = prolong(map, blank, policy);
  const Expr& eta = prol.eta;
  Expr eta_q = diff(eta, kQ);
  if (eta_q.is_zero()) throw DegenerateMap("eta does not depend on u''");
  Expr pulled = substitute(tgt.f, pullback_bindings(map, prol));
  Expr partial = diff(eta, kX) + var_p() * diff(eta, kU) + var_q() * diff(eta, kP);
  OdeRhs out = make_rhs((pulled * prol.dphi - partial) / eta_q, tgt.name, tgt.parameters);
  return out;
}

CoframeMatrix pullback(const CoframeMatrix& a_tgt, const PointMap& map, const Prolongation& prol) {
  sym::Bindings b = pullback_bindings(map, prol);
  return a_tgt.unaryExpr([&](const Expr& e) { return substitute(e, b); });
}

BMatrix b_matrix(const CoframeMatrix& a_src, const CoframeMatrix& a_tgt, const PointMap& map,
                 const OdeRhs& src) {
  Prolongation prol = prolong(map, src);
  CoframeMatrix pulled = pullback(a_tgt, map, prol);
  BMatrix b = inverse(pulled) * a_src;
  if (!has_coframe_pattern(b)) throw SingularCoframe("b-matrix lost the coframe pattern");
  return b;
}

BMatrix induced_b_matrix(const OdeRhs& src, const OdeRhs& tgt, const PointMap& map) {
  Prolongation prol = prolong(map, src);
  Expr fbar = substitute(tgt.f, pullback_bindings(map, prol));
  Expr phi_u = diff(map.phi, kU);
  BMatrix b = BMatrix::Constant(Expr(0));
  b(0, 0) = diff(map.psi, kU) - prol.chi * phi_u;
  b(1, 0) = diff(prol.chi, kU) - prol.eta * phi_u;
  b(1, 1) = diff(prol.chi, kP);
  b(2, 0) = diff(prol.eta, kU) - fbar * phi_u;
  b(2, 1) = diff(prol.eta, kP);
  b(2, 2) = diff(prol.eta, kQ);
  b(3, 0) = phi_u;
  b(3, 3) = prol.dphi;
  return b;
}

Matrix6 prolonged_coframe(const BaseInvariants& inv, const Roots& rt,
                          const ProlongedInvariants& pinv, const Expr& a1, const Expr& a2) {
  if (rt.branch != Branch::D || !rt.J5) throw PreconditionError("prolonged coframe needs branch D");
  const Expr& J5 = *rt.J5;
  Expr J5sq = pow(J5, 2);
  Matrix6 M = Matrix6::Constant(Expr(0));
  M(0, 0) = a1;
  M(1, 0) = a2;
  M(1, 1) = J5;
  M(2, 0) = pow(a2, 2) / (2 * a1) + J5sq * inv.I2 / (2 * a1);
  M(2, 1) = a2 * J5 / a1 + J5sq * inv.I1 / (3 * a1);
  M(2, 2) = J5sq / a1;
  M(3, 0) = a1 * inv.I3 / J5;
  M(3, 3) = a1 / J5;
  M(4, 0) = pinv.I8;
  M(4, 1) = inv.I3;
  M(4, 3) = -a2 / J5;
  M(4, 4) = 1 / a1;
  M(5, 0) = pinv.I9;
  M(5, 1) = pinv.I10;
  M(5, 2) = inv.I3 * J5 / a1;
  M(5, 3) = -(inv.I2 * J5 + pow(a2, 2) / J5) / (2 * a1);
  M(5, 5) = 1 / a1;
  return M;
}

Matrix6 lower_triangular_inverse(const Matrix6& L) {
  Matrix6 N = Matrix6::Constant(Expr(0));
  for (int i = 0; i < 6; ++i) {
    if (L(i, i).is_zero()) throw SingularCoframe("zero diagonal entry");
    for (int j = i + 1; j < 6; ++j)
      if (!L(i, j).is_zero()) throw SingularCoframe("matrix is not lower triangular");
  }
  for (int j = 0; j < 6; ++j) {
    N(j, j) = 1 / L(j, j);
    for (int i = j + 1; i < 6; ++i) {
      std::vector<Expr> terms;
      for (int k = j; k < i; ++k)
        if (!L(i, k).is_zero() && !N(k, j).is_zero()) terms.push_back(L(i, k) * N(k, j));
      if (!terms.empty()) N(i, j) = -sym::make_sum(std::move(terms)) / L(i, i);
    }
  }
  return N;
}

ExtendedBMatrix extended_b_matrix(const OdeRhs& src, const Expr& a1, const Expr& a2,
                                  const PointMap& map, const Prolongation& prol,
                                  const ZeroTestPolicy& policy) {
  BaseInvariants inv = base_invariants(src, policy);
  Roots rt = roots(inv, Branch::D);
  ProlongedInvariants pinv = prolonged_invariants(inv, rt, src, a1, a2, policy);

  OdeRhs canon = make_rhs(canonical_rhs(Family::ThreeHalvesQ2P), "canonical");
  BaseInvariants cinv = base_invariants(canon, policy);
  Roots crt = roots(cinv, Branch::D);
  ProlongedInvariants cpinv = prolonged_invariants(cinv, crt, canon, Expr(1), Expr(0), policy);
  Matrix6 barred = prolonged_coframe(cinv, crt, cpinv, Expr(1), Expr(0));
  sym::Bindings bind = pullback_bindings(map, prol);

  ExtendedBMatrix out;
  out.barred = barred.unaryExpr([&](const Expr& e) { return substitute(e, bind); });
  out.unbarred = prolonged_coframe(inv, rt, pinv, a1, a2);
  out.b = lower_triangular_inverse(out.barred) * out.unbarred;
  return out;
}

SystemDiagnostics check_construction_system(const OdeRhs& src, const OdeRhs& tgt,
                                            const PointMap& map, const BMatrix& b,
                                            const ZeroTestPolicy& policy) {
  Prolongation prol = prolong(map, src, policy);
  Expr fbar = substitute(tgt.f, pullback_bindings(map, prol));
  SystemDiagnostics out;
  push_map_system(out, src, map, prol, fbar, b, policy);
  return out;
}

SystemDiagnostics check_branch_d_systems(const OdeRhs& src, const PointMap& map, const Expr& a1,
                                         const Expr& a2, const ZeroTestPolicy& policy) {
  Prolongation prol = prolong(map, src, policy);
  ExtendedBMatrix ext = extended_b_matrix(src, a1, a2, map, prol, policy);
  const Matrix6& b = ext.b;

  SystemDiagnostics out;
  // Row six: b13 w1 + b14 w2 + b15 w3 + b16 w4 + b17 da2 = 0.
  const Expr& b17 = b(5, 5);
  push(out, "D a2 = -b16/b17", total_derivative(a2, src), -b(5, 3) / b17, policy);
  push(out, "a2_u = -b13/b17", diff(a2, kU), -b(5, 0) / b17, policy);
  push(out, "a2_p = -b14/b17", diff(a2, kP), -b(5, 1) / b17, policy);
  push(out, "a2_q = -b15/b17", diff(a2, kQ), -b(5, 2) / b17, policy);
  // Row five: b9 w1 + b10 w2 + b11 w4 + b12 da1 = 0.
  const Expr& b12 = b(4, 4);
  push(out, "D a1 = -b11/b12", total_derivative(a1, src), -b(4, 3) / b12, policy);
  push(out, "a1_u = -b9/b12", diff(a1, kU), -b(4, 0) / b12, policy);
  push(out, "a1_p = -b10/b12", diff(a1, kP), -b(4, 1) / b12, policy);
  push(out, "a1_q = 0", diff(a1, kQ), Expr(0), policy);

  Expr fbar = q(3, 2) * pow(prol.eta, 2) / prol.chi;
  CoframeMatrix block = b.topLeftCorner<4, 4>();
  push_map_system(out, src, map, prol, fbar, block, policy);
  return out;
}

}  // namespace cartan
