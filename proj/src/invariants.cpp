#include "cartan/invariants.hpp"

namespace cartan {

using namespace sym;

const char* to_string(Branch b) {
  switch (b) {
    case Branch::A:
      return "A";
    case Branch::B:
      return "B";
    case Branch::C:
      return "C";
    case Branch::D:
      return "D";
    case Branch::Unclassified:
      return "Unclassified";
  }
  return "?";
}

const char* to_string(I7Formula f) {
  switch (f) {
    case I7Formula::None:
      return "none";
    case I7Formula::BranchB:
      return "B";
    case I7Formula::BranchC:
      return "C";
    case I7Formula::BranchD:
      return "D";
  }
  return "?";
}

namespace {

Expr q(long n, long d) { return Expr::rational(n, d); }

void require(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

// Inconclusive verdicts pass; only contradicted conditions are rejected.
void require_zero(const ZeroVerdict& v, const char* what) { require(!v.nonzero(), what); }
void require_nonzero(const ZeroVerdict& v, const char* what) { require(!v.zero(), what); }

}  // namespace

BaseInvariants base_invariants(const OdeRhs& rhs, const ZeroTestPolicy& policy) {
  BudgetScope budget(node_budget());
  const Expr& f = rhs.f;
  auto D = [&](const Expr& e) { return total_derivative(e, rhs); };
  BaseInvariants inv;
  inv.I1 = -diff(f, kQ);
  inv.I2 = q(-2, 9) * pow(inv.I1, 2) - diff(f, kP) - q(1, 3) * D(inv.I1);
  inv.I3 = q(-1, 6) * diff(inv.I1, kQ);
  inv.I4 = q(-1, 3) * inv.I1 * inv.I2 - diff(f, kU) - q(1, 2) * D(inv.I2);
  inv.I6 = -diff(inv.I3, kQ);
  inv.I5_reduced = -pow(inv.I3, 2) - diff(inv.I3, kP);
  inv.I5 = q(1, 3) * inv.I1 * diff(inv.I3, kQ) + inv.I5_reduced;
  enforce_budget(inv.I4, "base invariants");
  inv.I4_verdict = is_zero(inv.I4, policy);
  inv.I6_verdict = is_zero(inv.I6, policy);
  inv.I5_verdict = is_zero(inv.I6_verdict.zero() ? inv.I5_reduced : inv.I5, policy);
  return inv;
}

Roots roots(const BaseInvariants& inv, Branch branch, int r, int s) {
  Roots out;
  out.branch = branch;
  out.r = r;
  out.s = s;
  switch (branch) {
    case Branch::A:
      require(r != 0 && s != 0, "branch A roots need nonzero r and s");
      require_nonzero(inv.I4_verdict, "branch A requires I4 != 0");
      require_nonzero(inv.I6_verdict, "branch A requires I6 != 0");
      out.J4 = root(Expr(r) * inv.I4, 6);
      out.J6 = root(Expr(s) * inv.I6, 2);
      break;
    case Branch::B:
      require(r != 0, "branch B roots need nonzero r");
      require_nonzero(inv.I4_verdict, "branch B requires I4 != 0");
      require_zero(inv.I6_verdict, "branch B requires I6 = 0");
      require_nonzero(inv.I5_verdict, "branch B requires I5 != 0");
      out.J4 = root(Expr(r) * inv.I4, 3);
      out.J5 = root(-inv.I5_reduced, 2);
      break;
    case Branch::D:
      require_zero(inv.I4_verdict, "branch D requires I4 = 0");
      require_zero(inv.I6_verdict, "branch D requires I6 = 0");
      require_nonzero(inv.I5_verdict, "branch D requires I5 != 0");
      out.J5 = root(inv.I5_reduced, 2);
      break;
    case Branch::C:
    case Branch::Unclassified:
      break;
  }
  return out;
}

I7Result i7_branchB(const BaseInvariants& inv, const Roots& rt, const ZeroTestPolicy& policy) {
  require(rt.branch == Branch::B && rt.J4 && rt.J5, "I7 (branch B) needs branch B roots");
  const Expr& J4 = *rt.J4;
  const Expr& J5 = *rt.J5;
  I7Result out;
  out.formula = I7Formula::BranchB;
  out.J4q = diff(J4, kQ);
  Expr J4p = diff(J4, kP);
  out.value = -(3 * inv.I3 * J4 * J5 + inv.I1 * *out.J4q * J5 - 3 * J4p * J5) /
              (3 * J4 * pow(J5, 2));
  out.verdict = is_zero(out.value, policy);
  return out;
}

I7Result i7_branchC(const BaseInvariants& inv, const ZeroTestPolicy& policy) {
  require_zero(inv.I4_verdict, "branch C requires I4 = 0");
  require_nonzero(inv.I6_verdict, "branch C requires I6 != 0");
  I7Result out;
  out.formula = I7Formula::BranchC;
  out.value = -inv.I3 - diff(inv.I5 / inv.I6, kQ);
  out.verdict = is_zero(out.value, policy);
  return out;
}

I7Result i7_branchD(const BaseInvariants& inv, const Roots& rt, const ZeroTestPolicy& policy) {
  require(rt.branch == Branch::D && rt.J5, "I7 (branch D) needs branch D roots");
  const Expr& J5 = *rt.J5;
  I7Result out;
  out.formula = I7Formula::BranchD;
  out.value = q(1, 3) * inv.I1 * J5 - diff(J5, kX) - var_p() * diff(J5, kU) +
              2 * var_q() * inv.I3 * J5;
  out.verdict = is_zero(out.value, policy);
  return out;
}

ProlongedInvariants prolonged_invariants(const BaseInvariants& inv, const Roots& rt,
                                         const OdeRhs& rhs, const Expr& a1, const Expr& a2,
                                         const ZeroTestPolicy& policy) {
  require(rt.branch == Branch::D && rt.J5, "prolonged invariants need branch D roots");
  const Expr& J5 = *rt.J5;
  const Expr& I1 = inv.I1;
  const Expr& I2 = inv.I2;
  const Expr& I3 = inv.I3;
  Expr I1p = diff(I1, kP);
  Expr I2p = diff(I2, kP);
  Expr I2q = diff(I2, kQ);
  Expr fpp = diff(diff(rhs.f, kP), kP);
  Expr J5sq = pow(J5, 2);

  ProlongedInvariants out;
  out.I8 = (4 * I1p * J5 - 9 * I2q * J5 + 8 * I1 * I3 * J5 - 6 * I3 * a2) / (6 * J5);
  out.I9 = (-3 * fpp * J5sq - 2 * J5 * I1p * (I1 * J5 - 6 * a2) +
            3 * J5 * I2q * (I1 * J5 - 9 * a2) - 9 * I2p * J5sq -
            2 * I3 *
                (J5sq * (pow(I1, 2) - q(9, 2) * I2) - 12 * I1 * J5 * a2 +
                 q(9, 2) * pow(a2, 2))) /
           (18 * J5 * a1);
  out.I10 = (J5 * (I1p - 3 * I2q) + 3 * I3 * (I1 * J5 + a2)) / (3 * a1);
  out.I8_verdict = is_zero(out.I8, policy);
  out.I9_verdict = is_zero(out.I9, policy);
  out.I10_verdict = is_zero(out.I10, policy);
  return out;
}

}  // namespace cartan
