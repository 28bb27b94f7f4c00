#pragma once

#include <optional>
#include <stdexcept>

#include "cartan/jet.hpp"

namespace cartan {

enum class Branch { A, B, C, D, Unclassified };
const char* to_string(Branch b);

/// Relative invariants of u''' = f under point transformations.
struct BaseInvariants {
  Expr I1, I2, I3, I4, I5, I6;
  /// -I3^2 - I3_p; agrees with I5 wherever I6 vanishes.
  Expr I5_reduced;
  ZeroVerdict I4_verdict, I5_verdict, I6_verdict;

  bool I4_zero() const { return I4_verdict.zero(); }
  bool I6_zero() const { return I6_verdict.zero(); }
};

BaseInvariants base_invariants(const OdeRhs& rhs, const ZeroTestPolicy& policy = {});

struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Normalising roots. Branch A: J4^6 = r I4, J6^2 = s I6. Branch B:
/// J4^3 = r I4, J5^2 = -I5. Branch D: J5^2 = I5.
struct Roots {
  Branch branch = Branch::Unclassified;
  int r = 0;
  int s = 0;
  std::optional<Expr> J4, J5, J6;
};

Roots roots(const BaseInvariants& inv, Branch branch, int r = 1, int s = 1);

enum class I7Formula { None, BranchB, BranchC, BranchD };
const char* to_string(I7Formula f);

struct I7Result {
  Expr value;
  I7Formula formula = I7Formula::None;
  ZeroVerdict verdict;
  /// dJ4/dq, branch B only.
  std::optional<Expr> J4q;
};

I7Result i7_branchB(const BaseInvariants& inv, const Roots& roots, const ZeroTestPolicy& policy = {});
I7Result i7_branchC(const BaseInvariants& inv, const ZeroTestPolicy& policy = {});
I7Result i7_branchD(const BaseInvariants& inv, const Roots& roots, const ZeroTestPolicy& policy = {});

/// Invariants of the prolonged problem in branch D, in terms of the formal
/// group parameters a1, a2.
struct ProlongedInvariants {
  Expr I8, I9, I10;
  ZeroVerdict I8_verdict, I9_verdict, I10_verdict;
};

ProlongedInvariants prolonged_invariants(const BaseInvariants& inv, const Roots& roots,
                                         const OdeRhs& rhs, const Expr& a1, const Expr& a2,
                                         const ZeroTestPolicy& policy = {});

}  // namespace cartan
