#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "cartan/invariants.hpp"

namespace Eigen {
template <>
struct NumTraits<cartan::sym::Expr> : GenericNumTraits<cartan::sym::Expr> {
  using Real = cartan::sym::Expr;
  using NonInteger = cartan::sym::Expr;
  using Literal = cartan::sym::Expr;
  using Nested = cartan::sym::Expr;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 8,
    MulCost = 8,
  };
  static Real epsilon() { return Real(0); }
  static Real dummy_precision() { return Real(0); }
  static Real highest() { return Real(0); }
  static Real lowest() { return Real(0); }
  static int digits10() { return 0; }
};
}  // namespace Eigen

namespace cartan {

/// Components over a fixed basis of 1-forms: (dx, du, dp, dq) for forms
/// built from coordinates, (w1..w4) or (theta1..theta4) for frame bases.
using OneForm = Eigen::Matrix<Expr, 4, 1>;

/// theta = M omega. Rows follow the structure-group pattern: lower
/// triangular in the first three rows, row four carrying only (4,1), (4,4).
using CoframeMatrix = Eigen::Matrix<Expr, 4, 4>;

/// 2-form over e_i ^ e_j, i < j, in the order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
class TwoForm {
 public:
  static int slot(int i, int j);

  Expr at(int i, int j) const;
  /// Adds v * e_i ^ e_j; (j, i) with j > i stores -v at (i, j).
  void add(int i, int j, const Expr& v);
  void set(int i, int j, const Expr& v);

  const Eigen::Matrix<Expr, 6, 1>& coefficients() const { return c_; }
  Eigen::Matrix<Expr, 6, 1>& coefficients() { return c_; }

 private:
  Eigen::Matrix<Expr, 6, 1> c_ = Eigen::Matrix<Expr, 6, 1>::Constant(Expr(0));
};

inline constexpr std::array<std::array<int, 2>, 6> kWedgePairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// w1 = du - p dx, w2 = dp - q dx, w3 = dq - f dx, w4 = dx.
std::array<OneForm, 4> base_coframe(const OdeRhs& rhs);

/// d of a form given over (dx, du, dp, dq).
TwoForm exterior_derivative(const OneForm& form);

/// Rewrites a 2-form after the substitution e^a = sum_j K(a, j) E^j.
TwoForm change_basis(const TwoForm& tf, const CoframeMatrix& K);

/// Coordinate 2-form expressed over w^i ^ w^j.
TwoForm to_omega_basis(const TwoForm& tf, const OdeRhs& rhs);

/// d(sum_j g_j w^j) computed directly in the w basis.
TwoForm exterior_derivative_omega(const OneForm& g, const OdeRhs& rhs);

struct SingularCoframe : std::domain_error {
  using std::domain_error::domain_error;
};

/// Closed-form inverse for the coframe pattern; throws on a pattern
/// violation or a vanishing diagonal entry.
CoframeMatrix inverse(const CoframeMatrix& M);
bool has_coframe_pattern(const CoframeMatrix& M);

/// w-basis 2-form expressed over theta^i ^ theta^j where theta = M w.
TwoForm to_theta_basis(const TwoForm& tf, const CoframeMatrix& M);

/// Invariant coframe of a branch. Branch A takes its roots from `rt`
/// (with the scale s entering rows two and three), branch B needs `i7` from
/// i7_branchB, branch C needs `i7` from i7_branchC.
CoframeMatrix branch_coframe(const BaseInvariants& inv, const Roots& rt,
                             const std::optional<I7Result>& i7, Branch branch);

struct Constancy {
  bool constant = false;
  /// "symbolic" when all four partials tested Zero, "numeric" when decided
  /// by the sampling fallback.
  const char* method = "symbolic";
  std::complex<double> value{};
  std::optional<sym::Scalar> exact;
};

struct StructureFunctions {
  /// dtheta^i over theta^j ^ theta^k.
  std::array<TwoForm, 4> dtheta;
  std::array<std::array<Constancy, 6>, 4> constancy;
  sym::Point base_point;

  /// 1-based, j < k, as in dtheta^i = sum C^i_jk theta^j ^ theta^k.
  Expr C(int i, int j, int k) const;
  const Constancy& constancy_of(int i, int j, int k) const;
  std::complex<double> value(int i, int j, int k) const { return constancy_of(i, j, k).value; }
  bool all_constant() const;
};

struct ConstancyOptions {
  int numeric_points = 8;
  double spread = 1e-8;
  long max_denominator = 1000000;
  double snap_tolerance = 1e-9;
};

/// Constancy of a single expression in the jet coordinates.
Constancy test_constancy(const Expr& e, const ZeroTestPolicy& policy = {},
                         const ConstancyOptions& options = {});

StructureFunctions structure_functions(const CoframeMatrix& M, const OdeRhs& rhs,
                                       const ZeroTestPolicy& policy = {},
                                       const ConstancyOptions& options = {});

/// dtheta^i - sum C^i_jk theta^j ^ theta^k over w^a ^ w^b, componentwise.
std::array<TwoForm, 4> reconstruction_residual(const CoframeMatrix& M, const OdeRhs& rhs,
                                               const StructureFunctions& sf);

/// theta^j ^ theta^k over w^a ^ w^b.
TwoForm wedge_rows(const CoframeMatrix& M, int j, int k);

}  // namespace cartan
