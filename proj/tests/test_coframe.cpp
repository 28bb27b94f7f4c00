#include <gtest/gtest.h>

#include "cartan/transform.hpp"
#include "random_expr.hpp"
#include "tables.hpp"

using namespace cartan;
using namespace cartan::sym;

namespace {

Expr p = var_p(), q = var_q(), x = var_x(), u = var_u();
Expr r(long n, long d) { return Expr::rational(n, d); }
bool zero(const Expr& e) { return is_zero(e).zero(); }

OneForm form(Expr a, Expr b, Expr c, Expr d) {
  OneForm f;
  f << a, b, c, d;
  return f;
}

TwoForm wedge(const OneForm& a, const OneForm& b) {
  TwoForm out;
  for (auto [s, t] : kWedgePairs) out.set(s, t, a(s) * b(t) - a(t) * b(s));
  return out;
}

TwoForm minus(TwoForm a, const TwoForm& b) {
  a.coefficients() -= b.coefficients();
  return a;
}

bool all_zero(const TwoForm& tf) {
  for (int s = 0; s < 6; ++s)
    if (!zero(tf.coefficients()(s))) return false;
  return true;
}

struct BranchC {
  OdeRhs rhs;
  BaseInvariants inv;
  I7Result i7;
  CoframeMatrix M;
};

BranchC branch_c(const char* f) {
  BranchC c;
  c.rhs = parse_rhs(f);
  c.inv = base_invariants(c.rhs);
  c.i7 = i7_branchC(c.inv);
  c.M = branch_coframe(c.inv, Roots{}, c.i7, Branch::C);
  return c;
}

void expect_table(const StructureFunctions& sf, const std::vector<cartan::testing::TableEntry>& table) {
  for (int i = 1; i <= 4; ++i) {
    for (auto [j0, k0] : kWedgePairs) {
      int j = j0 + 1, k = k0 + 1;
      Scalar want = 0;
      for (const auto& e : table)
        if (e.i == i && e.j == j && e.k == k) want = Scalar::rational(e.num, e.den);
      const Constancy& c = sf.constancy_of(i, j, k);
      ASSERT_TRUE(c.constant) << "C" << i << "_" << j << k;
      ASSERT_TRUE(c.exact.has_value()) << "C" << i << "_" << j << k;
      EXPECT_EQ(*c.exact, want) << "C" << i << "_" << j << k << " = " << c.exact->to_string();
    }
  }
}

}  // namespace

TEST(BaseCoframe, Components) {
  OdeRhs f = make_rhs(exp(-q));
  auto w = base_coframe(f);
  EXPECT_EQ(w[0], form(-p, 1, 0, 0));
  EXPECT_EQ(w[1], form(-q, 0, 1, 0));
  EXPECT_EQ(w[2], form(-exp(-q), 0, 0, 1));
  EXPECT_EQ(w[3], form(1, 0, 0, 0));
  EXPECT_EQ(base_coframe(make_rhs(Expr(0)))[2], form(0, 0, 0, 1));
}

TEST(TwoForm, Antisymmetry) {
  TwoForm t;
  t.add(2, 0, x);
  EXPECT_EQ(t.at(0, 2), -x);
  EXPECT_EQ(t.at(2, 0), x);
  t.add(0, 2, x);
  EXPECT_TRUE(t.at(0, 2).is_zero());
  EXPECT_THROW(t.at(1, 1), std::exception);
  EXPECT_EQ(TwoForm::slot(2, 3), 5);
}

TEST(ExteriorDerivative, Examples) {
  OdeRhs f = make_rhs(exp(-q));
  auto w = base_coframe(f);
  TwoForm dw1 = exterior_derivative(w[0]);
  EXPECT_EQ(dw1.at(0, 2), Expr(1));  // dx ^ dp
  for (auto [s, t] : kWedgePairs)
    if (!(s == 0 && t == 2)) EXPECT_TRUE(dw1.at(s, t).is_zero());
  TwoForm in_omega = to_omega_basis(dw1, f);
  EXPECT_EQ(in_omega.at(1, 3), Expr(-1));  // -w2 ^ w4
  EXPECT_TRUE(all_zero(minus(in_omega, [&] {
    TwoForm t;
    t.set(1, 3, Expr(-1));
    return t;
  }())));

  EXPECT_TRUE(all_zero(exterior_derivative(w[3])));
  TwoForm d_udx = exterior_derivative(form(u, 0, 0, 0));
  EXPECT_EQ(d_udx.at(1, 0), Expr(1));  // du ^ dx
}

TEST(ExteriorDerivative, OmegaBasisAgrees) {
  cartan::testing::RandomExpr gen(21);
  for (int n = 0; n < 20; ++n) {
    OdeRhs f = make_rhs(gen(2));
    OneForm g = form(gen(2), gen(2), gen(2), gen(2));
    auto w = base_coframe(f);
    OneForm coords = OneForm::Constant(Expr(0));
    for (int j = 0; j < 4; ++j) coords += g(j) * w[j];
    TwoForm direct = to_omega_basis(exterior_derivative(coords), f);
    EXPECT_TRUE(all_zero(minus(direct, exterior_derivative_omega(g, f))));
  }
}

TEST(ThetaBasis, IdentityAndDiagonal) {
  TwoForm t;
  for (int s = 0; s < 6; ++s) t.coefficients()(s) = Expr(s + 1) * x;
  CoframeMatrix Id = CoframeMatrix::Constant(Expr(0));
  for (int i = 0; i < 4; ++i) Id(i, i) = 1;
  EXPECT_EQ(to_theta_basis(t, Id).coefficients(), t.coefficients());

  std::array<Expr, 4> d{2, u, p + 1, Expr(3) * q};
  CoframeMatrix D = CoframeMatrix::Constant(Expr(0));
  for (int i = 0; i < 4; ++i) D(i, i) = d[i];
  TwoForm td = to_theta_basis(t, D);
  for (auto [j, k] : kWedgePairs) EXPECT_TRUE(zero(td.at(j, k) - t.at(j, k) / (d[j] * d[k])));
}

TEST(Inverse, PatternAndProduct) {
  cartan::testing::RandomExpr gen(22);
  CoframeMatrix M = CoframeMatrix::Constant(Expr(0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) M(i, j) = gen(1);
  M(3, 0) = gen(1);
  M(3, 3) = gen(1);
  ASSERT_TRUE(has_coframe_pattern(M));
  CoframeMatrix P = inverse(M) * M;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_TRUE(zero(P(i, j) - Expr(i == j ? 1 : 0)));
  M(0, 3) = x;
  EXPECT_FALSE(has_coframe_pattern(M));
  EXPECT_THROW(inverse(M), SingularCoframe);
}

TEST(BranchCoframe, BranchC) {
  BranchC c = branch_c("u2^(3/2)");
  EXPECT_TRUE(zero(c.M(3, 3) - pow(c.i7.value, 2) / c.inv.I6));
  EXPECT_TRUE(is_zero(c.M(3, 3)).nonzero());
  EXPECT_TRUE(has_coframe_pattern(c.M));
  I7Result vanishing = c.i7;
  vanishing.value = 0;
  EXPECT_THROW(branch_coframe(c.inv, Roots{}, vanishing, Branch::C), SingularCoframe);
  EXPECT_THROW(branch_coframe(c.inv, Roots{}, std::nullopt, Branch::C), PreconditionError);
  EXPECT_THROW(branch_coframe(c.inv, Roots{}, c.i7, Branch::D), PreconditionError);
}

TEST(BranchCoframe, BranchA) {
  OdeRhs f = make_rhs(exp(-q));
  BaseInvariants inv = base_invariants(f);
  CoframeMatrix M = branch_coframe(inv, roots(inv, Branch::A, 4, 1), std::nullopt, Branch::A);
  EXPECT_TRUE(has_coframe_pattern(M));
  for (auto [i, j] : {std::pair{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}, {3, 0}, {3, 3}})
    EXPECT_TRUE(is_zero(M(i, j)).nonzero()) << i << j;
  EXPECT_TRUE(is_zero(M(0, 0) * M(1, 1) * M(2, 2) * M(3, 3)).nonzero());
}

TEST(StructureFunctions, ThreeHalvesTable) {
  BranchC c = branch_c("u2^(3/2)");
  StructureFunctions sf = structure_functions(c.M, c.rhs);
  EXPECT_TRUE(sf.all_constant());
  expect_table(sf, cartan::testing::kQ3HalvesTable);
}

TEST(StructureFunctions, CubicTable) {
  BranchC c = branch_c("u2^3");
  StructureFunctions sf = structure_functions(c.M, c.rhs);
  EXPECT_TRUE(sf.all_constant());
  expect_table(sf, cartan::testing::kQCubedTable);
  EXPECT_EQ(*sf.constancy_of(3, 1, 2).exact, Scalar::rational(-4, 3125));
}

TEST(StructureFunctions, ReconstructionResidual) {
  struct Case {
    const char* f;
    Branch b;
    int r, s;
  };
  for (const Case& c : {Case{"exp(-u2)", Branch::A, 4, 1}, Case{"u2^(1/2)", Branch::A, -8, -1},
                        Case{"2*u2^2/u1", Branch::B, 1, 0}, Case{"u2^2", Branch::B, 4, 0},
                        Case{"u2^3", Branch::C, 0, 0}}) {
    OdeRhs rhs = parse_rhs(c.f);
    BaseInvariants inv = base_invariants(rhs);
    Roots rt;
    std::optional<I7Result> i7;
    if (c.b == Branch::A) rt = roots(inv, Branch::A, c.r, c.s);
    if (c.b == Branch::B) {
      rt = roots(inv, Branch::B, c.r);
      i7 = i7_branchB(inv, rt);
    }
    if (c.b == Branch::C) i7 = i7_branchC(inv);
    CoframeMatrix M = branch_coframe(inv, rt, i7, c.b);
    StructureFunctions sf = structure_functions(M, rhs);
    EXPECT_TRUE(sf.all_constant()) << c.f;
    for (const TwoForm& res : reconstruction_residual(M, rhs, sf)) EXPECT_TRUE(all_zero(res)) << c.f;
  }
}

TEST(StructureFunctions, NonConstantDetected) {
  // The q^(3/2) coframe paired with a different equation.
  BranchC c = branch_c("u2^(3/2)");
  EXPECT_FALSE(structure_functions(c.M, parse_rhs("u2^3")).all_constant());
}

TEST(Constancy, SymbolicAndExact) {
  Constancy c = test_constancy(pow(x + 1, 2) - pow(x, 2) - 2 * x + r(1, 3));
  EXPECT_TRUE(c.constant);
  ASSERT_TRUE(c.exact);
  EXPECT_EQ(*c.exact, Scalar::rational(4, 3));
  EXPECT_FALSE(test_constancy(x * p).constant);
  Constancy s = test_constancy(sqrt(Expr(2)) + 0 * x);
  EXPECT_TRUE(s.constant);
  EXPECT_FALSE(s.exact.has_value());
  EXPECT_NEAR(s.value.real(), std::sqrt(2.0), 1e-12);
}

TEST(ProlongedCoframe, CanonicalStructureEquations) {
  // On the section a1 = 1, a2 = 0 the six forms satisfy the e-structure
  // equations of the canonical branch-D equation.
  OdeRhs canon = parse_rhs("3/2*u2^2/u1");
  BaseInvariants inv = base_invariants(canon);
  Roots rt = roots(inv, Branch::D);
  ProlongedInvariants pinv = prolonged_invariants(inv, rt, canon, Expr(1), Expr(0));
  Matrix6 P = prolonged_coframe(inv, rt, pinv, Expr(1), Expr(0));
  std::array<OneForm, 6> f;
  for (int i = 0; i < 6; ++i) f[i] = form(P(i, 0), P(i, 1), P(i, 2), P(i, 3));
  auto d = [&](int i) { return exterior_derivative_omega(f[i], canon); };
  const OneForm &t1 = f[0], &t2 = f[1], &t3 = f[2], &t4 = f[3], &pi1 = f[4], &pi2 = f[5];
  auto sum = [](TwoForm a, const TwoForm& b) {
    a.coefficients() += b.coefficients();
    return a;
  };
  auto neg = [](TwoForm a) {
    a.coefficients() = -a.coefficients();
    return a;
  };
  EXPECT_TRUE(all_zero(minus(d(0), sum(neg(wedge(t1, pi1)), neg(wedge(t2, t4))))));
  EXPECT_TRUE(all_zero(minus(d(1), sum(neg(wedge(t1, pi2)), neg(wedge(t3, t4))))));
  EXPECT_TRUE(all_zero(minus(d(2), sum(neg(wedge(t2, pi2)), wedge(t3, pi1)))));
  EXPECT_TRUE(all_zero(minus(d(3), sum(wedge(t1, t2), neg(wedge(t4, pi1))))));
  EXPECT_TRUE(all_zero(minus(d(4), sum(neg(wedge(t1, t3)), wedge(t4, pi2)))));
  EXPECT_TRUE(all_zero(minus(d(5), sum(neg(wedge(t2, t3)), neg(wedge(pi1, pi2))))));
}
