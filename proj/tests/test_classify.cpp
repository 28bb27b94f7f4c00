#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "cartan/classify.hpp"

using namespace cartan;
using namespace cartan::sym;

namespace {

Expr p = var_p(), q = var_q();

BranchReport run(const std::string& f) { return classify(parse_rhs(f)); }

bool has_parameter_near(const BranchReport& rep, std::complex<double> want, double tol = 1e-8) {
  if (!rep.family) return false;
  for (const auto& e : rep.family->equivalent_parameters)
    if (std::abs(e.value - want) <= tol) return true;
  return false;
}

StructureFunctions synthetic(std::initializer_list<std::tuple<int, int, int, double>> entries) {
  StructureFunctions sf;
  for (auto& row : sf.constancy)
    for (auto& c : row) c.constant = true;
  for (auto [i, j, k, v] : entries) sf.constancy[i - 1][TwoForm::slot(j - 1, k - 1)].value = v;
  return sf;
}

}  // namespace

TEST(Classify, Examples) {
  BranchReport a = run("exp(-u2)");
  EXPECT_EQ(a.branch, Branch::A);
  ASSERT_TRUE(a.family);
  EXPECT_EQ(a.family->family, Family::ExpQ);
  EXPECT_EQ(a.r, 4);
  EXPECT_EQ(a.s, 1);

  BranchReport d = run("3*u1*u2^2/(1+u1^2)");
  EXPECT_EQ(d.branch, Branch::D);
  ASSERT_TRUE(d.family);
  EXPECT_EQ(d.family->family, Family::ThreeHalvesQ2P);
  EXPECT_FALSE(d.structure.has_value());

  BranchReport z = run("0");
  EXPECT_EQ(z.branch, Branch::Unclassified);
  EXPECT_FALSE(z.family.has_value());
  EXPECT_FALSE(z.explanation.empty());
}

TEST(Classify, EveryTableFamily) {
  struct Case {
    std::string f;
    Branch b;
    Family fam;
  };
  for (const Case& c : {Case{"exp(-u2)", Branch::A, Family::ExpQ},
                        Case{"u2^(1/2)", Branch::A, Family::PowerB},
                        Case{"2*u2^2/u1", Branch::B, Family::AlphaQ2P},
                        Case{"u2^2", Branch::B, Family::Q2},
                        Case{"3*u2^2/u1 + (2*x*u2 + u1)^(3/2)/(x^2*sqrt(u1))", Branch::C, Family::XSqrt},
                        Case{"u2^(3/2)", Branch::C, Family::Q3Halves},
                        Case{"u2^3", Branch::C, Family::QCubed},
                        Case{"3/2*u2^2/u1", Branch::D, Family::ThreeHalvesQ2P}}) {
    BranchReport rep = run(c.f);
    EXPECT_EQ(rep.branch, c.b) << c.f << ": " << rep.explanation;
    EXPECT_EQ(rep.conditions, c.b) << c.f;
    ASSERT_TRUE(rep.family) << c.f;
    EXPECT_TRUE(rep.family->matched) << c.f;
    EXPECT_EQ(rep.family->family, c.fam) << c.f;
    EXPECT_EQ(branch_of(c.fam), c.b);
    if (c.b != Branch::D) {
      ASSERT_TRUE(rep.structure) << c.f;
      EXPECT_TRUE(rep.structure->all_constant()) << c.f;
      EXPECT_LE(rep.family->residual, kMatchTolerance) << c.f;
    }
  }
}

TEST(Classify, BranchDConditions) {
  for (const char* f : {"3/2*u2^2/u1", "3*u1*u2^2/(1+u1^2)"}) {
    BranchReport rep = run(f);
    EXPECT_EQ(rep.branch, Branch::D) << f;
    EXPECT_EQ(rep.verdicts.I4, ZeroOutcome::Zero) << f;
    EXPECT_EQ(rep.verdicts.I6, ZeroOutcome::Zero) << f;
    EXPECT_EQ(rep.verdicts.I5, ZeroOutcome::NonZero) << f;
    EXPECT_EQ(rep.verdicts.I7, ZeroOutcome::Zero) << f;
  }
  BranchReport perturbed = run("1.6*u2^2/u1");
  EXPECT_NE(perturbed.branch, Branch::D);
  EXPECT_NE(perturbed.conditions, Branch::D);
  EXPECT_EQ(perturbed.verdicts.I4, ZeroOutcome::NonZero);
}

TEST(Classify, SubBranchGapsAreUnclassified) {
  for (const char* f : {"x^3*u", "-u", "0", "u2"}) {
    BranchReport rep = run(f);
    EXPECT_EQ(rep.branch, Branch::Unclassified) << f;
    EXPECT_FALSE(rep.explanation.empty()) << f;
  }
}

TEST(Classify, NonConstantStructureIsUnclassified) {
  // Branch-A conditions hold but the structure functions are not constant.
  BranchReport rep = run("exp(-u2) + u2^3");
  EXPECT_EQ(rep.conditions, Branch::A);
  EXPECT_EQ(rep.branch, Branch::Unclassified);
  EXPECT_FALSE(rep.explanation.empty());
}

TEST(Classify, BranchDisjointnessOnCorpus) {
  std::ifstream in(CARTAN_CORPUS);
  ASSERT_TRUE(in);
  for (const auto& entry : nlohmann::json::parse(in)) {
    std::string f = entry["ode"];
    BaseInvariants inv = base_invariants(parse_rhs(f));
    bool I4 = inv.I4_verdict.nonzero(), I6 = inv.I6_verdict.nonzero(), I5 = inv.I5_verdict.nonzero();
    int candidates = 0;
    candidates += I4 && I6;
    candidates += I4 && !I6 && I5;
    candidates += !I4 && I6;
    candidates += !I4 && !I6 && I5;
    EXPECT_LE(candidates, 1) << f;
    BranchReport rep = run(f);
    EXPECT_EQ(to_string(rep.branch), entry["expected_branch"].get<std::string>()) << f;
    if (rep.branch != Branch::Unclassified) {
      EXPECT_EQ(candidates, 1) << f;
    }
  }
}

TEST(RecoverB, PowerFamily) {
  for (long b : {3, 4, -2, 5}) {
    Expr f = canonical_rhs(Family::PowerB, Scalar(b));
    EXPECT_EQ(f, pow(q, Expr::rational(b - 2, b - 1)));
    BranchReport rep = classify(make_rhs(f));
    ASSERT_EQ(rep.branch, Branch::A) << b;
    ASSERT_TRUE(rep.structure);
    ParameterEstimate est = recover_b(*rep.structure);
    EXPECT_NEAR(est.value.real(), double(b), 1e-8) << b;
    EXPECT_NEAR(est.value.imag(), 0, 1e-8) << b;
    ASSERT_TRUE(est.exact) << b;
    EXPECT_EQ(*est.exact, Scalar(b));
    EXPECT_EQ(rep.family->family, Family::PowerB);
    EXPECT_TRUE(has_parameter_near(rep, double(b))) << b;
  }
}

TEST(RecoverB, Errors) {
  EXPECT_THROW(recover_b(synthetic({})), RecoveryError);
  StructureFunctions sf = synthetic({{1, 1, 2, 0.5}, {2, 2, 3, -2.0 / 3}});
  EXPECT_NEAR(recover_b(sf).value.real(), 3.0, 1e-12);
  EXPECT_THROW(recover_b(synthetic({{1, 1, 2, 0.5}, {2, 2, 3, -1.0}})), RecoveryError);
  StructureFunctions nonconst = synthetic({{1, 1, 2, 0.5}, {2, 2, 3, -2.0 / 3}});
  nonconst.constancy[0][0].constant = false;
  EXPECT_THROW(recover_b(nonconst), RecoveryError);
}

TEST(ParameterRelations, AlphaOne) {
  EXPECT_NEAR(std::abs(beta_cubed(1.0) - 2.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(gamma_squared(1.0) + 2.0), 0, 1e-15);
  std::complex<double> k6 = std::pow(beta_cubed(1.0), 2) / std::pow(gamma_squared(1.0), 3);
  EXPECT_NEAR(std::abs(k6 + 0.5), 0, 1e-15);
  for (double a : {0.5, 1.0, 2.0, 7.0}) EXPECT_NEAR(std::abs(lambda_of(a) - lambda_of(-a)), 0, 1e-15);
  for (double a : {1.0, 2.0, 5.0}) {
    double lam = lambda_of(a).real();
    EXPECT_NEAR(4 / (16 * lam - 3), a * a, 1e-12);
  }
}

TEST(RecoverAlphaB, FromKappa) {
  // kappa = -i / 2^(1/6) for the quadratic example.
  std::complex<double> kappa = std::complex<double>(0, -1) / std::pow(2.0, 1.0 / 6);
  bool found = false;
  for (const auto& e : alpha_from_kappa(kappa)) {
    found = found || std::abs(e.value - 1.0) < 1e-8;
    EXPECT_LT(e.residual, 1e-8);
    EXPECT_FALSE(excluded_parameter(Family::AlphaQ2P, e.value));
  }
  EXPECT_TRUE(found);
  EXPECT_THROW(alpha_from_kappa(0.0), RecoveryError);
}

TEST(RecoverAlphaB, QuadraticExample) {
  OdeRhs src = parse_rhs("(u^2*u2^2 + 2*u*u1^2*u2 - 2*u1^4)/(u^2*u1)");
  BaseInvariants inv = base_invariants(src);
  Roots rt = roots(inv, Branch::B);
  I7Result i7 = i7_branchB(inv, rt);
  Constancy k = test_constancy(*i7.J4q / *rt.J5);
  ASSERT_TRUE(k.constant);
  EXPECT_NEAR(std::abs(std::pow(k.value, 6) + 0.5), 0, 1e-9);
  bool found = false;
  for (const auto& e : recover_alpha_B(rt, i7)) found = found || std::abs(e.value - 1.0) < 1e-8;
  EXPECT_TRUE(found);
}

TEST(RecoverAlphaC, Lambda) {
  auto pm = [](double lambda) { return recover_alpha_C(synthetic({{2, 1, 2, lambda}})); };
  auto one = pm(7.0 / 16);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_NEAR(std::abs(one[0].value) , 1.0, 1e-12);
  EXPECT_NEAR(std::abs(one[0].value + one[1].value), 0, 1e-12);
  auto two = pm(0.25);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(std::abs(two[0].value), 2.0, 1e-12);
  EXPECT_THROW(pm(3.0 / 16), RecoveryError);
  EXPECT_THROW(pm(0.1), RecoveryError);
  EXPECT_EQ(run("u2^(3/2)").family->family, Family::Q3Halves);
}

TEST(MatchCanonical, BranchCTables) {
  BranchReport half = run("u2^(3/2)");
  BranchReport cube = run("u2^3");
  ASSERT_TRUE(half.structure && cube.structure);
  EXPECT_TRUE(match_canonical(*half.structure, Family::Q3Halves).matched);
  EXPECT_TRUE(match_canonical(*cube.structure, Family::QCubed).matched);
  MatchResult miss = match_canonical(*half.structure, Family::QCubed);
  EXPECT_FALSE(miss.matched);
  EXPECT_GT(miss.residual, kMatchTolerance);
}

TEST(ParameterRoundTrip, AlphaFamilies) {
  for (long a : {1, 2}) {
    BranchReport b = classify(make_rhs(canonical_rhs(Family::AlphaQ2P, Scalar(a))));
    EXPECT_EQ(b.family->family, Family::AlphaQ2P);
    EXPECT_TRUE(has_parameter_near(b, double(a))) << a;
    EXPECT_TRUE(has_parameter_near(b, double(3 - a))) << a;
    BranchReport c = classify(make_rhs(canonical_rhs(Family::XSqrt, Scalar(a))));
    EXPECT_EQ(c.family->family, Family::XSqrt);
    EXPECT_TRUE(has_parameter_near(c, double(a))) << a;
  }
}

TEST(Exclusions, Parameters) {
  for (double b : {-1.0, 0.0, 0.5, 1.0, 2.0}) EXPECT_TRUE(excluded_parameter(Family::PowerB, b)) << b;
  EXPECT_FALSE(excluded_parameter(Family::PowerB, 3.0));
  for (double a : {0.0, 1.5, 3.0}) EXPECT_TRUE(excluded_parameter(Family::AlphaQ2P, a)) << a;
  EXPECT_FALSE(excluded_parameter(Family::AlphaQ2P, 1.0));
  EXPECT_TRUE(excluded_parameter(Family::XSqrt, 0.0));
  EXPECT_EQ(family_from_string("PowerB"), Family::PowerB);
  EXPECT_FALSE(family_from_string("nope").has_value());
}

TEST(Classify, BudgetErrorsPropagate) {
  ClassifyOptions opt;
  opt.max_nodes = 20;
  EXPECT_THROW(classify(parse_rhs("3*u1*u2^2/(1+u1^2)"), opt), ResourceError);
}

TEST(Classify, DeterministicForSeed) {
  ClassifyOptions opt;
  opt.zero.seed = 1234;
  BranchReport a = classify(parse_rhs("u2^2/u1"), opt), b = classify(parse_rhs("u2^2/u1"), opt);
  ASSERT_TRUE(a.family && b.family);
  EXPECT_EQ(a.family->parameter->value, b.family->parameter->value);
  EXPECT_EQ(a.family->residual, b.family->residual);
}
