#include "cartan/classify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cartan {

using namespace sym;
using cd = std::complex<double>;

const char* to_string(Family f) {
  switch (f) {
    case Family::ExpQ:
      return "ExpQ";
    case Family::PowerB:
      return "PowerB";
    case Family::AlphaQ2P:
      return "AlphaQ2P";
    case Family::Q2:
      return "Q2";
    case Family::XSqrt:
      return "XSqrt";
    case Family::Q3Halves:
      return "Q3Halves";
    case Family::QCubed:
      return "QCubed";
    case Family::ThreeHalvesQ2P:
      return "ThreeHalvesQ2P";
  }
  return "?";
}

std::optional<Family> family_from_string(std::string_view name) {
  for (Family f : {Family::ExpQ, Family::PowerB, Family::AlphaQ2P, Family::Q2, Family::XSqrt,
                   Family::Q3Halves, Family::QCubed, Family::ThreeHalvesQ2P}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

Branch branch_of(Family f) {
  switch (f) {
    case Family::ExpQ:
    case Family::PowerB:
      return Branch::A;
    case Family::AlphaQ2P:
    case Family::Q2:
      return Branch::B;
    case Family::XSqrt:
    case Family::Q3Halves:
    case Family::QCubed:
      return Branch::C;
    case Family::ThreeHalvesQ2P:
      return Branch::D;
  }
  return Branch::Unclassified;
}

bool has_parameter(Family f) {
  return f == Family::PowerB || f == Family::AlphaQ2P || f == Family::XSqrt;
}

const char* to_string(ZeroPolicy p) {
  return p == ZeroPolicy::Strict ? "strict" : "assume-nonzero";
}

Expr canonical_rhs(Family f, const Scalar& c) {
  Expr x = var_x(), p = var_p(), q = var_q();
  switch (f) {
    case Family::ExpQ:
      return exp(-q);
    case Family::PowerB:
      return pow(q, Expr((c - 2) / (c - 1)));
    case Family::AlphaQ2P:
      return Expr(c) * pow(q, 2) / p;
    case Family::Q2:
      return pow(q, 2);
    case Family::XSqrt:
      return 3 * pow(q, 2) / p +
             Expr(c) * pow(2 * x * q + p, Expr::rational(3, 2)) / (pow(x, 2) * sqrt(p));
    case Family::Q3Halves:
      return pow(q, Expr::rational(3, 2));
    case Family::QCubed:
      return pow(q, 3);
    case Family::ThreeHalvesQ2P:
      return Expr::rational(3, 2) * pow(q, 2) / p;
  }
  throw std::logic_error("unknown family");
}

bool excluded_parameter(Family f, cd v, double tol) {
  auto near = [&](double t) { return std::abs(v - t) <= tol; };
  switch (f) {
    case Family::PowerB:
      return near(-1) || near(0) || near(0.5) || near(1) || near(2);
    case Family::AlphaQ2P:
      return near(0) || near(1.5) || near(3);
    case Family::XSqrt:
      return near(0);
    default:
      return false;
  }
}

cd beta_cubed(cd a) { return 2.0 * a * a * a - 9.0 * a * a + 9.0 * a; }
cd gamma_squared(cd a) { return a * a - 3.0 * a; }
cd lambda_of(cd a) { return (3.0 * a * a + 4.0) / (16.0 * a * a); }

namespace {

struct Table {
  ConstantTable t{};
  void operator()(int i, int j, int k, cd v) { t[i - 1][TwoForm::slot(j - 1, k - 1)] = v; }
};

cd unit_root(int k, int n) { return std::polar(1.0, 2 * std::numbers::pi * k / n); }

std::vector<cd> all_roots(cd z, int n) {
  std::vector<cd> out;
  cd base = std::pow(z, 1.0 / n);
  for (int k = 0; k < n; ++k) out.push_back(base * unit_root(k, n));
  return out;
}

ConstantTable table_expq(cd A, double B) {
  Table T;
  auto A2 = A * A, A3 = A2 * A, A4 = A3 * A, A5 = A4 * A;
  T(1, 1, 2, 0.5 * A5 * B);
  T(1, 1, 3, 4.0 * A * B);
  T(1, 1, 4, 9.0 / 4 * A4);
  T(1, 2, 4, -1);
  T(2, 1, 2, 17.0 / 16 * A3 * B);
  T(2, 1, 3, -2.0 * A5 * B);
  T(2, 1, 4, -11.0 / 32 * A2);
  T(2, 2, 3, 2.0 * A * B);
  T(2, 2, 4, 2.0 * A4);
  T(2, 3, 4, -1);
  T(3, 1, 2, 1.0 / 32 * A * B);
  T(3, 1, 3, 17.0 / 8 * A3 * B);
  T(3, 1, 4, 0.25);
  T(3, 2, 3, -0.5 * A5 * B);
  T(3, 2, 4, -11.0 / 32 * A2);
  T(3, 3, 4, 7.0 / 4 * A4);
  T(4, 1, 3, 1);
  T(4, 1, 4, 25.0 / 16 * A3 * B);
  T(4, 2, 4, -A5 * B);
  T(4, 3, 4, -2.0 * A * B);
  return T.t;
}

ConstantTable table_powerb(cd A, double B, cd b, cd al, cd be) {
  Table T;
  auto A2 = A * A, A3 = A2 * A, A4 = A3 * A, A5 = A4 * A;
  auto b2 = b * b, b3 = b2 * b, b4 = b3 * b, b5 = b4 * b;
  auto be2 = be * be, be3 = be2 * be, be4 = be3 * be, be5 = be4 * be;
  cd mid = (4.0 * b4 + 4.0 * b3 - 27.0 * b2 + 4.0 * b + 4.0) / (32.0 * be4 * b2) * A2;
  T(1, 1, 2, -al / (2.0 * be * b2) * A5 * B);
  T(1, 1, 3, 2.0 * be * (b + 1.0) / al * A * B);
  T(1, 1, 4, (8.0 * b2 + 3.0 * b - 2.0) / (4.0 * be2 * b) * A4);
  T(1, 2, 4, -1);
  T(2, 1, 2,
    -(4.0 * b5 + 4.0 * b4 - 11.0 * b3 - 34.0 * b2 + 12.0 * b + 8.0) / (16.0 * al * be3 * b2) * A3 * B);
  T(2, 1, 3, al * (3.0 * b + 1.0) / (2.0 * be * b2) * A5 * B);
  T(2, 1, 4, mid);
  T(2, 2, 3, 2.0 * be * b / al * A * B);
  T(2, 2, 4, (1.0 + b) / be2 * A4);
  T(2, 3, 4, -1);
  T(3, 1, 2,
    -al * al * al * (4.0 * b4 + 8.0 * b3 - 3.0 * b2 - 9.0 * b - 2.0) / (64.0 * be5 * b5) * A * B);
  T(3, 1, 3, -(4.0 * b5 - 5.0 * b3 - 13.0 * b2 - 16.0 * b - 4.0) / (16.0 * al * be3 * b2) * A3 * B);
  T(3, 1, 4, -1.0 / 8);
  T(3, 2, 3, al / (2.0 * be * b) * A5 * B);
  T(3, 2, 4, mid);
  T(3, 3, 4, (5.0 * b + 2.0) / (4.0 * be2 * b) * A4);
  T(4, 1, 3, -1);
  T(4, 1, 4, -(20.0 * b4 - 30.0 * b3 - 23.0 * b2 + 4.0 * b + 4.0) / (16.0 * al * be3 * b2) * A3 * B);
  T(4, 2, 4, al * (b + 1.0) / (2.0 * be * b2) * A5 * B);
  T(4, 3, 4, -2.0 * be / al * A * B);
  return T.t;
}

ConstantTable table_alphaq2p(cd A, double B, cd al, cd be, cd ga) {
  Table T;
  auto A2 = A * A;
  auto g2 = ga * ga;
  cd t = 2.0 * al - 3.0;
  T(1, 1, 2, -t / ga * B);
  T(1, 1, 3, -be / ga * A * B);
  T(1, 1, 4, -t / be * A2);
  T(1, 2, 4, -1);
  T(2, 1, 2, -3.0 * (g2 + 3.0) / (be * ga) * A2 * B);
  T(2, 1, 3, -t / ga * B);
  T(2, 1, 4, -3.0 * (g2 + 3.0) / (2.0 * be * be) * A);
  T(2, 2, 4, -be * be / g2 * A2);
  T(2, 3, 4, -1);
  T(3, 1, 2, -t * (g2 + 9.0) / (2.0 * be * be * ga) * A * B);
  T(3, 1, 3, -3.0 * (g2 + 3.0) / (2.0 * be * ga) * A2 * B);
  T(3, 1, 4, 1);
  T(3, 2, 4, -3.0 * (g2 + 3.0) / (2.0 * be * be) * A);
  T(3, 3, 4, -t / be * A2);
  T(4, 1, 2, -1);
  T(4, 1, 4, -(5.0 * g2 + 9.0) / (2.0 * be * ga) * A2 * B);
  T(4, 3, 4, be / ga * A * B);
  return T.t;
}

ConstantTable table_q2(cd A, double B) {
  Table T;
  auto A2 = A * A;
  T(1, 1, 2, -2.0 * B);
  T(1, 1, 3, -2.0 * A * B);
  T(1, 1, 4, -A2);
  T(1, 2, 4, -1);
  T(2, 1, 2, -1.5 * A2 * B);
  T(2, 1, 3, -2.0 * B);
  T(2, 1, 4, -3.0 / 8 * A);
  T(2, 2, 4, -A2);
  T(2, 3, 4, -1);
  T(3, 1, 2, -0.25 * A * B);
  T(3, 1, 3, -0.75 * A2 * B);
  T(3, 1, 4, 0.25);
  T(3, 2, 4, -3.0 / 8 * A);
  T(3, 3, 4, -A2);
  T(4, 1, 2, -1);
  T(4, 1, 4, -1.25 * A2 * B);
  T(4, 3, 4, 2.0 * A * B);
  return T.t;
}

ConstantTable table_xsqrt(cd lambda) {
  Table T;
  T(1, 1, 2, 0.5);
  T(1, 1, 4, 0.25);
  T(1, 2, 4, -1);
  T(2, 1, 2, lambda);
  T(2, 1, 3, 1);
  T(2, 1, 4, -lambda / 2.0);
  T(2, 2, 3, -2);
  T(2, 3, 4, -1);
  T(3, 2, 3, 0.5);
  T(3, 2, 4, -lambda / 2.0);
  T(3, 3, 4, -0.25);
  T(4, 1, 3, 1);
  T(4, 1, 4, -lambda);
  T(4, 3, 4, -2);
  return T.t;
}

ConstantTable table_qcubed() {
  Table T;
  T(1, 1, 2, -2.0 / 5);
  T(1, 1, 3, -15);
  T(1, 1, 4, 1.0 / 25);
  T(1, 2, 4, -1);
  T(2, 1, 2, 2.0 / 125);
  T(2, 1, 3, 1);
  T(2, 2, 3, -5);
  T(2, 2, 4, 2.0 / 25);
  T(2, 3, 4, -1);
  T(3, 1, 2, -4.0 / 3125);
  T(3, 1, 3, -7.0 / 125);
  T(3, 2, 3, 1.0 / 5);
  T(3, 3, 4, 3.0 / 25);
  T(4, 1, 3, 1);
  T(4, 1, 4, -1.0 / 125);
  T(4, 2, 4, 3.0 / 5);
  T(4, 3, 4, 10);
  return T.t;
}

double residual(const StructureFunctions& sf, const ConstantTable& t) {
  double r = 0;
  for (int i = 0; i < 4; ++i) {
    for (int s = 0; s < 6; ++s) {
      double d = std::abs(sf.constancy[i][s].value - t[i][s]);
      if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
      r = std::max(r, d);
    }
  }
  return r;
}

std::optional<Scalar> snap(cd v, long max_den, double tol) { return snap_scalar(v, max_den, tol); }

ParameterEstimate estimate(cd v) {
  ParameterEstimate e;
  e.value = v;
  e.exact = snap(v, 100, 1e-9);
  return e;
}

cd value_of(const ParameterEstimate& p) {
  return p.exact ? p.exact->to_complex() : p.value;
}

}  // namespace

ParameterEstimate recover_b(const StructureFunctions& sf) {
  const Constancy& c112 = sf.constancy_of(1, 1, 2);
  const Constancy& c223 = sf.constancy_of(2, 2, 3);
  if (!c112.constant || !c223.constant) throw RecoveryError("b relation needs constant T1_12, T2_23");
  cd prod = c112.value * c223.value;
  if (std::abs(prod) < 1e-12) throw RecoveryError("T1_12 T2_23 vanishes");
  ParameterEstimate e = estimate(-1.0 / prod);
  if (excluded_parameter(Family::PowerB, value_of(e))) {
    throw RecoveryError("recovered b lies in the excluded set");
  }
  return e;
}

std::vector<ParameterEstimate> alpha_from_kappa(cd kappa) {
  if (std::abs(kappa) < 1e-12) throw RecoveryError("J4_q/J5 vanishes");
  cd k6 = std::pow(kappa, 6);
  // beta^6 - k^6 gamma^6 = a^2 [(2a^2 - 9a + 9)^2 - k^6 a (a - 3)^3]; the
  // a^2 factor only carries the excluded root a = 0.
  std::vector<cd> quad{9.0, -9.0, 2.0};
  std::vector<cd> poly(5, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) poly[i + j] += quad[i] * quad[j];
  std::vector<cd> cube{-27.0, 27.0, -9.0, 1.0};  // (a - 3)^3
  for (int i = 0; i < 4; ++i) poly[i + 1] -= k6 * cube[i];
  double scale = 0;
  for (auto c : poly) scale = std::max(scale, std::abs(c));
  while (poly.size() > 1 && std::abs(poly.back()) < 1e-12 * scale) poly.pop_back();
  int n = static_cast<int>(poly.size()) - 1;
  if (n < 1) throw RecoveryError("degenerate alpha relation");

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -poly[i] / poly[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp);

  auto eval = [&](cd a) {
    cd v = 0, d = 0;
    for (int i = n; i >= 0; --i) {
      d = d * a + v;
      v = v * a + poly[i];
    }
    return std::pair{v, d};
  };
  std::vector<ParameterEstimate> out;
  for (int i = 0; i < n; ++i) {
    cd a = solver.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      auto [v, d] = eval(a);
      if (std::abs(d) == 0) break;
      a -= v / d;
    }
    ParameterEstimate e = estimate(a);
    cd av = value_of(e);
    if (excluded_parameter(Family::AlphaQ2P, av)) continue;
    cd b3 = beta_cubed(av), g2 = gamma_squared(av);
    e.residual = std::abs(b3 * b3 - k6 * g2 * g2 * g2) / std::max(1.0, std::abs(b3 * b3));
    if (e.residual < 1e-8) out.push_back(e);
  }
  if (out.empty()) throw RecoveryError("no alpha satisfies the kappa relation");
  return out;
}

std::vector<ParameterEstimate> recover_alpha_B(const Roots& rt, const I7Result& i7,
                                               const ZeroTestPolicy& policy) {
  if (!rt.J5 || !i7.J4q) throw RecoveryError("alpha recovery needs J4_q and J5");
  Constancy k = test_constancy(*i7.J4q / *rt.J5, policy);
  if (!k.constant) throw RecoveryError("J4_q/J5 is not constant");
  return alpha_from_kappa(k.value);
}

std::vector<ParameterEstimate> recover_alpha_C(const StructureFunctions& sf) {
  const Constancy& c = sf.constancy_of(2, 1, 2);
  if (!c.constant) throw RecoveryError("T2_12 is not constant");
  cd lambda = c.value;
  if (std::abs(lambda.imag()) > 1e-9) throw RecoveryError("lambda is not real");
  double l = lambda.real();
  if (std::abs(l - 3.0 / 16) <= 1e-9) throw RecoveryError("lambda = 3/16 belongs to Q3Halves");
  if (l < 3.0 / 16) throw RecoveryError("lambda < 3/16 has no real alpha");
  double a = std::sqrt(4.0 / (16 * l - 3));
  std::vector<ParameterEstimate> out{estimate(a), estimate(-a)};
  for (auto& e : out) e.residual = std::abs(lambda_of(value_of(e)) - lambda);
  return out;
}

MatchResult match_canonical(const StructureFunctions& sf, Family family,
                            const std::vector<ParameterEstimate>& parameters, double tol) {
  MatchResult best;
  best.family = family;
  best.residual = std::numeric_limits<double>::infinity();
  if (!sf.all_constant()) return best;

  // Keeps the first matching choice (or the best residual so far); returns
  // true on a match so the caller can stop enumerating.
  auto consider = [&](const ConstantTable& t, int ai, int an, int B,
                      const std::optional<ParameterEstimate>& param,
                      std::map<std::string, cd> aux) {
    double r = residual(sf, t);
    bool hit = r <= tol;
    if (hit && param) best.equivalent_parameters.push_back(*param);
    if (!best.matched && (hit || r < best.residual)) {
      best.matched = hit;
      best.residual = r;
      best.A_index = ai;
      best.A_order = an;
      best.B = B;
      best.parameter = param;
      best.auxiliary = std::move(aux);
    }
    return hit;
  };

  auto powerb = [&](const ParameterEstimate& pb) {
    cd b = value_of(pb);
    for (cd al : all_roots(b * b - 2.0 * b, 2))
      for (cd be : all_roots(2.0 * b * b * b - 3.0 * b * b - 3.0 * b + 2.0, 6))
        for (int k = 0; k < 6; ++k)
          for (int B : {1, -1})
            if (consider(table_powerb(unit_root(k, 6), B, b, al, be), k, 6, B, pb,
                         {{"alpha", al}, {"beta", be}}))
              return;
  };
  auto alphaq2p = [&](const ParameterEstimate& pa) {
    cd a = value_of(pa);
    for (cd be : all_roots(beta_cubed(a), 3))
      for (cd ga : all_roots(gamma_squared(a), 2))
        for (int k = 0; k < 3; ++k)
          for (int B : {1, -1})
            if (consider(table_alphaq2p(unit_root(k, 3), B, a, be, ga), k, 3, B, pa,
                         {{"beta", be}, {"gamma", ga}}))
              return;
  };

  switch (family) {
    case Family::ExpQ:
      for (int k = 0; k < 6 && !best.matched; ++k)
        for (int B : {1, -1})
          if (consider(table_expq(unit_root(k, 6), B), k, 6, B, std::nullopt, {})) break;
      break;
    case Family::Q2:
      for (int k = 0; k < 3 && !best.matched; ++k)
        for (int B : {1, -1})
          if (consider(table_q2(unit_root(k, 3), B), k, 3, B, std::nullopt, {})) break;
      break;
    case Family::PowerB:
      for (const auto& pb : parameters) powerb(pb);
      break;
    case Family::AlphaQ2P:
      for (const auto& pa : parameters) alphaq2p(pa);
      break;
    case Family::XSqrt:
      for (const auto& pa : parameters) {
        cd l = lambda_of(value_of(pa));
        consider(table_xsqrt(l), 0, 1, 1, pa, {{"lambda", l}});
      }
      break;
    case Family::Q3Halves:
      consider(table_xsqrt(3.0 / 16), 0, 1, 1, std::nullopt, {{"lambda", 3.0 / 16}});
      break;
    case Family::QCubed:
      consider(table_qcubed(), 0, 1, 1, std::nullopt, {});
      break;
    case Family::ThreeHalvesQ2P:
      break;
  }
  return best;
}

namespace {

enum class Tri { Zero, NonZero, Unknown };

struct Decider {
  const ClassifyOptions& opt;
  BranchReport& rep;

  Tri operator()(const ZeroVerdict& v, const char* name) const {
    if (v.zero()) return Tri::Zero;
    if (v.nonzero()) return Tri::NonZero;
    if (opt.policy == ZeroPolicy::AssumeNonzero) {
      rep.warnings.push_back(std::string(name) + " zero test inconclusive; assumed nonzero");
      return Tri::NonZero;
    }
    rep.warnings.push_back(std::string(name) + " zero test inconclusive");
    return Tri::Unknown;
  }
};

void unclassified(BranchReport& rep, std::string why) {
  rep.branch = Branch::Unclassified;
  rep.explanation = std::move(why);
}

std::string describe_residual(const MatchResult& m) {
  std::ostringstream os;
  os << to_string(m.family) << " best residual " << m.residual;
  return os.str();
}

// Builds the coframe for `fam`'s (r, s), computes structure functions and
// matches. Returns true on a match and fills the report.
struct Attempt {
  StructureFunctions sf;
  MatchResult match;
};

void adopt(BranchReport& rep, Attempt&& a, int r, int s) {
  rep.family = std::move(a.match);
  rep.structure = std::move(a.sf);
  rep.r = r;
  rep.s = s;
}

void classify_A(const OdeRhs& rhs, const BaseInvariants& inv, const ClassifyOptions& opt,
                BranchReport& rep) {
  std::vector<std::string> tried;
  {
    Roots rt = roots(inv, Branch::A, 4, 1);
    Attempt a{structure_functions(branch_coframe(inv, rt, std::nullopt, Branch::A), rhs, opt.zero), {}};
    if (!a.sf.all_constant()) {
      rep.structure = std::move(a.sf);
      rep.r = 4;
      rep.s = 1;
      return unclassified(rep, "branch A conditions hold but the structure functions are not constant");
    }
    a.match = match_canonical(a.sf, Family::ExpQ);
    if (a.match.matched) {
      rep.branch = Branch::A;
      return adopt(rep, std::move(a), 4, 1);
    }
    tried.push_back(describe_residual(a.match));
  }
  Roots rt = roots(inv, Branch::A, -8, -1);
  Attempt a{structure_functions(branch_coframe(inv, rt, std::nullopt, Branch::A), rhs, opt.zero), {}};
  try {
    ParameterEstimate b = recover_b(a.sf);
    a.match = match_canonical(a.sf, Family::PowerB, {b});
    if (a.match.matched) {
      rep.branch = Branch::A;
      return adopt(rep, std::move(a), -8, -1);
    }
    tried.push_back(describe_residual(a.match));
  } catch (const RecoveryError& e) {
    tried.push_back(std::string("PowerB: ") + e.what());
  }
  rep.structure = std::move(a.sf);
  std::string why = "branch A conditions hold but no canonical family matches (";
  for (std::size_t i = 0; i < tried.size(); ++i) why += (i ? "; " : "") + tried[i];
  unclassified(rep, why + ")");
}

void classify_B(const OdeRhs& rhs, const BaseInvariants& inv, const ClassifyOptions& opt,
                BranchReport& rep, const Decider& decide) {
  Roots rt1 = roots(inv, Branch::B, 1);
  I7Result i7 = i7_branchB(inv, rt1, opt.zero);
  ZeroVerdict j4q = is_zero(*i7.J4q, opt.zero);
  rep.verdicts.J4q = j4q.outcome;
  rep.verdicts.I7 = i7.verdict.outcome;
  Tri t = decide(j4q, "J4_q");
  if (t == Tri::Unknown) return unclassified(rep, "J4_q zero test inconclusive");
  if (t == Tri::Zero) {
    return unclassified(rep, "I4 != 0, I6 = 0, I5 != 0 but J4_q = 0: sub-branch not covered");
  }
  rep.conditions = Branch::B;

  std::vector<std::string> tried;
  {
    Attempt a{structure_functions(branch_coframe(inv, rt1, i7, Branch::B), rhs, opt.zero), {}};
    if (!a.sf.all_constant()) {
      rep.structure = std::move(a.sf);
      rep.r = 1;
      return unclassified(rep, "branch B conditions hold but the structure functions are not constant");
    }
    try {
      auto alphas = recover_alpha_B(rt1, i7, opt.zero);
      a.match = match_canonical(a.sf, Family::AlphaQ2P, alphas);
      if (a.match.matched) {
        rep.branch = Branch::B;
        return adopt(rep, std::move(a), 1, 0);
      }
      tried.push_back(describe_residual(a.match));
    } catch (const RecoveryError& e) {
      tried.push_back(std::string("AlphaQ2P: ") + e.what());
    }
  }
  Roots rt4 = roots(inv, Branch::B, 4);
  I7Result i74 = i7_branchB(inv, rt4, opt.zero);
  Attempt a{structure_functions(branch_coframe(inv, rt4, i74, Branch::B), rhs, opt.zero), {}};
  a.match = match_canonical(a.sf, Family::Q2);
  if (a.match.matched) {
    rep.branch = Branch::B;
    return adopt(rep, std::move(a), 4, 0);
  }
  tried.push_back(describe_residual(a.match));
  rep.structure = std::move(a.sf);
  std::string why = "branch B conditions hold but no canonical family matches (";
  for (std::size_t i = 0; i < tried.size(); ++i) why += (i ? "; " : "") + tried[i];
  unclassified(rep, why + ")");
}

void classify_C(const OdeRhs& rhs, const BaseInvariants& inv, const ClassifyOptions& opt,
                BranchReport& rep, const Decider& decide) {
  I7Result i7 = i7_branchC(inv, opt.zero);
  rep.verdicts.I7 = i7.verdict.outcome;
  Tri t = decide(i7.verdict, "I7");
  if (t == Tri::Unknown) return unclassified(rep, "I7 zero test inconclusive");
  if (t == Tri::Zero) return unclassified(rep, "I4 = 0, I6 != 0 but I7 = 0: sub-branch not covered");
  rep.conditions = Branch::C;

  Attempt a{structure_functions(branch_coframe(inv, {}, i7, Branch::C), rhs, opt.zero), {}};
  if (!a.sf.all_constant()) {
    rep.structure = std::move(a.sf);
    return unclassified(rep, "branch C conditions hold but the structure functions are not constant");
  }
  std::vector<std::string> tried;
  for (Family fam : {Family::Q3Halves, Family::XSqrt, Family::QCubed}) {
    std::vector<ParameterEstimate> params;
    if (fam == Family::XSqrt) {
      try {
        params = recover_alpha_C(a.sf);
      } catch (const RecoveryError& e) {
        tried.push_back(std::string("XSqrt: ") + e.what());
        continue;
      }
    }
    MatchResult m = match_canonical(a.sf, fam, params);
    if (m.matched) {
      rep.branch = Branch::C;
      a.match = std::move(m);
      return adopt(rep, std::move(a), 0, 0);
    }
    tried.push_back(describe_residual(m));
  }
  rep.structure = std::move(a.sf);
  std::string why = "branch C conditions hold but no canonical family matches (";
  for (std::size_t i = 0; i < tried.size(); ++i) why += (i ? "; " : "") + tried[i];
  unclassified(rep, why + ")");
}

void classify_D(const BaseInvariants& inv, const ClassifyOptions& opt, BranchReport& rep) {
  Roots rt = roots(inv, Branch::D);
  I7Result i7 = i7_branchD(inv, rt, opt.zero);
  rep.verdicts.I7 = i7.verdict.outcome;
  if (i7.verdict.inconclusive()) {
    rep.warnings.push_back("I7 zero test inconclusive");
    return unclassified(rep, "I7 zero test inconclusive");
  }
  if (!i7.verdict.zero()) return unclassified(rep, "I4 = I6 = 0, I5 != 0 but I7 != 0: not branch D");
  rep.conditions = Branch::D;
  rep.branch = Branch::D;
  MatchResult m;
  m.matched = true;
  m.family = Family::ThreeHalvesQ2P;
  rep.family = m;
  rep.explanation = "branch D: equivalent to u''' = (3/2) u''^2/u' (six symmetries)";
}

}  // namespace

BranchReport classify(const OdeRhs& rhs, const ClassifyOptions& opt) {
  BudgetScope budget(opt.max_nodes);
  BranchReport rep;
  Decider decide{opt, rep};
  try {
    BaseInvariants inv = base_invariants(rhs, opt.zero);
    rep.verdicts.I4 = inv.I4_verdict.outcome;
    rep.verdicts.I6 = inv.I6_verdict.outcome;
    rep.verdicts.I5 = inv.I5_verdict.outcome;
    Tri i4 = decide(inv.I4_verdict, "I4");
    Tri i6 = decide(inv.I6_verdict, "I6");
    if (i4 == Tri::Unknown || i6 == Tri::Unknown) {
      unclassified(rep, "I4 or I6 zero test inconclusive");
    } else if (i4 == Tri::NonZero && i6 == Tri::NonZero) {
      rep.conditions = Branch::A;
      classify_A(rhs, inv, opt, rep);
    } else if (i6 == Tri::NonZero) {
      classify_C(rhs, inv, opt, rep, decide);
    } else {
      Tri i5 = decide(inv.I5_verdict, "I5");
      if (i5 == Tri::Unknown) {
        unclassified(rep, "I5 zero test inconclusive");
      } else if (i5 == Tri::Zero) {
        unclassified(rep, i4 == Tri::Zero ? "I4 = I5 = I6 = 0: outside the four branches"
                                          : "I4 != 0, I5 = I6 = 0: outside the four branches");
      } else if (i4 == Tri::NonZero) {
        classify_B(rhs, inv, opt, rep, decide);
      } else {
        classify_D(inv, opt, rep);
      }
    }
  } catch (const ResourceError&) {
    throw;
  } catch (const std::exception& e) {
    rep.warnings.push_back(e.what());
    unclassified(rep, std::string("classification failed: ") + e.what());
  }
  if (rep.branch != Branch::Unclassified && rep.explanation.empty()) {
    rep.explanation = std::string("branch ") + to_string(rep.branch) + ": equivalent to " +
                      to_string(rep.family->family);
  }
  return rep;
}

}  // namespace cartan
