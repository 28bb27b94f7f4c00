#include "cartan/coframe.hpp"

#include <cmath>
#include <random>

namespace cartan {

using namespace sym;

int TwoForm::slot(int i, int j) {
  if (i < 0 || j < 0 || i > 3 || j > 3 || i == j) throw std::out_of_range("bad wedge index");
  if (i > j) std::swap(i, j);
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return table[i][j];
}

Expr TwoForm::at(int i, int j) const {
  const Expr& v = c_(slot(i, j));
  return i < j ? v : -v;
}

void TwoForm::add(int i, int j, const Expr& v) {
  if (v.is_zero()) return;
  Expr& c = c_(slot(i, j));
  c = i < j ? c + v : c - v;
}

void TwoForm::set(int i, int j, const Expr& v) { c_(slot(i, j)) = i < j ? v : -v; }

namespace {

const std::array<std::string, 4> kCoords{kX, kU, kP, kQ};

// Coordinate differentials in the w basis, rows (dx, du, dp, dq).
CoframeMatrix coordinates_in_omega(const OdeRhs& rhs) {
  CoframeMatrix K = CoframeMatrix::Constant(Expr(0));
  K(0, 3) = 1;
  K(1, 0) = 1;
  K(1, 3) = var_p();
  K(2, 1) = 1;
  K(2, 3) = var_q();
  K(3, 2) = 1;
  K(3, 3) = rhs.f;
  return K;
}

bool structurally_zero(const CoframeMatrix& M, int i, int j) { return M(i, j).is_zero(); }

}  // namespace

std::array<OneForm, 4> base_coframe(const OdeRhs& rhs) {
  std::array<OneForm, 4> w;
  for (auto& f : w) f = OneForm::Constant(Expr(0));
  w[0] << -var_p(), 1, 0, 0;
  w[1] << -var_q(), 0, 1, 0;
  w[2] << -rhs.f, 0, 0, 1;
  w[3] << 1, 0, 0, 0;
  return w;
}

TwoForm exterior_derivative(const OneForm& form) {
  TwoForm out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      out.add(b, a, diff(form(a), kCoords[b]));
    }
  }
  return out;
}

TwoForm change_basis(const TwoForm& tf, const CoframeMatrix& K) {
  TwoForm out;
  for (auto [a, b] : kWedgePairs) {
    const Expr& t = tf.at(a, b);
    if (t.is_zero()) continue;
    for (auto [j, k] : kWedgePairs) {
      Expr minor = K(a, j) * K(b, k) - K(a, k) * K(b, j);
      if (!minor.is_zero()) out.add(j, k, t * minor);
    }
  }
  return out;
}

TwoForm to_omega_basis(const TwoForm& tf, const OdeRhs& rhs) {
  return change_basis(tf, coordinates_in_omega(rhs));
}

TwoForm exterior_derivative_omega(const OneForm& g, const OdeRhs& rhs) {
  // dw1 = -w2^w4, dw2 = -w3^w4, dw3 = -(f_u w1 + f_p w2 + f_q w3)^w4, dw4 = 0.
  const Expr fu = diff(rhs.f, kU);
  const Expr fp = diff(rhs.f, kP);
  const Expr fq = diff(rhs.f, kQ);
  TwoForm out;
  for (int j = 0; j < 4; ++j) {
    const Expr& c = g(j);
    if (c.is_zero()) continue;
    // dc = c_u w1 + c_p w2 + c_q w3 + (D c) w4
    std::array<Expr, 4> dc{diff(c, kU), diff(c, kP), diff(c, kQ), total_derivative(c, rhs)};
    for (int a = 0; a < 4; ++a) {
      if (a != j) out.add(a, j, dc[a]);
    }
    switch (j) {
      case 0:
        out.add(1, 3, -c);
        break;
      case 1:
        out.add(2, 3, -c);
        break;
      case 2:
        out.add(0, 3, -c * fu);
        out.add(1, 3, -c * fp);
        out.add(2, 3, -c * fq);
        break;
      default:
        break;
    }
  }
  return out;
}

bool has_coframe_pattern(const CoframeMatrix& M) {
  static constexpr int zeros[][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 1}, {3, 2}};
  for (auto [i, j] : zeros) {
    if (!structurally_zero(M, i, j)) return false;
  }
  return true;
}

CoframeMatrix inverse(const CoframeMatrix& M) {
  if (!has_coframe_pattern(M)) throw SingularCoframe("matrix does not have the coframe pattern");
  for (int i = 0; i < 4; ++i) {
    if (M(i, i).is_zero()) throw SingularCoframe("coframe matrix has a zero diagonal entry");
  }
  CoframeMatrix N = CoframeMatrix::Constant(Expr(0));
  N(0, 0) = pow(M(0, 0), -1);
  N(1, 1) = pow(M(1, 1), -1);
  N(2, 2) = pow(M(2, 2), -1);
  N(3, 3) = pow(M(3, 3), -1);
  N(1, 0) = -M(1, 0) * N(0, 0) * N(1, 1);
  N(2, 1) = -M(2, 1) * N(1, 1) * N(2, 2);
  N(2, 0) = (M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0)) * N(0, 0) * N(1, 1) * N(2, 2);
  N(3, 0) = -M(3, 0) * N(0, 0) * N(3, 3);
  return N;
}

TwoForm to_theta_basis(const TwoForm& tf, const CoframeMatrix& M) {
  return change_basis(tf, inverse(M));
}

CoframeMatrix branch_coframe(const BaseInvariants& inv, const Roots& rt,
                             const std::optional<I7Result>& i7, Branch branch) {
  CoframeMatrix M = CoframeMatrix::Constant(Expr(0));
  const Expr& I1 = inv.I1;
  const Expr& I2 = inv.I2;
  const Expr& I3 = inv.I3;
  auto need = [](bool ok, const char* what) {
    if (!ok) throw PreconditionError(what);
  };
  switch (branch) {
    case Branch::A: {
      need(rt.branch == Branch::A && rt.J4 && rt.J6, "branch A coframe needs J4 and J6");
      const Expr& J4 = *rt.J4;
      const Expr& J6 = *rt.J6;
      const Expr& I5 = inv.I5;
      Expr s(rt.s);
      M(0, 0) = pow(J4, 3) * J6;
      M(1, 0) = s * J4 * I5 / J6;
      M(1, 1) = J4 * J6;
      M(2, 0) = (I2 * pow(J6, 4) + pow(I5, 2)) / (2 * J4 * pow(J6, 3));
      M(2, 1) = (I1 * pow(J6, 2) + 3 * s * I5) / (3 * J4 * J6);
      M(2, 2) = J6 / J4;
      M(3, 0) = I3 * pow(J4, 2);
      M(3, 3) = pow(J4, 2);
      break;
    }
    case Branch::B: {
      need(rt.branch == Branch::B && rt.J4 && rt.J5, "branch B coframe needs J4 and J5");
      need(i7 && i7->formula == I7Formula::BranchB && i7->J4q, "branch B coframe needs I7");
      const Expr& J4 = *rt.J4;
      const Expr& J5 = *rt.J5;
      const Expr& J4q = *i7->J4q;
      const Expr& I7 = i7->value;
      if (J4q.is_zero()) throw SingularCoframe("J4_q vanishes");
      M(0, 0) = J4 * J5;
      M(1, 0) = J4 * pow(J5, 2) * I7 / J4q;
      M(1, 1) = J5;
      M(2, 0) = J5 * (pow(J4, 2) * pow(J5, 2) * pow(I7, 2) + I2 * pow(J4q, 2)) /
                (2 * pow(J4q, 2) * J4);
      M(2, 1) = J5 * (3 * J4 * J5 * I7 + I1 * J4q) / (3 * J4q * J4);
      M(2, 2) = J5 / J4;
      M(3, 0) = I3 * J4;
      M(3, 3) = J4;
      break;
    }
    case Branch::C: {
      need(i7 && i7->formula == I7Formula::BranchC, "branch C coframe needs I7");
      const Expr& I7 = i7->value;
      const Expr& I5 = inv.I5;
      const Expr& I6 = inv.I6;
      if (I6.is_zero() || I7.is_zero()) throw SingularCoframe("I6 or I7 vanishes");
      M(0, 0) = pow(I7, 3) / I6;
      M(1, 0) = I5 * I7 / I6;
      M(1, 1) = I7;
      M(2, 0) = (I2 * pow(I6, 2) + pow(I5, 2)) / (2 * I6 * I7);
      M(2, 1) = (I1 * I6 + 3 * I5) / (3 * I7);
      M(2, 2) = I6 / I7;
      M(3, 0) = I3 * pow(I7, 2) / I6;
      M(3, 3) = pow(I7, 2) / I6;
      break;
    }
    default:
      throw PreconditionError("no 4x4 invariant coframe for this branch");
  }
  return M;
}

Expr StructureFunctions::C(int i, int j, int k) const {
  if (i < 1 || i > 4 || j >= k) throw std::out_of_range("structure function index");
  return dtheta[i - 1].at(j - 1, k - 1);
}

const Constancy& StructureFunctions::constancy_of(int i, int j, int k) const {
  if (i < 1 || i > 4 || j >= k) throw std::out_of_range("structure function index");
  return constancy[i - 1][TwoForm::slot(j - 1, k - 1)];
}

bool StructureFunctions::all_constant() const {
  for (const auto& row : constancy) {
    for (const auto& c : row) {
      if (!c.constant) return false;
    }
  }
  return true;
}

namespace {

std::set<std::string> variables_of(const std::array<TwoForm, 4>& forms) {
  std::set<std::string> vars;
  for (const auto& f : forms) {
    for (int s = 0; s < 6; ++s) vars.merge(free_variables(f.coefficients()(s)));
  }
  return vars;
}

Constancy decide_constancy(const Expr& c, const Point& base, const std::set<std::string>& vars,
                           const ZeroTestPolicy& policy, const ConstancyOptions& opt,
                           std::mt19937_64& rng) {
  Constancy out;
  out.value = evaluate(c, base);
  if (c.is_constant()) {
    out.constant = true;
    out.exact = c.value();
    return out;
  }
  bool inconclusive = false;
  for (const auto& v : kCoords) {
    if (!depends_on(c, v)) continue;
    ZeroVerdict z = is_zero(diff(c, v), policy);
    if (z.nonzero()) return out;
    if (z.inconclusive()) inconclusive = true;
  }
  if (inconclusive) {
    out.method = "numeric";
    int taken = 0;
    int attempts = 0;
    while (taken < opt.numeric_points) {
      if (++attempts > 16 * opt.numeric_points) return out;
      Evaluation ev = eval_numeric(c, random_point(vars, rng), policy.precision_bits);
      if (!ev.ok()) continue;
      ++taken;
      if (std::abs(ev.value - out.value) > opt.spread * std::max(1.0, std::abs(out.value))) {
        return out;
      }
    }
  }
  out.constant = true;
  if (auto r = snap_scalar(out.value, opt.max_denominator, opt.snap_tolerance)) {
    // Confirmed at 113 bits.
    Evaluation ev = eval_numeric(c - Expr(*r), base, 113);
    if (ev.ok() && std::abs(ev.value) <= 1e-28 * (1 + ev.error_scale)) out.exact = r;
  }
  return out;
}

}  // namespace

Constancy test_constancy(const Expr& e, const ZeroTestPolicy& policy,
                         const ConstancyOptions& options) {
  std::set<std::string> vars = free_variables(e);
  std::mt19937_64 rng(policy.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Point base = random_point(vars, rng);
    if (eval_numeric(e, base, policy.precision_bits).ok()) {
      return decide_constancy(e, base, vars, policy, options, rng);
    }
  }
  throw SamplingFailure("no regular point for " + to_string(e));
}

StructureFunctions structure_functions(const CoframeMatrix& M, const OdeRhs& rhs,
                                       const ZeroTestPolicy& policy,
                                       const ConstancyOptions& options) {
  for (int i = 0; i < 4; ++i) {
    if (is_zero(M(i, i), policy).zero()) throw SingularCoframe("coframe determinant vanishes");
  }
  CoframeMatrix N = inverse(M);
  StructureFunctions sf;
  for (int i = 0; i < 4; ++i) {
    OneForm row = M.row(i).transpose();
    sf.dtheta[i] = change_basis(exterior_derivative_omega(row, rhs), N);
    for (int s = 0; s < 6; ++s) enforce_budget(sf.dtheta[i].coefficients()(s), "structure functions");
  }

  std::set<std::string> vars = variables_of(sf.dtheta);
  std::mt19937_64 rng(policy.seed ^ 0x9e3779b97f4a7c15ULL);
  bool found = false;
  for (int attempt = 0; attempt < 64 && !found; ++attempt) {
    sf.base_point = random_point(vars, rng);
    found = true;
    for (const auto& f : sf.dtheta) {
      for (int s = 0; s < 6 && found; ++s) {
        found = eval_numeric(f.coefficients()(s), sf.base_point, policy.precision_bits).ok();
      }
    }
  }
  if (!found) throw SamplingFailure("no regular base point for the structure functions");

  for (int i = 0; i < 4; ++i) {
    for (int s = 0; s < 6; ++s) {
      sf.constancy[i][s] =
          decide_constancy(sf.dtheta[i].coefficients()(s), sf.base_point, vars, policy, options, rng);
    }
  }
  return sf;
}

TwoForm wedge_rows(const CoframeMatrix& M, int j, int k) {
  TwoForm out;
  for (auto [a, b] : kWedgePairs) {
    out.add(a, b, M(j, a) * M(k, b) - M(j, b) * M(k, a));
  }
  return out;
}

std::array<TwoForm, 4> reconstruction_residual(const CoframeMatrix& M, const OdeRhs& rhs,
                                               const StructureFunctions& sf) {
  std::array<TwoForm, 6> basis;
  for (int s = 0; s < 6; ++s) basis[s] = wedge_rows(M, kWedgePairs[s][0], kWedgePairs[s][1]);
  std::array<TwoForm, 4> out;
  for (int i = 0; i < 4; ++i) {
    OneForm row = M.row(i).transpose();
    TwoForm r = exterior_derivative_omega(row, rhs);
    for (int s = 0; s < 6; ++s) {
      const Expr& c = sf.dtheta[i].coefficients()(s);
      if (c.is_zero()) continue;
      for (int t = 0; t < 6; ++t) {
        r.coefficients()(t) = r.coefficients()(t) - c * basis[s].coefficients()(t);
      }
    }
    out[i] = r;
  }
  return out;
}

}  // namespace cartan
