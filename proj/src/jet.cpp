#include "cartan/jet.hpp"

namespace cartan {

using namespace sym;

OdeRhs make_rhs(Expr f, std::string name, std::set<std::string> parameters) {
  for (const auto& v : free_variables(f)) {
    if (!is_jet_coordinate(v) && !parameters.count(v)) {
      throw InvalidInput("right-hand side mentions undeclared symbol '" + v + "'");
    }
  }
  return OdeRhs{std::move(f), std::move(name), std::move(parameters)};
}

OdeRhs parse_rhs(std::string_view text, std::string name) {
  if (name.empty()) name = std::string(text);
  return make_rhs(parse(text), std::move(name));
}

Expr total_derivative(const Expr& e, const OdeRhs& rhs) {
  Expr d = diff(e, kX);
  d += var_p() * diff(e, kU);
  d += var_q() * diff(e, kP);
  Expr eq = diff(e, kQ);
  if (!eq.is_zero()) d += rhs.f * eq;
  return d;
}

PointMap make_map(Expr phi, Expr psi) {
  for (const Expr* e : {&phi, &psi}) {
    for (const auto& v : free_variables(*e)) {
      if (v != kX && v != kU) {
        throw InvalidInput("point maps may only depend on x and u, found '" + v + "'");
      }
    }
  }
  return PointMap{std::move(phi), std::move(psi)};
}

PointMap parse_map(std::string_view phi, std::string_view psi) {
  return make_map(parse(phi), parse(psi));
}

Expr jacobian(const PointMap& map) {
  return diff(map.phi, kX) * diff(map.psi, kU) - diff(map.phi, kU) * diff(map.psi, kX);
}

ZeroVerdict jacobian_check(const PointMap& map, const ZeroTestPolicy& policy) {
  return is_zero(jacobian(map), policy);
}

Prolongation prolong(const PointMap& map, const OdeRhs& rhs, const ZeroTestPolicy& policy) {
  ZeroVerdict jac = jacobian_check(map, policy);
  if (jac.zero()) throw DegenerateMap("point map has identically vanishing Jacobian");
  Prolongation out;
  out.jacobian_inconclusive = jac.inconclusive();
  out.dphi = total_derivative(map.phi, rhs);
  if (is_zero(out.dphi, policy).zero()) {
    throw DegenerateMap("total derivative of phi vanishes identically");
  }
  Expr inv = pow(out.dphi, -1);
  out.chi = total_derivative(map.psi, rhs) * inv;
  out.eta = total_derivative(out.chi, rhs) * inv;
  out.fbar = total_derivative(out.eta, rhs) * inv;
  return out;
}

sym::Bindings pullback_bindings(const PointMap& map, const Prolongation& prol) {
  return sym::Bindings{{kX, map.phi}, {kU, map.psi}, {kP, prol.chi}, {kQ, prol.eta}};
}

}  // namespace cartan
