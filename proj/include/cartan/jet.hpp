#pragma once

#include <set>
#include <stdexcept>
#include <string>

#include "cartan/expr.hpp"
#include "cartan/zero.hpp"

namespace cartan {

using sym::Expr;
using sym::ZeroTestPolicy;
using sym::ZeroVerdict;

/// Right-hand side f(x, u, p, q) of u''' = f.
struct OdeRhs {
  Expr f;
  std::string name;
  /// Formal parameters allowed in f besides the jet coordinates.
  std::set<std::string> parameters;
};

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Validates that f only mentions jet coordinates and declared parameters.
OdeRhs make_rhs(Expr f, std::string name = {}, std::set<std::string> parameters = {});
OdeRhs parse_rhs(std::string_view text, std::string name = {});

/// D_x = d/dx + p d/du + q d/dp + f d/dq.
Expr total_derivative(const Expr& e, const OdeRhs& rhs);

/// Point transformation xbar = phi(x, u), ubar = psi(x, u).
struct PointMap {
  Expr phi;
  Expr psi;
};

PointMap make_map(Expr phi, Expr psi);
PointMap parse_map(std::string_view phi, std::string_view psi);

/// phi_x psi_u - phi_u psi_x.
Expr jacobian(const PointMap& map);
/// NonZero means the map is admissible.
ZeroVerdict jacobian_check(const PointMap& map, const ZeroTestPolicy& policy = {});

/// Second prolongation of a point map along u''' = f:
/// chi = D psi / D phi, eta = D chi / D phi, fbar = D eta / D phi.
struct Prolongation {
  Expr chi;
  Expr eta;
  Expr fbar;
  Expr dphi;
  /// Set when the Jacobian test was inconclusive rather than NonZero.
  bool jacobian_inconclusive = false;
};

struct DegenerateMap : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Prolongation prolong(const PointMap& map, const OdeRhs& rhs, const ZeroTestPolicy& policy = {});

/// Substitution {x -> phi, u -> psi, p -> chi, q -> eta} of barred quantities.
sym::Bindings pullback_bindings(const PointMap& map, const Prolongation& prol);

}  // namespace cartan
