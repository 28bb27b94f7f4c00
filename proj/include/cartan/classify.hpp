#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cartan/coframe.hpp"

namespace cartan {

enum class Family { ExpQ, PowerB, AlphaQ2P, Q2, XSqrt, Q3Halves, QCubed, ThreeHalvesQ2P };

const char* to_string(Family f);
std::optional<Family> family_from_string(std::string_view name);
Branch branch_of(Family f);
bool has_parameter(Family f);

/// Representative right-hand side of a family, e.g. PowerB(b) -> q^((b-2)/(b-1)).
Expr canonical_rhs(Family f, const sym::Scalar& parameter = sym::Scalar(0));
/// Parameter values excluded from a family's normal form.
bool excluded_parameter(Family f, std::complex<double> value, double tol = 1e-9);

// Parameter relations.
std::complex<double> beta_cubed(std::complex<double> alpha);   // 2a^3 - 9a^2 + 9a
std::complex<double> gamma_squared(std::complex<double> alpha);  // a^2 - 3a
std::complex<double> lambda_of(std::complex<double> alpha);      // (3a^2 + 4)/(16a^2)

/// Structure-constant table of a family with the discrete choices fixed.
/// Index [i-1][slot(j-1, k-1)].
using ConstantTable = std::array<std::array<std::complex<double>, 6>, 4>;

struct ParameterEstimate {
  std::complex<double> value;
  std::optional<sym::Scalar> exact;
  double residual = 0;
};

struct RecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// b = -1/(C1_12 C2_23) for the branch-A power family.
ParameterEstimate recover_b(const StructureFunctions& sf);
/// Roots of (2a^3-9a^2+9a)^2 - k^6 (a^2-3a)^3 with k = J4_q/J5, excluded
/// values removed.
std::vector<ParameterEstimate> recover_alpha_B(const Roots& rt, const I7Result& i7,
                                               const ZeroTestPolicy& policy = {});
std::vector<ParameterEstimate> alpha_from_kappa(std::complex<double> kappa);
/// +-alpha with alpha^2 = 4/(16 lambda - 3), lambda = C2_12.
std::vector<ParameterEstimate> recover_alpha_C(const StructureFunctions& sf);

struct MatchResult {
  bool matched = false;
  Family family = Family::ExpQ;
  double residual = 0;
  /// A = exp(2 pi i A_index / A_order).
  int A_index = 0;
  int A_order = 1;
  int B = 1;
  std::optional<ParameterEstimate> parameter;
  /// Every candidate parameter whose table matched. The branch-B family is
  /// invariant under alpha -> 3 - alpha and the x-sqrt family under
  /// alpha -> -alpha, so both members of a pair appear.
  std::vector<ParameterEstimate> equivalent_parameters;
  /// Auxiliary constants of the matched table (alpha, beta, gamma, lambda).
  std::map<std::string, std::complex<double>> auxiliary;
};

inline constexpr double kMatchTolerance = 1e-8;

/// Compares all 24 constants against the family table over the discrete
/// ambiguity set. Parameter candidates are required for the parametrised
/// families.
MatchResult match_canonical(const StructureFunctions& sf, Family family,
                            const std::vector<ParameterEstimate>& parameters = {},
                            double tol = kMatchTolerance);

enum class ZeroPolicy { Strict, AssumeNonzero };
const char* to_string(ZeroPolicy p);

struct ClassifyOptions {
  ZeroTestPolicy zero;
  ZeroPolicy policy = ZeroPolicy::Strict;
  std::size_t max_nodes = sym::kDefaultNodeBudget;
};

struct ConditionVerdicts {
  std::optional<sym::ZeroOutcome> I4, I5, I6, I7, J4q;
};

struct BranchReport {
  /// Final verdict; Unclassified unless a canonical family matched (or D).
  Branch branch = Branch::Unclassified;
  /// Branch whose invariant conditions hold, whether or not a family matched.
  Branch conditions = Branch::Unclassified;
  ConditionVerdicts verdicts;
  std::optional<MatchResult> family;
  std::optional<StructureFunctions> structure;
  int r = 0;
  int s = 0;
  std::vector<std::string> warnings;
  std::string explanation;
};

BranchReport classify(const OdeRhs& rhs, const ClassifyOptions& options = {});

}  // namespace cartan
