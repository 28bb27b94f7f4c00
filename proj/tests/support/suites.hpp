#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cartan/classify.hpp"

namespace cartan::testing {

struct SuiteResult {
  int total = 0;
  int failed = 0;
  std::vector<std::string> failures;

  bool passed() const { return total > 0 && failed == 0; }
  void record(bool ok, const std::string& what);
};

/// d(dg) = 0 for random scalars g, over (dx, du, dp, dq) and over the
/// frame of a random equation.
SuiteResult dd_suite(int count, std::uint64_t seed);

/// Product and chain rule residuals for random expressions.
SuiteResult calculus_rules_suite(int count, std::uint64_t seed);

/// parse(print(e)) == e for every expression in a corpus file, including
/// the printed base invariants of each equation.
SuiteResult round_trip_suite(const std::string& corpus_path);

struct LabeledIdentity {
  std::string text;
  bool zero;
};

/// 50 identities and a perturbed NonZero variant of each.
std::vector<LabeledIdentity> labeled_identities();
SuiteResult zero_soundness_suite(const sym::ZeroTestPolicy& policy = {});

/// xbar = c1 x + c2, ubar = c3 u + c4 x + c5 with c1 c3 != 0.
std::vector<PointMap> random_affine_maps(int count, std::uint64_t seed);

/// Representative equations used by the invariance suite, one per branch.
std::vector<std::string> invariance_forms();

/// Pulls each form back along each map and compares branch, family and
/// parameters with the classification of the form itself.
SuiteResult invariance_suite(const std::vector<std::string>& forms,
                             const std::vector<PointMap>& maps);

}  // namespace cartan::testing
