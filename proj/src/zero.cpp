#include "cartan/zero.hpp"

#include <cmath>

namespace cartan::sym {

const char* to_string(ZeroOutcome o) {
  switch (o) {
    case ZeroOutcome::Zero:
      return "Zero";
    case ZeroOutcome::NonZero:
      return "NonZero";
    case ZeroOutcome::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

ZeroVerdict is_zero(const Expr& expr, const ZeroTestPolicy& policy) {
  ZeroVerdict verdict;
  Expr e = simplify(expr);
  if (e.is_constant()) {
    verdict.outcome = e.value().is_zero() ? ZeroOutcome::Zero : ZeroOutcome::NonZero;
    ZeroSample s;
    s.magnitude = std::abs(e.value().to_complex());
    verdict.evidence.push_back(std::move(s));
    return verdict;
  }

  std::set<std::string> vars = free_variables(e);
  std::mt19937_64 rng(policy.seed);
  const int max_singular = 8 * policy.samples * (policy.resample_rounds + 1);
  int singular = 0;

  for (int round = 0; round <= policy.resample_rounds; ++round) {
    int zero_like = 0;
    bool ambiguous = false;
    int taken = 0;
    while (taken < policy.samples) {
      ZeroSample s;
      s.point = random_point(vars, rng);
      Evaluation ev = eval_numeric(e, s.point, policy.precision_bits);
      if (!ev.ok()) {
        s.singular = true;
        verdict.evidence.push_back(std::move(s));
        if (++singular > max_singular) {
          throw SamplingFailure("no non-singular sample points found for " + to_string(e));
        }
        continue;
      }
      ++taken;
      s.magnitude = std::abs(ev.value);
      s.error_scale = ev.error_scale;
      double band = policy.tolerance * (1 + ev.error_scale);
      bool nonzero = s.magnitude > policy.nonzero_factor * band;
      bool zero = s.magnitude <= band;
      verdict.evidence.push_back(std::move(s));
      if (nonzero) {
        verdict.outcome = ZeroOutcome::NonZero;
        return verdict;
      }
      if (zero) {
        ++zero_like;
      } else {
        ambiguous = true;
      }
    }
    if (!ambiguous && zero_like == policy.samples) {
      verdict.outcome = ZeroOutcome::Zero;
      return verdict;
    }
  }
  verdict.outcome = ZeroOutcome::Inconclusive;
  return verdict;
}

}  // namespace cartan::sym
