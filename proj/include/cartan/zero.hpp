#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cartan/eval.hpp"

namespace cartan::sym {

enum class ZeroOutcome { Zero, NonZero, Inconclusive };

const char* to_string(ZeroOutcome o);

struct ZeroSample {
  Point point;
  double magnitude = 0;
  double error_scale = 0;
  bool singular = false;
};

struct ZeroVerdict {
  ZeroOutcome outcome = ZeroOutcome::Inconclusive;
  std::vector<ZeroSample> evidence;

  bool zero() const { return outcome == ZeroOutcome::Zero; }
  bool nonzero() const { return outcome == ZeroOutcome::NonZero; }
  bool inconclusive() const { return outcome == ZeroOutcome::Inconclusive; }
};

struct ZeroTestPolicy {
  int samples = 16;
  double tolerance = 1e-9;
  std::uint64_t seed = 0x5eed;
  int resample_rounds = 3;
  /// A sample is decisive evidence of a nonzero value once it exceeds the
  /// zero band by this factor.
  double nonzero_factor = 10;
  int precision_bits = 53;
};

struct SamplingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Probabilistic identity test. Constants are decided exactly; other
/// expressions are sampled at random complex-rational points, a sample
/// counting as zero when |v| <= tolerance * (1 + error scale).
ZeroVerdict is_zero(const Expr& e, const ZeroTestPolicy& policy = {});

}  // namespace cartan::sym
