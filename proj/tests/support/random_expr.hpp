#pragma once

#include <random>

#include "cartan/expr.hpp"

namespace cartan::testing {

/// Small random expressions over x, u, p, q with Gaussian-rational
/// coefficients, integer and half-integer powers, exp and log.
class RandomExpr {
 public:
  explicit RandomExpr(std::uint64_t seed) : rng_(seed) {}

  /// Never a constant.
  sym::Expr operator()(int depth = 3);
  sym::Expr constant();
  sym::Expr leaf();
  /// One of x, u, p, q.
  const std::string& variable();

  std::mt19937_64& rng() { return rng_; }

 private:
  sym::Expr build(int depth);
  int uniform(int lo, int hi);
  std::mt19937_64 rng_;
};

}  // namespace cartan::testing
