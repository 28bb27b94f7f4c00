#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan::sym {

using Point = std::map<std::string, std::complex<double>, std::less<>>;

enum class EvalStatus { Ok, Singular };

/// Result of a numeric evaluation. `error_scale` is a first-order bound on
/// the accumulated rounding error in units of the working precision: the
/// computed value is trusted to about eps * error_scale.
struct Evaluation {
  EvalStatus status = EvalStatus::Ok;
  std::complex<double> value{};
  double error_scale = 0;
  std::string detail;

  bool ok() const { return status == EvalStatus::Ok; }
};

/// Principal-branch evaluation. precision_bits selects the working type:
/// <=53 double, <=64 long double, otherwise 113-bit binary floating point.
Evaluation eval_numeric(const Expr& e, const Point& point, int precision_bits = 53);

/// Convenience wrapper that throws std::domain_error on singular samples.
std::complex<double> evaluate(const Expr& e, const Point& point);

/// Random complex-rational point: real and imaginary parts k/16 with
/// k in [4, 64] and random sign, i.e. magnitudes in [1/4, 4].
Point random_point(const std::set<std::string>& variables, std::mt19937_64& rng);

}  // namespace cartan::sym
