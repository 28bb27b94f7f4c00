#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace cartan::sym {

struct DivisionByZero : std::domain_error {
  using std::domain_error::domain_error;
};

/// Exact Gaussian rational re + im*i.
class Scalar {
 public:
  Scalar() = default;
  Scalar(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
  Scalar(int v) : re_(v) {}   // NOLINT(google-explicit-constructor)
  Scalar(mpq_class re, mpq_class im = 0);
  static Scalar rational(long num, long den);
  static Scalar imaginary_unit() { return Scalar(mpq_class(0), mpq_class(1)); }
  /// Parses "n", "n/d" (optionally signed, decimal point allowed).
  static Scalar from_string(const std::string& text);

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_one() const { return re_ == 1 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }
  bool is_integer() const { return is_real() && re_.get_den() == 1; }
  bool is_positive_real() const { return is_real() && sgn(re_) > 0; }
  bool is_negative_real() const { return is_real() && sgn(re_) < 0; }
  /// Integer value when is_integer() and it fits in a long.
  std::optional<long> to_long() const;

  Scalar operator-() const { return Scalar(-re_, -im_); }
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  Scalar conj() const { return Scalar(re_, -im_); }
  Scalar reciprocal() const;
  Scalar pow(long n) const;
  /// Exact principal n-th root when it is itself a Gaussian rational.
  std::optional<Scalar> exact_root(long n) const;

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  /// Total order: by real part, then imaginary part.
  friend std::strong_ordering operator<=>(const Scalar& a, const Scalar& b);

  std::complex<double> to_complex() const;
  std::complex<long double> to_complex_ld() const;
  std::size_t hash() const;
  /// Parse-compatible text; complex values are parenthesised, e.g. "(1/2+3*i)".
  std::string to_string() const;

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

/// Nearest rational with denominator <= max_den (continued fractions).
/// Returns nullopt when |value - num/den| > tol.
std::optional<mpq_class> snap_rational(double value, long max_den, double tol);
std::optional<Scalar> snap_scalar(std::complex<double> value, long max_den,
                                  double tol);

}  // namespace cartan::sym
