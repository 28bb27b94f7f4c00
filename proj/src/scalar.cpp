#include "cartan/scalar.hpp"

#include <cmath>
#include <functional>

namespace cartan::sym {

namespace {

mpq_class canonical(mpq_class v) {
  v.canonicalize();
  return v;
}

std::optional<mpz_class> exact_int_root(const mpz_class& v, unsigned long n) {
  if (sgn(v) < 0) return std::nullopt;
  mpz_class r;
  if (mpz_root(r.get_mpz_t(), v.get_mpz_t(), n) == 0) return std::nullopt;
  return r;
}

std::optional<mpq_class> positive_root(const mpq_class& v, unsigned long n) {
  auto num = exact_int_root(v.get_num(), n);
  if (!num) return std::nullopt;
  auto den = exact_int_root(v.get_den(), n);
  if (!den) return std::nullopt;
  return canonical(mpq_class(*num, *den));
}

std::optional<mpq_class> rational_sqrt(const mpq_class& v) {
  if (sgn(v) < 0) return std::nullopt;
  return positive_root(v, 2);
}

std::size_t hash_mpq(const mpq_class& v) {
  std::string s = v.get_str(16);
  return std::hash<std::string>{}(s);
}

}  // namespace

Scalar::Scalar(mpq_class re, mpq_class im)
    : re_(canonical(std::move(re))), im_(canonical(std::move(im))) {}

Scalar Scalar::rational(long num, long den) {
  if (den == 0) throw DivisionByZero("rational with zero denominator");
  return Scalar(mpq_class(num, den));
}

Scalar Scalar::from_string(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    Scalar n = from_string(text.substr(0, slash));
    Scalar d = from_string(text.substr(slash + 1));
    return n / d;
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    mpz_class num(digits.empty() || digits == "-" ? std::string("0") : digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    return Scalar(mpq_class(num, den));
  }
  return Scalar(mpq_class(mpz_class(text, 10)));
}

std::optional<long> Scalar::to_long() const {
  if (!is_integer()) return std::nullopt;
  const mpz_class& n = re_.get_num();
  if (!n.fits_slong_p()) return std::nullopt;
  return n.get_si();
}

Scalar& Scalar::operator+=(const Scalar& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  mpq_class re = re_ * o.re_ - im_ * o.im_;
  mpq_class im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) { return *this *= o.reciprocal(); }

Scalar Scalar::reciprocal() const {
  if (is_zero()) throw DivisionByZero("division by the zero scalar");
  mpq_class norm = re_ * re_ + im_ * im_;
  return Scalar(re_ / norm, -im_ / norm);
}

Scalar Scalar::pow(long n) const {
  if (n < 0) return reciprocal().pow(-n);
  Scalar result(1);
  Scalar base = *this;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

std::optional<Scalar> Scalar::exact_root(long n) const {
  if (n <= 0) return std::nullopt;
  if (n == 1 || is_zero()) return *this;
  if (is_positive_real()) {
    auto r = positive_root(re_, static_cast<unsigned long>(n));
    if (!r) return std::nullopt;
    return Scalar(*r);
  }
  if (n % 2 != 0) return std::nullopt;
  // Principal square root: Re >= 0, and Im >= 0 on the negative real axis.
  auto modulus = rational_sqrt(re_ * re_ + im_ * im_);
  if (!modulus) return std::nullopt;
  auto a = rational_sqrt((*modulus + re_) / 2);
  auto b = rational_sqrt((*modulus - re_) / 2);
  if (!a || !b) return std::nullopt;
  Scalar root(*a, sgn(im_) < 0 ? mpq_class(-*b) : *b);
  if (n == 2) return root;
  return root.exact_root(n / 2);
}

std::strong_ordering operator<=>(const Scalar& a, const Scalar& b) {
  int c = cmp(a.re_, b.re_);
  if (c == 0) c = cmp(a.im_, b.im_);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::complex<double> Scalar::to_complex() const {
  return {re_.get_d(), im_.get_d()};
}

std::complex<long double> Scalar::to_complex_ld() const {
  auto conv = [](const mpq_class& v) {
    return static_cast<long double>(v.get_num().get_d()) /
           static_cast<long double>(v.get_den().get_d());
  };
  return {conv(re_), conv(im_)};
}

std::size_t Scalar::hash() const {
  return hash_mpq(re_) * 1000003u ^ hash_mpq(im_);
}

std::string Scalar::to_string() const {
  if (is_real()) return re_.get_str();
  std::string imag;
  if (im_ == 1) {
    imag = "i";
  } else if (im_ == -1) {
    imag = "-i";
  } else {
    imag = im_.get_str() + "*i";
  }
  if (sgn(re_) == 0) return sgn(im_) < 0 || im_ != 1 ? "(" + imag + ")" : imag;
  std::string out = "(" + re_.get_str();
  if (sgn(im_) > 0) out += "+";
  return out + imag + ")";
}

std::optional<mpq_class> snap_rational(double value, long max_den, double tol) {
  if (!std::isfinite(value)) return std::nullopt;
  // Convergents h/k of the continued fraction of |value|.
  double x = std::fabs(value);
  mpz_class h_prev = 1, h = static_cast<long>(std::floor(x));
  mpz_class k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  std::optional<mpq_class> best;
  auto consider = [&](const mpz_class& hn, const mpz_class& kn) {
    mpq_class cand(hn, kn);
    cand.canonicalize();
    if (std::fabs(cand.get_d() - x) <= tol) {
      if (!best) best = cand;
    }
  };
  consider(h, k);
  for (int iter = 0; iter < 64 && !best && frac > 1e-300; ++iter) {
    double inv = 1.0 / frac;
    long a = static_cast<long>(std::floor(inv));
    frac = inv - std::floor(inv);
    mpz_class h_next = a * h + h_prev;
    mpz_class k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    consider(h, k);
  }
  if (!best) return std::nullopt;
  if (value < 0) *best = -*best;
  return best;
}

std::optional<Scalar> snap_scalar(std::complex<double> value, long max_den,
                                  double tol) {
  auto re = snap_rational(value.real(), max_den, tol);
  auto im = snap_rational(value.imag(), max_den, tol);
  if (!re || !im) return std::nullopt;
  return Scalar(*re, *im);
}

}  // namespace cartan::sym
