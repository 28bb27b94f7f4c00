#include "cartan/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <boost/multiprecision/cpp_complex.hpp>

namespace cartan::sym {

namespace {

struct Singular {
  std::string why;
};

template <typename R>
struct Arith;

template <>
struct Arith<double> {
  using C = std::complex<double>;
  static double from_mpq(const mpq_class& v) { return v.get_d(); }
  static C make(double re, double im) { return {re, im}; }
  static double to_double(double r) { return r; }
};

template <>
struct Arith<long double> {
  using C = std::complex<long double>;
  static long double from_mpq(const mpq_class& v) {
    return static_cast<long double>(v.get_num().get_d()) /
           static_cast<long double>(v.get_den().get_d());
  }
  static C make(long double re, long double im) { return {re, im}; }
  static double to_double(long double r) { return static_cast<double>(r); }
};

using Quad = boost::multiprecision::cpp_bin_float_quad;
using QuadC = boost::multiprecision::cpp_complex_quad;

template <>
struct Arith<Quad> {
  using C = QuadC;
  static Quad from_mpq(const mpq_class& v) {
    return Quad(v.get_num().get_str()) / Quad(v.get_den().get_str());
  }
  static C make(const Quad& re, const Quad& im) { return C(re, im); }
  static double to_double(const Quad& r) { return static_cast<double>(r); }
};

template <typename R>
class Evaluator {
  using A = Arith<R>;
  using C = typename A::C;

  struct Val {
    C v;
    R s;  // error scale
  };

 public:
  explicit Evaluator(const Point& pt) {
    for (const auto& [k, v] : pt) point_.emplace(k, A::make(R(v.real()), R(v.imag())));
  }

  Val operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Val r = compute(e);
    if (!finite(r.v)) throw Singular{"non-finite intermediate value"};
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  static bool finite(const C& c) {
    using std::isfinite;
    using boost::multiprecision::isfinite;
    return isfinite(c.real()) && isfinite(c.imag());
  }
  static R mag(const C& c) {
    using std::abs;
    using boost::multiprecision::abs;
    return abs(c);
  }
  static C clean(const C& c) {
    // Signed zeros would select the wrong side of the principal branch cut.
    if (c.imag() == 0) return A::make(c.real(), R(0));
    return c;
  }
  static C cexp(const C& c) {
    using std::exp;
    using boost::multiprecision::exp;
    return exp(c);
  }
  static C clog(const C& c) {
    using std::log;
    using boost::multiprecision::log;
    return log(clean(c));
  }
  static C ipow(C b, long n) {
    if (n < 0) {
      if (b == C(R(0))) throw Singular{"division by zero"};
      return C(R(1)) / ipow(b, -n);
    }
    C r(R(1));
    while (n > 0) {
      if (n & 1) r *= b;
      b *= b;
      n >>= 1;
    }
    return r;
  }

  Val compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Constant: {
        C v = A::make(A::from_mpq(e.value().re()), A::from_mpq(e.value().im()));
        return {v, mag(v)};
      }
      case Kind::Variable: {
        auto it = point_.find(e.name());
        if (it == point_.end()) throw std::invalid_argument("unbound variable '" + e.name() + "'");
        return {it->second, mag(it->second)};
      }
      case Kind::Sum: {
        C v(R(0));
        R s(0);
        for (const auto& t : e.operands()) {
          Val tv = (*this)(t);
          v += tv.v;
          s += tv.s;
        }
        return {v, s + mag(v)};
      }
      case Kind::Product: {
        auto ops = e.operands();
        std::vector<Val> vals;
        vals.reserve(ops.size());
        for (const auto& f : ops) vals.push_back((*this)(f));
        C v(R(1));
        for (const auto& x : vals) v *= x.v;
        // s = sum_i s_i * prod_{j != i} |v_j|
        std::vector<R> suffix(vals.size() + 1, R(1));
        for (std::size_t i = vals.size(); i-- > 0;) suffix[i] = suffix[i + 1] * mag(vals[i].v);
        R prefix(1), s(0);
        for (std::size_t i = 0; i < vals.size(); ++i) {
          s += vals[i].s * prefix * suffix[i + 1];
          prefix *= mag(vals[i].v);
        }
        return {v, s + mag(v)};
      }
      case Kind::Power: {
        const Expr& ex = e.exponent();
        Val b = (*this)(e.base());
        if (ex.is_constant() && ex.value().is_integer()) {
          auto n = ex.value().to_long();
          if (!n) throw Singular{"exponent out of range"};
          C v = ipow(b.v, *n);
          R mb = mag(b.v);
          R s = mb == 0 ? R(0) : R(std::labs(*n)) * mag(v) / mb * b.s;
          return {v, s + mag(v)};
        }
        Val x = (*this)(ex);
        if (b.v == C(R(0))) {
          if (x.v.imag() == 0 && x.v.real() > 0) return {C(R(0)), b.s};
          throw Singular{"zero raised to a non-positive power"};
        }
        C lb = clog(b.v);
        C v = cexp(x.v * lb);
        R s = mag(v) * (mag(x.v) * b.s / mag(b.v) + mag(lb) * x.s + R(1));
        return {v, s};
      }
      case Kind::Exp: {
        Val a = (*this)(e.arg());
        C v = cexp(a.v);
        return {v, mag(v) * (a.s + R(1))};
      }
      case Kind::Log: {
        Val a = (*this)(e.arg());
        if (a.v == C(R(0))) throw Singular{"logarithm of zero"};
        C v = clog(a.v);
        return {v, a.s / mag(a.v) + mag(v) + R(1)};
      }
    }
    throw std::logic_error("unknown node kind");
  }

  std::map<std::string, C, std::less<>> point_;
  std::unordered_map<const Node*, Val> memo_;

 public:
  static Evaluation run(const Expr& e, const Point& pt) {
    Evaluation out;
    try {
      Evaluator ev(pt);
      Val v = ev(e);
      out.value = {A::to_double(v.v.real()), A::to_double(v.v.imag())};
      out.error_scale = A::to_double(v.s);
    } catch (const Singular& s) {
      out.status = EvalStatus::Singular;
      out.detail = s.why;
    }
    return out;
  }
};

}  // namespace

Evaluation eval_numeric(const Expr& e, const Point& point, int precision_bits) {
  if (precision_bits < 53) throw std::invalid_argument("precision must be at least 53 bits");
  if (precision_bits <= 53) return Evaluator<double>::run(e, point);
  if (precision_bits <= 64) return Evaluator<long double>::run(e, point);
  if (precision_bits <= 113) return Evaluator<Quad>::run(e, point);
  throw std::invalid_argument("precision above 113 bits is not supported");
}

std::complex<double> evaluate(const Expr& e, const Point& point) {
  Evaluation ev = eval_numeric(e, point);
  if (!ev.ok()) throw std::domain_error("singular evaluation: " + ev.detail);
  return ev.value;
}

Point random_point(const std::set<std::string>& variables, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> mag(4, 64);
  std::bernoulli_distribution sign(0.5);
  auto part = [&] {
    double v = mag(rng) / 16.0;
    return sign(rng) ? -v : v;
  };
  Point pt;
  for (const auto& v : variables) {
    double re = part();
    double im = part();
    pt.emplace(v, std::complex<double>(re, im));
  }
  return pt;
}

}  // namespace cartan::sym
