#include <ostream>

#include "cartan/expr.hpp"

namespace cartan::sym {

namespace {

enum Prec { kTop = 0, kSum = 1, kProd = 2, kPow = 3 };

std::string print(const Expr& e, int prec);

bool negative_real(const Scalar& s) { return s.is_negative_real(); }

bool is_reciprocal_factor(const Expr& f) {
  return f.kind() == Kind::Power && f.exponent().is_constant() &&
         negative_real(f.exponent().value());
}

std::string variable_text(const std::string& name) {
  if (name == kP) return "u1";
  if (name == kQ) return "u2";
  return name;
}

std::string print_power(const Expr& base, const Scalar* exponent, const Expr* sym_exp) {
  if (exponent && *exponent == Scalar::rational(1, 2)) return "sqrt(" + print(base, kTop) + ")";
  std::string b;
  bool atomic_base = base.is_variable() ||
                     (base.is_constant() && base.value().is_integer() &&
                      sgn(base.value().re()) > 0);
  b = atomic_base ? print(base, kTop) : "(" + print(base, kTop) + ")";
  std::string ex;
  if (exponent) {
    if (exponent->is_integer() && sgn(exponent->re()) >= 0) {
      ex = exponent->to_string();
    } else {
      ex = exponent->is_real() ? "(" + exponent->to_string() + ")" : exponent->to_string();
    }
  } else {
    ex = sym_exp->is_variable() ? print(*sym_exp, kTop) : "(" + print(*sym_exp, kTop) + ")";
  }
  return b + "^" + ex;
}

// Prints coefficient * factors with reciprocal factors moved to a denominator.
std::string print_product(Scalar coeff, std::span<const Expr> factors, int prec) {
  std::string sign;
  if (negative_real(coeff)) {
    sign = "-";
    coeff = -coeff;
  }
  std::vector<std::string> num, den;
  for (const auto& f : factors) {
    if (is_reciprocal_factor(f)) {
      Scalar e = -f.exponent().value();
      if (e.is_one()) {
        den.push_back(print(f.base(), kPow));
      } else {
        den.push_back(print_power(f.base(), &e, nullptr));
      }
    } else {
      num.push_back(print(f, kPow));
    }
  }
  std::string out;
  if (!coeff.is_one() || num.empty()) out = coeff.to_string();
  for (const auto& n : num) {
    if (!out.empty()) out += "*";
    out += n;
  }
  if (!den.empty()) {
    out += "/";
    if (den.size() == 1) {
      out += den[0];
    } else {
      out += "(";
      for (std::size_t i = 0; i < den.size(); ++i) {
        if (i) out += "*";
        out += den[i];
      }
      out += ")";
    }
  }
  out = sign + out;
  if (prec > kProd || (!sign.empty() && prec >= kProd)) return "(" + out + ")";
  return out;
}

std::string print(const Expr& e, int prec) {
  switch (e.kind()) {
    case Kind::Constant: {
      const Scalar& v = e.value();
      std::string s = v.to_string();
      bool compound = !v.is_integer() || negative_real(v);
      if (v.is_real() && compound && prec >= kProd) return "(" + s + ")";
      return s;
    }
    case Kind::Variable:
      return variable_text(e.name());
    case Kind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& t : e.operands()) {
        auto [c, rest] = split_coefficient(t);
        if (!first && negative_real(c)) {
          Scalar pos = -c;
          std::string body;
          if (rest.is_one()) {
            body = pos.to_string();
          } else if (rest.kind() == Kind::Product) {
            body = print_product(pos, rest.operands(), kSum);
          } else {
            body = print_product(pos, std::span<const Expr>(&rest, 1), kSum);
          }
          out += " - " + body;
        } else {
          if (!first) out += " + ";
          out += print(t, kSum);
        }
        first = false;
      }
      return prec > kSum ? "(" + out + ")" : out;
    }
    case Kind::Product: {
      auto [c, rest] = split_coefficient(e);
      if (rest.kind() == Kind::Product) return print_product(c, rest.operands(), prec);
      return print_product(c, std::span<const Expr>(&rest, 1), prec);
    }
    case Kind::Power: {
      if (is_reciprocal_factor(e)) return print_product(Scalar(1), std::span<const Expr>(&e, 1), prec);
      std::string s = e.exponent().is_constant()
                          ? print_power(e.base(), &e.exponent().value(), nullptr)
                          : print_power(e.base(), nullptr, &e.exponent());
      return prec > kPow ? "(" + s + ")" : s;
    }
    case Kind::Exp:
      return "exp(" + print(e.arg(), kTop) + ")";
    case Kind::Log:
      return "log(" + print(e.arg(), kTop) + ")";
  }
  return "?";
}

}  // namespace

std::string to_string(const Expr& e) { return print(e, kTop); }

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace cartan::sym
