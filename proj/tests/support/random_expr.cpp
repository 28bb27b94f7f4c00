#include "random_expr.hpp"

#include <array>

namespace cartan::testing {

using sym::Expr;

int RandomExpr::uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

const std::string& RandomExpr::variable() {
  static const std::array<const std::string*, 4> vars{&sym::kX, &sym::kU, &sym::kP, &sym::kQ};
  return *vars[uniform(0, 3)];
}

Expr RandomExpr::constant() {
  int n = uniform(1, 5) * (uniform(0, 1) ? 1 : -1);
  Expr c = Expr::rational(n, uniform(1, 4));
  if (uniform(0, 5) == 0) c = c + Expr::rational(uniform(1, 3), 2) * Expr::imaginary_unit();
  return c;
}

Expr RandomExpr::leaf() {
  if (uniform(0, 3) == 0) return constant();
  return Expr::variable(variable());
}

Expr RandomExpr::operator()(int depth) {
  // Exact construction can hit log(0) or 1/0; draw again.
  for (;;) {
    try {
      Expr e = build(depth);
      if (!e.is_constant()) return e;
    } catch (const std::exception&) {
    }
  }
}

Expr RandomExpr::build(int depth) {
  if (depth <= 0) return leaf();
  switch (uniform(0, 7)) {
    case 0:
    case 1:
      return (*this)(depth - 1) + (*this)(depth - 1);
    case 2:
    case 3:
      return (*this)(depth - 1) * (*this)(depth - 1);
    case 4: {
      static const std::array<long, 5> powers{-2, -1, 2, 3, 2};
      return sym::pow((*this)(depth - 1) + constant(), powers[uniform(0, 4)]);
    }
    case 5:
      return sym::sqrt((*this)(depth - 1) + constant());
    case 6:
      return sym::exp(constant() * leaf());
    default:
      return sym::log(leaf() + constant());
  }
}

}  // namespace cartan::testing
