#include "cartan/expr.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace cartan::sym {

struct Node {
  Kind kind;
  std::size_t hash = 0;
  Scalar value;
  std::string name;
  std::vector<Expr> ops;
};

struct NodeFactory {
  static Expr make(Kind kind, std::vector<Expr> ops) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    std::size_t h = static_cast<std::size_t>(kind) * 0x9e3779b97f4a7c15ull;
    for (const auto& o : ops) h = (h ^ o.hash()) * 0x100000001b3ull + 0x7f4a7c15;
    n->hash = h;
    n->ops = std::move(ops);
    return Expr(std::move(n));
  }
  static Expr constant(Scalar v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->hash = v.hash() * 31 + 7;
    n->value = std::move(v);
    return Expr(std::move(n));
  }
  static Expr variable(std::string_view name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->name = std::string(name);
    n->hash = std::hash<std::string>{}(n->name) * 131 + 3;
    return Expr(std::move(n));
  }
};

namespace {

const Expr& zero_expr() {
  static const Expr z = NodeFactory::constant(Scalar(0));
  return z;
}
const Expr& one_expr() {
  static const Expr o = NodeFactory::constant(Scalar(1));
  return o;
}

int variable_rank(const std::string& n) {
  if (n == kX) return 0;
  if (n == kU) return 1;
  if (n == kP) return 2;
  if (n == kQ) return 3;
  return 4;
}

thread_local std::size_t g_budget = kDefaultNodeBudget;

}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}
Expr::Expr(int v) : Expr(Scalar(v)) {}
Expr::Expr(long v) : Expr(Scalar(v)) {}
Expr::Expr(Scalar v) {
  if (v.is_zero()) {
    node_ = zero_expr().node_;
  } else if (v.is_one()) {
    node_ = one_expr().node_;
  } else {
    node_ = NodeFactory::constant(std::move(v)).node_;
  }
}

Expr Expr::variable(std::string_view name) { return NodeFactory::variable(name); }

Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return kind() == Kind::Constant && node_->value.is_zero(); }
bool Expr::is_one() const { return kind() == Kind::Constant && node_->value.is_one(); }
const Scalar& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
std::span<const Expr> Expr::operands() const { return node_->ops; }
const Expr& Expr::base() const { return node_->ops[0]; }
const Expr& Expr::exponent() const { return node_->ops[1]; }
const Expr& Expr::arg() const { return node_->ops[0]; }
std::size_t Expr::hash() const { return node_->hash; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Kind::Constant: {
      auto c = a.value() <=> b.value();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Variable: {
      int ra = variable_rank(a.name()), rb = variable_rank(b.name());
      if (ra != rb) return ra < rb ? -1 : 1;
      int c = a.name().compare(b.name());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    default: {
      auto oa = a.operands(), ob = b.operands();
      std::size_t n = std::min(oa.size(), ob.size());
      for (std::size_t i = 0; i < n; ++i) {
        int c = compare(oa[i], ob[i]);
        if (c != 0) return c;
      }
      if (oa.size() != ob.size()) return oa.size() < ob.size() ? -1 : 1;
      return 0;
    }
  }
}

bool is_jet_coordinate(std::string_view name) {
  return name == kX || name == kU || name == kP || name == kQ;
}

Expr var_x() {
  static const Expr v = Expr::variable(kX);
  return v;
}
Expr var_u() {
  static const Expr v = Expr::variable(kU);
  return v;
}
Expr var_p() {
  static const Expr v = Expr::variable(kP);
  return v;
}
Expr var_q() {
  static const Expr v = Expr::variable(kQ);
  return v;
}

std::pair<Scalar, Expr> split_coefficient(const Expr& e) {
  if (e.kind() == Kind::Constant) return {e.value(), one_expr()};
  if (e.kind() != Kind::Product) return {Scalar(1), e};
  auto ops = e.operands();
  if (!ops[0].is_constant()) return {Scalar(1), e};
  if (ops.size() == 2) return {ops[0].value(), ops[1]};
  return {ops[0].value(), NodeFactory::make(Kind::Product, {ops.begin() + 1, ops.end()})};
}

namespace {

// Splits a non-constant factor into (base, exponent).
std::pair<Expr, Expr> split_power(const Expr& e) {
  if (e.kind() == Kind::Power) return {e.base(), e.exponent()};
  return {e, one_expr()};
}

Expr scale(const Scalar& c, const Expr& rest) {
  if (c.is_zero()) return zero_expr();
  if (c.is_one()) return rest;
  if (rest.is_one()) return Expr(c);
  std::vector<Expr> ops;
  ops.emplace_back(c);
  if (rest.kind() == Kind::Product) {
    ops.insert(ops.end(), rest.operands().begin(), rest.operands().end());
  } else {
    ops.push_back(rest);
  }
  return NodeFactory::make(Kind::Product, std::move(ops));
}

}  // namespace

Expr make_sum(std::vector<Expr> terms) {
  Scalar constant(0);
  std::map<Expr, Scalar, ExprLess> collected;
  std::vector<Expr> work = std::move(terms);
  while (!work.empty()) {
    Expr t = std::move(work.back());
    work.pop_back();
    switch (t.kind()) {
      case Kind::Constant:
        constant += t.value();
        break;
      case Kind::Sum:
        work.insert(work.end(), t.operands().begin(), t.operands().end());
        break;
      default: {
        auto [c, rest] = split_coefficient(t);
        auto [it, inserted] = collected.try_emplace(rest, c);
        if (!inserted) it->second += c;
        break;
      }
    }
  }
  std::vector<Expr> ops;
  if (!constant.is_zero()) ops.emplace_back(constant);
  for (auto& [rest, c] : collected) {
    if (!c.is_zero()) ops.push_back(scale(c, rest));
  }
  if (ops.empty()) return zero_expr();
  if (ops.size() == 1) return ops[0];
  return NodeFactory::make(Kind::Sum, std::move(ops));
}

Expr make_product(std::vector<Expr> factors) {
  Scalar coeff(1);
  std::map<Expr, std::vector<Expr>, ExprLess> bases;
  std::vector<Expr> exp_args;
  std::vector<Expr> work = std::move(factors);
  while (!work.empty()) {
    Expr f = std::move(work.back());
    work.pop_back();
    switch (f.kind()) {
      case Kind::Constant:
        coeff *= f.value();
        break;
      case Kind::Product:
        work.insert(work.end(), f.operands().begin(), f.operands().end());
        break;
      case Kind::Exp:
        exp_args.push_back(f.arg());
        break;
      default: {
        auto [b, e] = split_power(f);
        bases[b].push_back(e);
        break;
      }
    }
  }
  if (coeff.is_zero()) return zero_expr();

  std::vector<Expr> out;
  std::vector<Expr> again;
  for (auto& [b, exps] : bases) {
    Expr e = exps.size() == 1 ? exps[0] : make_sum(exps);
    if (e.is_zero()) continue;
    Expr f = pow(b, e);
    auto k = f.kind();
    bool plain = (k == Kind::Power && f.base() == b) ||
                 (f == b && k != Kind::Product && k != Kind::Constant && k != Kind::Exp);
    if (plain) {
      out.push_back(std::move(f));
    } else {
      again.push_back(std::move(f));
    }
  }
  if (!exp_args.empty()) {
    Expr a = make_sum(exp_args);
    Expr f = exp(a);
    if (f.kind() == Kind::Exp) {
      out.push_back(std::move(f));
    } else {
      again.push_back(std::move(f));
    }
  }
  if (!again.empty()) {
    again.insert(again.end(), out.begin(), out.end());
    again.emplace_back(coeff);
    return make_product(std::move(again));
  }
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return Expr(coeff);
  if (out.size() == 1) {
    if (coeff.is_one()) return out[0];
    if (out[0].kind() == Kind::Sum) {
      std::vector<Expr> terms;
      for (const auto& t : out[0].operands()) terms.push_back(Expr(coeff) * t);
      return make_sum(std::move(terms));
    }
  }
  std::vector<Expr> ops;
  if (!coeff.is_one()) ops.emplace_back(coeff);
  ops.insert(ops.end(), out.begin(), out.end());
  return NodeFactory::make(Kind::Product, std::move(ops));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return one_expr();
  if (exponent.is_one()) return base;
  if (base.is_one()) return one_expr();
  if (exponent.is_constant()) {
    const Scalar& e = exponent.value();
    auto n = e.to_long();
    if (base.is_constant()) {
      const Scalar& b = base.value();
      if (n) return Expr(b.pow(*n));
      if (b.is_zero()) {
        if (e.is_real() && sgn(e.re()) > 0) return zero_expr();
        throw DivisionByZero("zero raised to a non-positive power");
      }
      if (e.is_real()) {
        const mpz_class& den = e.re().get_den();
        const mpz_class& num = e.re().get_num();
        if (den.fits_slong_p() && num.fits_slong_p()) {
          if (auto r = b.exact_root(den.get_si())) return Expr(r->pow(num.get_si()));
        }
      }
    } else if (n) {
      switch (base.kind()) {
        case Kind::Power:
          return pow(base.base(), base.exponent() * exponent);
        case Kind::Product: {
          std::vector<Expr> fs;
          for (const auto& f : base.operands()) fs.push_back(pow(f, exponent));
          return make_product(std::move(fs));
        }
        case Kind::Exp:
          return exp(exponent * base.arg());
        default:
          break;
      }
    } else if (base.kind() == Kind::Product && base.operands()[0].is_constant() &&
               base.operands()[0].value().is_positive_real()) {
      // Positive real factors commute with principal powers.
      auto [c, rest] = split_coefficient(base);
      return make_product({pow(Expr(c), exponent), pow(rest, exponent)});
    }
  }
  return NodeFactory::make(Kind::Power, {base, exponent});
}

Expr pow(const Expr& base, long n) { return pow(base, Expr(n)); }

Expr exp(const Expr& a) {
  if (a.is_zero()) return one_expr();
  if (a.kind() == Kind::Log) return a.arg();
  if (a.kind() == Kind::Product) {
    auto [c, rest] = split_coefficient(a);
    if (rest.kind() == Kind::Log) return pow(rest.arg(), Expr(c));
  }
  return NodeFactory::make(Kind::Exp, {a});
}

Expr log(const Expr& a) {
  if (a.is_one()) return zero_expr();
  if (a.is_zero()) throw DivisionByZero("logarithm of zero");
  return NodeFactory::make(Kind::Log, {a});
}

Expr sqrt(const Expr& a) { return pow(a, Expr::rational(1, 2)); }

Expr root(const Expr& a, long n) {
  if (n <= 0) throw std::invalid_argument("root degree must be positive");
  if (n == 1) return a;
  Expr inv = Expr::rational(1, n);
  switch (a.kind()) {
    case Kind::Sum: {
      Expr t = together(a);
      if (t.kind() != Kind::Sum) return root(t, n);
      return pow(a, inv);
    }
    case Kind::Power:
      return pow(a.base(), a.exponent() * inv);
    case Kind::Product: {
      std::vector<Expr> fs;
      for (const auto& f : a.operands()) fs.push_back(root(f, n));
      return make_product(std::move(fs));
    }
    case Kind::Exp:
      return exp(a.arg() * inv);
    default:
      return pow(a, inv);
  }
}

namespace {

std::vector<Expr> expand_terms(const Expr& e, std::size_t max_terms);

std::vector<Expr> multiply_out(const std::vector<Expr>& a, const std::vector<Expr>& b,
                               std::size_t max_terms) {
  if (a.size() * b.size() > max_terms) throw ResourceError("expand: too many terms");
  std::vector<Expr> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return out;
}

std::vector<Expr> expand_terms(const Expr& e, std::size_t max_terms) {
  switch (e.kind()) {
    case Kind::Sum: {
      std::vector<Expr> out;
      for (const auto& t : e.operands()) {
        auto ts = expand_terms(t, max_terms);
        out.insert(out.end(), ts.begin(), ts.end());
        if (out.size() > max_terms) throw ResourceError("expand: too many terms");
      }
      return out;
    }
    case Kind::Product: {
      std::vector<Expr> acc{one_expr()};
      for (const auto& f : e.operands()) acc = multiply_out(acc, expand_terms(f, max_terms), max_terms);
      return acc;
    }
    case Kind::Power: {
      auto n = e.exponent().is_constant() ? e.exponent().value().to_long() : std::nullopt;
      if (e.base().kind() == Kind::Sum && n && *n > 1) {
        auto base = expand_terms(e.base(), max_terms);
        std::vector<Expr> acc = base;
        for (long k = 1; k < *n; ++k) acc = multiply_out(acc, base, max_terms);
        return acc;
      }
      return {e};
    }
    default:
      return {e};
  }
}

// Positive rational exponent of a denominator factor, or nullopt.
std::optional<Scalar> denominator_exponent(const Expr& f) {
  if (f.kind() != Kind::Power || !f.exponent().is_constant()) return std::nullopt;
  const Scalar& e = f.exponent().value();
  if (!e.is_negative_real()) return std::nullopt;
  return -e;
}

}  // namespace

Expr expand(const Expr& e, std::size_t max_terms) {
  return make_sum(expand_terms(e, max_terms));
}

Expr together(const Expr& e) {
  switch (e.kind()) {
    case Kind::Product: {
      std::vector<Expr> fs;
      for (const auto& f : e.operands()) fs.push_back(together(f));
      return make_product(std::move(fs));
    }
    case Kind::Power:
      if (e.base().kind() == Kind::Sum && e.exponent().is_constant() &&
          e.exponent().value().is_integer())
        return pow(together(e.base()), e.exponent());
      return e;
    case Kind::Sum:
      break;
    default:
      return e;
  }
  std::vector<Expr> terms;
  for (const auto& t : e.operands()) terms.push_back(together(t));
  Expr flat = make_sum(std::move(terms));
  if (flat.kind() != Kind::Sum) return flat;
  std::map<Expr, Scalar, ExprLess> common;
  std::vector<std::map<Expr, Scalar, ExprLess>> dens;
  std::vector<std::vector<Expr>> nums;
  for (const auto& t : flat.operands()) {
    std::map<Expr, Scalar, ExprLess> den;
    std::vector<Expr> num;
    auto factors = t.kind() == Kind::Product ? std::vector<Expr>(t.operands().begin(), t.operands().end())
                                             : std::vector<Expr>{t};
    for (const auto& f : factors) {
      if (auto k = denominator_exponent(f)) {
        den[f.base()] = *k;
        auto [it, inserted] = common.try_emplace(f.base(), *k);
        if (!inserted && it->second.re() < k->re()) it->second = *k;
      } else {
        num.push_back(f);
      }
    }
    dens.push_back(std::move(den));
    nums.push_back(std::move(num));
  }
  if (common.empty()) {
    try {
      return expand(flat);
    } catch (const ResourceError&) {
      return flat;
    }
  }
  std::vector<Expr> numerator;
  for (std::size_t i = 0; i < nums.size(); ++i) {
    std::vector<Expr> fs = nums[i];
    for (const auto& [b, k] : common) {
      auto it = dens[i].find(b);
      Scalar have = it == dens[i].end() ? Scalar(0) : it->second;
      if (!(k == have)) fs.push_back(pow(b, Expr(k - have)));
    }
    numerator.push_back(make_product(std::move(fs)));
  }
  Expr num;
  try {
    num = expand(make_sum(std::move(numerator)));
  } catch (const ResourceError&) {
    return flat;
  }
  std::vector<Expr> out{num};
  for (const auto& [b, k] : common) out.push_back(pow(b, Expr(-k)));
  return make_product(std::move(out));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return make_sum({a, b});
}
Expr operator-(const Expr& a) { return make_product({Expr(-1), a}); }
Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  return make_sum({a, -b});
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return zero_expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return make_product({a, b});
}
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DivisionByZero("division by the zero expression");
  if (b.is_one()) return a;
  return make_product({a, pow(b, -1)});
}

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::string_view var) : var_(var) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Constant:
        return zero_expr();
      case Kind::Variable:
        return e.name() == var_ ? one_expr() : zero_expr();
      case Kind::Sum: {
        std::vector<Expr> terms;
        for (const auto& t : e.operands()) {
          Expr dt = (*this)(t);
          if (!dt.is_zero()) terms.push_back(std::move(dt));
        }
        return make_sum(std::move(terms));
      }
      case Kind::Product: {
        auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
          Expr di = (*this)(ops[i]);
          if (di.is_zero()) continue;
          std::vector<Expr> fs;
          for (std::size_t j = 0; j < ops.size(); ++j) {
            if (j != i) fs.push_back(ops[j]);
          }
          fs.push_back(std::move(di));
          terms.push_back(make_product(std::move(fs)));
        }
        return make_sum(std::move(terms));
      }
      case Kind::Power: {
        const Expr& b = e.base();
        const Expr& n = e.exponent();
        Expr db = (*this)(b);
        Expr dn = (*this)(n);
        if (dn.is_zero()) {
          if (db.is_zero()) return zero_expr();
          return make_product({n, pow(b, n - Expr(1)), db});
        }
        // d(b^n) = b^n (n' log b + n b'/b)
        return e * (dn * log(b) + n * db / b);
      }
      case Kind::Exp: {
        Expr da = (*this)(e.arg());
        return da.is_zero() ? zero_expr() : e * da;
      }
      case Kind::Log: {
        Expr da = (*this)(e.arg());
        return da.is_zero() ? zero_expr() : da / e.arg();
      }
    }
    return zero_expr();
  }

  std::string_view var_;
  std::unordered_map<const Node*, Expr> memo_;
};

template <typename Leaf>
class Rebuilder {
 public:
  explicit Rebuilder(Leaf leaf) : leaf_(std::move(leaf)) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Constant:
        return e;
      case Kind::Variable:
        return leaf_(e);
      case Kind::Sum: {
        std::vector<Expr> ts;
        for (const auto& t : e.operands()) ts.push_back((*this)(t));
        return make_sum(std::move(ts));
      }
      case Kind::Product: {
        std::vector<Expr> fs;
        for (const auto& f : e.operands()) fs.push_back((*this)(f));
        return make_product(std::move(fs));
      }
      case Kind::Power:
        return pow((*this)(e.base()), (*this)(e.exponent()));
      case Kind::Exp:
        return exp((*this)(e.arg()));
      case Kind::Log:
        return log((*this)(e.arg()));
    }
    return e;
  }

  Leaf leaf_;
  std::unordered_map<const Node*, Expr> memo_;
};

template <typename F>
void visit_dag(const Expr& e, F&& f) {
  std::unordered_set<const Node*> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur.id()).second) continue;
    f(cur);
    for (const auto& o : cur.operands()) stack.push_back(o);
  }
}

}  // namespace

Expr diff(const Expr& e, std::string_view var) {
  Expr d = Differentiator(var)(e);
  enforce_budget(d, "diff");
  return d;
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  Rebuilder rb([&](const Expr& v) {
    auto it = bindings.find(v.name());
    return it == bindings.end() ? v : it->second;
  });
  Expr r = rb(e);
  enforce_budget(r, "substitute");
  return r;
}

Expr simplify(const Expr& e) {
  Rebuilder rb([](const Expr& v) { return v; });
  return rb(e);
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_variable()) out.insert(n.name());
  });
  return out;
}

bool depends_on(const Expr& e, std::string_view var) {
  bool found = false;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_variable() && n.name() == var) found = true;
  });
  return found;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 0;
  visit_dag(e, [&](const Expr&) { ++n; });
  return n;
}

std::size_t node_budget() { return g_budget; }
void set_node_budget(std::size_t n) { g_budget = n; }

void enforce_budget(const Expr& e, std::string_view what) {
  std::size_t n = node_count(e);
  if (n > g_budget) {
    throw ResourceError(std::string(what) + ": expression has " + std::to_string(n) +
                        " nodes, budget is " + std::to_string(g_budget));
  }
}

}  // namespace cartan::sym
