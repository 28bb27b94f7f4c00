#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cartan/scalar.hpp"

namespace cartan::sym {

enum class Kind : std::uint8_t { Constant, Variable, Power, Product, Sum, Exp, Log };

struct Node;

/// Immutable, canonical symbolic expression. Every constructor returns the
/// canonical form: flattened sums/products with operands in a fixed total
/// order, like terms and like bases collected, constants folded.
class Expr {
 public:
  Expr();  // the constant 0
  Expr(int v);     // NOLINT(google-explicit-constructor)
  Expr(long v);    // NOLINT(google-explicit-constructor)
  Expr(Scalar v);  // NOLINT(google-explicit-constructor)

  static Expr variable(std::string_view name);
  static Expr rational(long num, long den) { return Scalar::rational(num, den); }
  static Expr imaginary_unit() { return Scalar::imaginary_unit(); }

  Kind kind() const;
  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_variable() const { return kind() == Kind::Variable; }
  bool is_zero() const;
  bool is_one() const;

  const Scalar& value() const;        // Constant
  const std::string& name() const;    // Variable
  std::span<const Expr> operands() const;
  const Expr& base() const;           // Power
  const Expr& exponent() const;       // Power
  const Expr& arg() const;            // Exp, Log

  std::size_t hash() const;
  const Node* id() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  friend struct NodeFactory;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Fixed total order on canonical expressions; <0, 0, >0.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// Jet coordinates. p = u', q = u''.
inline const std::string kX = "x";
inline const std::string kU = "u";
inline const std::string kP = "p";
inline const std::string kQ = "q";
bool is_jet_coordinate(std::string_view name);

Expr var_x();
Expr var_u();
Expr var_p();
Expr var_q();

Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr pow(const Expr& base, long n);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
/// An n-th root r with r^n == a, taken factor by factor: powers b^e become
/// b^(e/n), exponentials exp(c) become exp(c/n), constants take the principal
/// root. Unlike pow(a, 1/n) the result keeps a fixed branch on the whole
/// domain of each factor.
Expr root(const Expr& a, long n);

/// Distributes products over sums and expands positive integer powers of
/// sums; throws ResourceError past `max_terms`.
Expr expand(const Expr& e, std::size_t max_terms = 4096);
/// A sum over a common denominator, with the numerator expanded. Returns
/// the input unchanged when it is not a sum or expansion is too large.
/// Denominators are not factored, so cancellation is only partial.
Expr together(const Expr& e);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
inline Expr& operator/=(Expr& a, const Expr& b) { return a = a / b; }

using Bindings = std::map<std::string, Expr, std::less<>>;

/// Exact partial derivative; symbols other than `var` are constants.
Expr diff(const Expr& e, std::string_view var);
/// Simultaneous substitution followed by canonicalisation.
Expr substitute(const Expr& e, const Bindings& bindings);
/// Rebuilds bottom-up through the canonicalising constructors.
Expr simplify(const Expr& e);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, std::string_view var);
/// Coefficient-and-rest split: e == coefficient * rest.
std::pair<Scalar, Expr> split_coefficient(const Expr& e);

/// Number of distinct nodes in the expression DAG.
std::size_t node_count(const Expr& e);

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-thread node budget enforced by the heavy operations.
std::size_t node_budget();
void set_node_budget(std::size_t n);
void enforce_budget(const Expr& e, std::string_view what);

class BudgetScope {
 public:
  explicit BudgetScope(std::size_t n) : saved_(node_budget()) { set_node_budget(n); }
  ~BudgetScope() { set_node_budget(saved_); }
  BudgetScope(const BudgetScope&) = delete;
  BudgetScope& operator=(const BudgetScope&) = delete;

 private:
  std::size_t saved_;
};

inline constexpr std::size_t kDefaultNodeBudget = 200000;

// Printing and parsing.
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

struct ParseError : std::runtime_error {
  ParseError(std::size_t pos, const std::string& msg);
  std::size_t position;
};

struct ParseOptions {
  /// Formal symbols accepted as identifiers besides x, u, u1, u2.
  std::set<std::string, std::less<>> symbols;
};

Expr parse(std::string_view text, const ParseOptions& options = {});

}  // namespace cartan::sym
