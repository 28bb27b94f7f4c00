#include <cctype>
#include <vector>

#include "cartan/expr.hpp"

namespace cartan::sym {

ParseError::ParseError(std::size_t pos, const std::string& msg)
    : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + msg),
      position(pos) {}

namespace {

// Recursive descent over:
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('+'|'-') unary | power
//   power := base ('^' unary)?
//   base  := number | 'i' | ident | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "empty input");
    Expr e = expr();
    skip_ws();
    if (pos_ < text_.size()) {
      throw ParseError(pos_, std::string("unexpected character '") + text_[pos_] + "'");
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(pos_, std::string("expected '") + c + "' before end of input");
      throw ParseError(pos_, std::string("expected '") + c + "'");
    }
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    for (;;) {
      if (accept('+')) {
        terms.push_back(term());
      } else if (accept('-')) {
        terms.push_back(-term());
      } else {
        break;
      }
    }
    return make_sum(std::move(terms));
  }

  Expr term() {
    std::vector<Expr> factors;
    signed_factor(factors);
    for (;;) {
      if (accept('*')) {
        signed_factor(factors);
      } else if (accept('/')) {
        skip_ws();
        std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) throw ParseError(at, "division by zero");
        factors.push_back(pow(d, -1));
      } else {
        break;
      }
    }
    return factors.size() == 1 ? factors.front() : make_product(std::move(factors));
  }

  void signed_factor(std::vector<Expr>& factors) {
    if (accept('-')) {
      factors.push_back(Expr(-1));
      signed_factor(factors);
    } else if (accept('+')) {
      signed_factor(factors);
    } else {
      factors.push_back(power());
    }
  }

  Expr unary() {
    std::vector<Expr> factors;
    signed_factor(factors);
    return factors.size() == 1 ? factors.front() : make_product(std::move(factors));
  }

  Expr power() {
    skip_ws();
    std::size_t at = pos_;
    Expr b = base();
    if (accept('^')) {
      Expr e = unary();
      try {
        return pow(b, e);
      } catch (const DivisionByZero& ex) {
        throw ParseError(at, ex.what());
      }
    }
    return b;
  }

  Expr base() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr e = expr();
      expect(')');
      return e;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    bool dot = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' && !dot) {
        dot = true;
        ++pos_;
      } else {
        break;
      }
    }
    std::string digits(text_.substr(start, pos_ - start));
    if (digits == ".") throw ParseError(start, "malformed number");
    return Expr(Scalar::from_string(digits));
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    std::string id(text_.substr(start, pos_ - start));
    if (id == "exp" || id == "log" || id == "sqrt") {
      if (!accept('(')) throw ParseError(pos_, "expected '(' after " + id);
      Expr a = expr();
      expect(')');
      try {
        if (id == "exp") return exp(a);
        if (id == "log") return log(a);
        return sqrt(a);
      } catch (const DivisionByZero& ex) {
        throw ParseError(start, ex.what());
      }
    }
    if (id == "i") return Expr::imaginary_unit();
    if (id == "x") return var_x();
    if (id == "u") return var_u();
    if (id == "u1" || id == "p") return var_p();
    if (id == "u2" || id == "q") return var_q();
    if (options_.symbols.count(id)) return Expr::variable(id);
    throw ParseError(start, "unknown identifier '" + id + "'");
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).run();
}

}  // namespace cartan::sym
