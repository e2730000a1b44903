#pragma once

// Recursive-descent parser shared by the scalar and form grammars. The Algebra
// policy decides what values are and which constructs are legal.

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "darboux/error.hpp"
#include "darboux/symcore/expr.hpp"

namespace darboux::detail {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, Wedge, LParen, RParen, LBracket, RBracket, Comma, Prime, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    tok_ = Token{};
    tok_.pos = i_;
    if (i_ >= src_.size()) return;
    char c = src_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      std::size_t j = i_;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      if (j < src_.size() && src_[j] == '.') {
        ++j;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
      }
      if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
        if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
          while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
          j = k;
        }
      }
      tok_.kind = Tok::Number;
      tok_.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) ++j;
      tok_.kind = Tok::Ident;
      tok_.text = std::string(src_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '\\') {
      tok_.kind = Tok::Wedge;
      tok_.text = "/\\";
      i_ += 2;
      return;
    }
    ++i_;
    tok_.text = std::string(1, c);
    switch (c) {
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '/': tok_.kind = Tok::Slash; break;
      case '^': tok_.kind = Tok::Caret; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      case '[': tok_.kind = Tok::LBracket; break;
      case ']': tok_.kind = Tok::RBracket; break;
      case ',': tok_.kind = Tok::Comma; break;
      case '\'': tok_.kind = Tok::Prime; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", tok_.pos);
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Token tok_;
};

/// Integer literals are exact; literals with a point or exponent are floats.
inline Number parse_number_literal(const std::string& text, std::size_t pos) {
  if (text.find_first_of(".eE") == std::string::npos && text.size() <= 18) {
    return Number(static_cast<std::int64_t>(std::strtoll(text.c_str(), nullptr, 10)));
  }
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) throw ParseError("malformed number '" + text + "'", pos);
  return Number(v);
}

inline std::optional<Builtin> builtin_from_name(std::string_view name) {
  if (name == "exp") return Builtin::Exp;
  if (name == "log") return Builtin::Log;
  if (name == "sin") return Builtin::Sin;
  if (name == "cos") return Builtin::Cos;
  if (name == "sqrt") return Builtin::Sqrt;
  return std::nullopt;
}

/// Algebra requirements: Value type; number, variable, add, sub, mul, div, wedge,
/// pow, neg, builtin, apply, integral, differential, scalar.
template <class Algebra>
class Parser {
 public:
  using Value = typename Algebra::Value;

  Parser(std::string_view text, Algebra& algebra) : lex_(text), alg_(algebra) {}

  Value parse_all() {
    Value v = expr();
    if (lex_.peek().kind != Tok::End) fail("unexpected '" + lex_.peek().text + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex_.peek().pos); }

  Token expect(Tok kind, const char* what) {
    if (lex_.peek().kind != kind) {
      fail(std::string("expected ") + what + (lex_.peek().kind == Tok::End ? " before end of input" : " but found '" + lex_.peek().text + "'"));
    }
    return lex_.take();
  }

  Value expr() {
    Value v = term();
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      Token op = lex_.take();
      Value r = term();
      v = op.kind == Tok::Plus ? alg_.add(v, r, op.pos) : alg_.sub(v, r, op.pos);
    }
    return v;
  }

  Value term() {
    Value v = unary();
    while (lex_.peek().kind == Tok::Star || lex_.peek().kind == Tok::Slash || lex_.peek().kind == Tok::Wedge) {
      Token op = lex_.take();
      Value r = unary();
      if (op.kind == Tok::Star) {
        v = alg_.mul(v, r, op.pos);
      } else if (op.kind == Tok::Slash) {
        v = alg_.div(v, r, op.pos);
      } else {
        v = alg_.wedge(v, r, op.pos);
      }
    }
    return v;
  }

  Value unary() {
    if (lex_.peek().kind == Tok::Minus) {
      Token op = lex_.take();
      return alg_.neg(unary(), op.pos);
    }
    if (lex_.peek().kind == Tok::Plus) {
      lex_.take();
      return unary();
    }
    return power();
  }

  Value power() {
    Value base = primary();
    if (lex_.peek().kind == Tok::Caret) {
      Token op = lex_.take();
      Value e = exponent();
      return alg_.pow(base, e, op.pos);
    }
    return base;
  }

  Value exponent() {
    if (lex_.peek().kind == Tok::Minus) {
      Token op = lex_.take();
      return alg_.neg(exponent(), op.pos);
    }
    if (lex_.peek().kind == Tok::Plus) {
      lex_.take();
      return exponent();
    }
    return power();
  }

  Expr scalar_arg() {
    std::size_t pos = lex_.peek().pos;
    return alg_.scalar(expr(), pos);
  }

  Value primary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Number: {
        Token n = lex_.take();
        return alg_.number(parse_number_literal(n.text, n.pos));
      }
      case Tok::LParen: {
        lex_.take();
        Value v = expr();
        expect(Tok::RParen, "')'");
        return v;
      }
      case Tok::Ident:
        return identifier();
      case Tok::End:
        fail("unexpected end of input");
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  Value identifier() {
    Token id = lex_.take();
    std::vector<int> orders;
    bool marked = false;
    if (lex_.peek().kind == Tok::Prime) {
      marked = true;
      int count = 0;
      while (lex_.peek().kind == Tok::Prime) {
        lex_.take();
        ++count;
      }
      if (count == 1 && lex_.peek().kind == Tok::LBracket) {
        lex_.take();
        while (true) {
          Token n = expect(Tok::Number, "derivative order");
          Number o = parse_number_literal(n.text, n.pos);
          if (!o.is_integer() || o.is_negative()) throw ParseError("derivative order must be a non-negative integer", n.pos);
          orders.push_back(static_cast<int>(o.numerator()));
          if (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            continue;
          }
          expect(Tok::RBracket, "']'");
          break;
        }
      } else {
        orders.push_back(count);
      }
      if (lex_.peek().kind != Tok::LParen) fail("derivative marker must be followed by an argument list");
    }
    if (lex_.peek().kind != Tok::LParen) return alg_.variable(id.text, id.pos);

    if (!marked) {
      if (id.text == "d") {
        lex_.take();
        Value inner = expr();
        expect(Tok::RParen, "')'");
        return alg_.differential(inner, id.pos);
      }
      if (id.text == "int") {
        lex_.take();
        Expr lo = scalar_arg();
        expect(Tok::Comma, "','");
        Expr hi = scalar_arg();
        expect(Tok::Comma, "','");
        Expr body = scalar_arg();
        expect(Tok::Comma, "','");
        Token dummy = expect(Tok::Ident, "integration variable");
        expect(Tok::RParen, "')'");
        return alg_.integral(lo, hi, body, dummy.text, id.pos);
      }
      if (auto b = builtin_from_name(id.text)) {
        lex_.take();
        Expr arg = scalar_arg();
        expect(Tok::RParen, "')'");
        return alg_.builtin(*b, arg, id.pos);
      }
    }
    lex_.take();
    std::vector<Expr> args;
    if (lex_.peek().kind != Tok::RParen) {
      while (true) {
        args.push_back(scalar_arg());
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "')'");
    if (!orders.empty() && orders.size() != args.size()) {
      if (orders.size() == 1 && marked && args.size() > 1) {
        throw ParseError("derivative of a multi-argument function needs an explicit multi-index", id.pos);
      }
      throw ParseError("derivative multi-index does not match argument count", id.pos);
    }
    return alg_.apply(id.text, std::move(orders), std::move(args), id.pos);
  }

  Lexer lex_;
  Algebra& alg_;
};

/// Scalar algebra: builds Expr and rejects differentials and wedges.
struct ScalarAlgebra {
  using Value = Expr;

  bool strict = false;
  const std::vector<std::string>* functions = nullptr;

  static bool listed(const std::vector<std::string>* names, const std::string& n) {
    if (!names) return false;
    for (const auto& s : *names) {
      if (s == n) return true;
    }
    return false;
  }

  Value number(const Number& n) { return Expr(n); }
  Value variable(const std::string& name, std::size_t) { return var(name); }
  Value add(const Value& a, const Value& b, std::size_t) { return a + b; }
  Value sub(const Value& a, const Value& b, std::size_t) { return a - b; }
  Value mul(const Value& a, const Value& b, std::size_t) { return a * b; }
  Value div(const Value& a, const Value& b, std::size_t) { return a / b; }
  Value wedge(const Value&, const Value&, std::size_t pos) {
    throw ParseError("wedge product is only valid in form context", pos);
  }
  Value pow(const Value& a, const Value& b, std::size_t) { return darboux::pow(a, b); }
  Value neg(const Value& a, std::size_t) { return -a; }
  Value builtin(Builtin b, const Expr& arg, std::size_t) { return function(b, arg); }
  Value apply(const std::string& name, std::vector<int> orders, std::vector<Expr> args, std::size_t pos) {
    if (strict && !listed(functions, name)) throw ParseError("unknown function '" + name + "'", pos);
    return darboux::apply(name, std::move(args), std::move(orders));
  }
  Value integral(const Expr& lo, const Expr& hi, const Expr& body, const std::string& dummy, std::size_t) {
    return darboux::integral(lo, hi, body, intern(dummy));
  }
  Value differential(const Value&, std::size_t pos) {
    throw ParseError("differential d(...) is only valid in form context", pos);
  }
  Expr scalar(const Value& v, std::size_t) { return v; }
};

}  // namespace darboux::detail
