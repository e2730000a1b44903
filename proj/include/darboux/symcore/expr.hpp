#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "darboux/symcore/number.hpp"

namespace darboux {

/// Interned identifier. Ids are process-local; ordering and hashing use the name.
using SymbolId = std::uint32_t;

SymbolId intern(std::string_view name);
const std::string& symbol_name(SymbolId id);
std::size_t symbol_hash(SymbolId id);
/// A name not yet interned, of the form `<stem>#<n>`; used for renamed integration dummies.
SymbolId fresh_symbol(std::string_view stem);

enum class NodeKind : std::uint8_t { Number, Variable, Add, Mul, Pow, Function, Apply, Integral };
enum class Builtin : std::uint8_t { Exp, Log, Sin, Cos, Sqrt };

std::string_view builtin_name(Builtin b);

struct Node;

/// Immutable symbolic expression. Copies share the underlying tree, so an Expr
/// can be passed across threads freely.
class Expr {
 public:
  Expr();
  Expr(Number n);  // NOLINT(google-explicit-constructor)
  Expr(int n) : Expr(Number(n)) {}  // NOLINT(google-explicit-constructor)
  explicit Expr(double v) : Expr(Number(v)) {}

  NodeKind kind() const;
  bool is_number() const { return kind() == NodeKind::Number; }
  bool is_zero() const;
  bool is_one() const;
  const Number& number() const;

  /// Variable name, applied function name, or integration dummy.
  SymbolId symbol() const;
  Builtin builtin() const;
  /// Add/Mul terms, {base, exponent} for Pow, the argument of a builtin,
  /// applied-function arguments, and {lower, upper, body} for integrals.
  std::span<const Expr> operands() const;
  /// Derivative multi-index of an applied function (one entry per argument).
  std::span<const int> orders() const;

  const Expr& base() const { return operands()[0]; }
  const Expr& exponent() const { return operands()[1]; }
  const Expr& lower() const { return operands()[0]; }
  const Expr& upper() const { return operands()[1]; }
  const Expr& body() const { return operands()[2]; }

  std::size_t hash() const;
  /// Number of nodes in the tree.
  std::size_t size() const;
  const Node* get() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Node&& n);
  std::shared_ptr<const Node> node_;
};

/// Total structural order (by hash, then structure); the canonical term order.
int compare(const Expr& a, const Expr& b);
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

Expr var(std::string_view name);
Expr var(SymbolId id);
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr function(Builtin b, const Expr& arg);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sqrt(const Expr& e);
/// Opaque function application f(args); `orders` is the derivative multi-index.
Expr apply(SymbolId fn, std::vector<Expr> args, std::vector<int> orders = {});
Expr apply(std::string_view fn, std::vector<Expr> args, std::vector<int> orders = {});
Expr integral(const Expr& lower, const Expr& upper, const Expr& body, SymbolId dummy);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

/// Grammar-conformant text; `parse(to_string(e))` prints back identically.
std::string to_string(const Expr& e);

/// Free variables (integration dummies are bound inside their integral).
std::vector<SymbolId> free_variables(const Expr& e);
bool depends_on(const Expr& e, SymbolId v);
/// Names of opaque functions applied anywhere in `e`, with their arity.
std::vector<std::pair<SymbolId, std::size_t>> function_symbols(const Expr& e);

}  // namespace darboux
