#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/expr.hpp"

namespace darboux {

struct Binding;

using Callable = std::function<double(std::span<const double>)>;

/// Numeric implementation of an opaque function symbol: either an expression
/// in its parameters (derivatives taken symbolically and cached) or a callable
/// (derivatives by central differences with Richardson extrapolation).
class FunctionImpl {
 public:
  static std::shared_ptr<const FunctionImpl> expression(Lambda l);
  static std::shared_ptr<const FunctionImpl> callable(std::size_t arity, Callable f);

  std::size_t arity() const { return arity_; }
  bool is_expression() const { return !callable_; }
  const Lambda& lambda() const { return lambda_; }
  /// Symbolic partial derivative of an expression-bound function.
  Expr derivative(std::span<const int> orders) const;

  double eval(std::span<const double> args, std::span<const int> orders, const Binding& b) const;

 private:
  FunctionImpl() = default;
  double finite_difference(std::vector<double> args, std::vector<int> orders, const Binding& b) const;

  std::size_t arity_ = 0;
  Lambda lambda_;
  Callable callable_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<int>, Expr> derivatives_;
};

struct Binding {
  std::unordered_map<SymbolId, double> variables;
  std::unordered_map<SymbolId, std::shared_ptr<const FunctionImpl>> functions;
  double quad_tol = 1e-10;
  int max_depth = 24;
  /// Base step for callable derivatives; order k uses fd_step * 10^(k-1).
  double fd_step = 1e-4;
  int richardson = 1;

  Binding& set(std::string_view name, double value);
  Binding& set(SymbolId id, double value);
  Binding& bind(std::string_view name, Lambda l);
  Binding& bind(std::string_view name, std::size_t arity, Callable f);
  Binding& bind(SymbolId id, std::shared_ptr<const FunctionImpl> impl);
  /// Parse `body` as a function of `params`.
  Binding& bind_text(std::string_view name, std::vector<std::string_view> params, std::string_view body);
};

/// Numeric value of `e`. Throws EvalError naming the unbound symbol or the
/// sub-expression that produced a non-finite value.
double evaluate(const Expr& e, const Binding& b);

/// Reusable evaluator. Integral values are cached per node and free-variable
/// values, which pays off when the same nested integrals are requested repeatedly.
class Evaluator {
 public:
  explicit Evaluator(const Binding& b) : b_(b) {}
  double operator()(const Expr& e);
  /// Evaluate with extra innermost bindings (shadowing the Binding's variables).
  double operator()(const Expr& e, std::span<const SymbolId> names, std::span<const double> values);
  const Binding& binding() const { return b_; }

 private:
  double eval(const Expr& e);
  double lookup(SymbolId v) const;
  double integral(const Expr& e);
  [[noreturn]] void fail(const Expr& e, const std::string& why) const;

  const Binding& b_;
  std::vector<std::pair<SymbolId, double>> scope_;
  std::unordered_map<const Node*, std::vector<SymbolId>> free_vars_;
  std::map<std::pair<const Node*, std::vector<double>>, double> integral_cache_;
  std::vector<Expr> keep_alive_;
};

}  // namespace darboux
