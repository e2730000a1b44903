#pragma once

#include <string_view>
#include <unordered_map>
#include <vector>

#include "darboux/symcore/expr.hpp"

namespace darboux {

Expr differentiate(const Expr& e, SymbolId v);
Expr differentiate(const Expr& e, std::string_view v);

/// f(params) := body, used to substitute a concrete function for an opaque symbol.
struct Lambda {
  std::vector<SymbolId> params;
  Expr body;
};

Lambda lambda(std::vector<std::string_view> params, const Expr& body);

struct Substitution {
  std::unordered_map<SymbolId, Expr> variables;
  std::unordered_map<SymbolId, Lambda> functions;

  Substitution& set(std::string_view v, const Expr& e);
  Substitution& set_function(std::string_view f, Lambda l);
  bool empty() const { return variables.empty() && functions.empty(); }
};

/// Simultaneous substitution. Integration dummies that would capture a free
/// variable of a replacement are renamed. Derivatives of substituted functions
/// are formed symbolically.
Expr substitute(const Expr& e, const Substitution& s);
Expr substitute(const Expr& e, SymbolId v, const Expr& value);

}  // namespace darboux
