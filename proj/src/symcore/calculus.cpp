#include "darboux/symcore/calculus.hpp"

#include <unordered_set>

#include "darboux/error.hpp"

namespace darboux {

namespace {

class Differentiator {
 public:
  explicit Differentiator(SymbolId v) : v_(v) {}

  Expr run(const Expr& e) {
    auto it = memo_.find(e.get());
    if (it != memo_.end()) return it->second.second;
    Expr d = compute(e);
    memo_.emplace(e.get(), std::make_pair(e, d));
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Number:
        return Expr(0);
      case NodeKind::Variable:
        return Expr(e.symbol() == v_ ? 1 : 0);
      case NodeKind::Add: {
        std::vector<Expr> terms;
        for (const auto& t : e.operands()) terms.push_back(run(t));
        return add(std::move(terms));
      }
      case NodeKind::Mul: {
        auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < ops.size(); ++i) {
          Expr di = run(ops[i]);
          if (di.is_zero()) continue;
          std::vector<Expr> f(ops.begin(), ops.end());
          f[i] = di;
          terms.push_back(mul(std::move(f)));
        }
        return add(std::move(terms));
      }
      case NodeKind::Pow: {
        const Expr& b = e.base();
        const Expr& x = e.exponent();
        Expr db = run(b);
        Expr dx = run(x);
        if (dx.is_zero()) {
          if (db.is_zero()) return Expr(0);
          return mul({x, pow(b, x - Expr(1)), db});
        }
        return e * (dx * log(b) + x * db / b);
      }
      case NodeKind::Function: {
        const Expr& a = e.operands()[0];
        Expr da = run(a);
        if (da.is_zero()) return Expr(0);
        switch (e.builtin()) {
          case Builtin::Exp: return e * da;
          case Builtin::Log: return da / a;
          case Builtin::Sin: return cos(a) * da;
          case Builtin::Cos: return -(sin(a) * da);
          case Builtin::Sqrt: return da / (Expr(2) * e);
        }
        return Expr(0);
      }
      case NodeKind::Apply: {
        auto args = e.operands();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < args.size(); ++i) {
          Expr da = run(args[i]);
          if (da.is_zero()) continue;
          std::vector<int> ord(e.orders().begin(), e.orders().end());
          ++ord[i];
          terms.push_back(apply(e.symbol(), std::vector<Expr>(args.begin(), args.end()), std::move(ord)) * da);
        }
        return add(std::move(terms));
      }
      case NodeKind::Integral: {
        SymbolId t = e.symbol();
        std::vector<Expr> terms;
        Expr dhi = run(e.upper());
        Expr dlo = run(e.lower());
        if (!dhi.is_zero()) terms.push_back(substitute(e.body(), t, e.upper()) * dhi);
        if (!dlo.is_zero()) terms.push_back(-(substitute(e.body(), t, e.lower()) * dlo));
        if (t != v_) {
          Differentiator inner(v_);
          Expr db = inner.run(e.body());
          if (!db.is_zero()) terms.push_back(integral(e.lower(), e.upper(), db, t));
        }
        return add(std::move(terms));
      }
    }
    return Expr(0);
  }

  SymbolId v_;
  // Keys are kept alive so node addresses are not reused while cached.
  std::unordered_map<const Node*, std::pair<Expr, Expr>> memo_;
};

class Substituter {
 public:
  explicit Substituter(const Substitution& s) : s_(s) {}

  Expr run(const Expr& e) {
    auto it = memo_.find(e.get());
    if (it != memo_.end()) return it->second.second;
    Expr r = compute(e);
    memo_.emplace(e.get(), std::make_pair(e, r));
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Number:
        return e;
      case NodeKind::Variable: {
        auto it = s_.variables.find(e.symbol());
        return it == s_.variables.end() ? e : it->second;
      }
      case NodeKind::Add: {
        std::vector<Expr> t;
        for (const auto& c : e.operands()) t.push_back(run(c));
        return add(std::move(t));
      }
      case NodeKind::Mul: {
        std::vector<Expr> t;
        for (const auto& c : e.operands()) t.push_back(run(c));
        return mul(std::move(t));
      }
      case NodeKind::Pow:
        return pow(run(e.base()), run(e.exponent()));
      case NodeKind::Function:
        return function(e.builtin(), run(e.operands()[0]));
      case NodeKind::Apply:
        return apply_node(e);
      case NodeKind::Integral:
        return integral_node(e);
    }
    return e;
  }

  Expr apply_node(const Expr& e) {
    std::vector<Expr> args;
    for (const auto& a : e.operands()) args.push_back(run(a));
    auto it = s_.functions.find(e.symbol());
    if (it == s_.functions.end()) {
      return apply(e.symbol(), std::move(args), std::vector<int>(e.orders().begin(), e.orders().end()));
    }
    const Lambda& l = it->second;
    if (l.params.size() != args.size()) {
      throw Error("function " + symbol_name(e.symbol()) + " substituted with a lambda of the wrong arity");
    }
    Expr body = l.body;
    auto ord = e.orders();
    for (std::size_t i = 0; i < ord.size(); ++i) {
      for (int k = 0; k < ord[i]; ++k) body = differentiate(body, l.params[i]);
    }
    Substitution inner;
    for (std::size_t i = 0; i < args.size(); ++i) inner.variables[l.params[i]] = args[i];
    return substitute(body, inner);
  }

  bool captures(const Expr& body, SymbolId t) const {
    for (const auto& [k, value] : s_.variables) {
      if (k == t || !depends_on(body, k)) continue;
      if (depends_on(value, t)) return true;
    }
    for (const auto& [f, l] : s_.functions) {
      if (!depends_on(l.body, t)) continue;
      bool is_param = false;
      for (SymbolId p : l.params) is_param = is_param || p == t;
      if (is_param) continue;
      for (const auto& [g, arity] : function_symbols(body)) {
        if (g == f) return true;
      }
    }
    return false;
  }

  Expr integral_node(const Expr& e) {
    Expr lo = run(e.lower());
    Expr hi = run(e.upper());
    SymbolId t = e.symbol();
    Expr body = e.body();
    if (captures(body, t)) {
      SymbolId fresh = fresh_symbol(symbol_name(t));
      body = substitute(body, t, var(fresh));
      t = fresh;
    }
    if (s_.variables.count(t)) {
      Substitution local = s_;
      local.variables.erase(t);
      return integral(lo, hi, substitute(body, local), t);
    }
    return integral(lo, hi, run(body), t);
  }

  const Substitution& s_;
  // Keys are kept alive so node addresses are not reused while cached.
  std::unordered_map<const Node*, std::pair<Expr, Expr>> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, SymbolId v) {
  Differentiator d(v);
  return d.run(e);
}

Expr differentiate(const Expr& e, std::string_view v) { return differentiate(e, intern(v)); }

Lambda lambda(std::vector<std::string_view> params, const Expr& body) {
  Lambda l;
  for (auto p : params) l.params.push_back(intern(p));
  l.body = body;
  return l;
}

Substitution& Substitution::set(std::string_view v, const Expr& e) {
  variables[intern(v)] = e;
  return *this;
}

Substitution& Substitution::set_function(std::string_view f, Lambda l) {
  functions[intern(f)] = std::move(l);
  return *this;
}

Expr substitute(const Expr& e, const Substitution& s) {
  if (s.empty()) return e;
  Substituter sub(s);
  return sub.run(e);
}

Expr substitute(const Expr& e, SymbolId v, const Expr& value) {
  Substitution s;
  s.variables[v] = value;
  return substitute(e, s);
}

}  // namespace darboux
