#include "darboux/symcore/evaluate.hpp"

#include <cmath>

#include "darboux/error.hpp"
#include "darboux/symcore/parse.hpp"
#include "darboux/symcore/quadrature.hpp"

namespace darboux {

std::shared_ptr<const FunctionImpl> FunctionImpl::expression(Lambda l) {
  std::shared_ptr<FunctionImpl> f(new FunctionImpl());
  f->arity_ = l.params.size();
  f->lambda_ = std::move(l);
  return f;
}

std::shared_ptr<const FunctionImpl> FunctionImpl::callable(std::size_t arity, Callable c) {
  std::shared_ptr<FunctionImpl> f(new FunctionImpl());
  f->arity_ = arity;
  f->callable_ = std::move(c);
  return f;
}

Expr FunctionImpl::derivative(std::span<const int> orders) const {
  std::vector<int> key(orders.begin(), orders.end());
  bool plain = true;
  for (int o : key) plain = plain && o == 0;
  if (plain) return lambda_.body;
  std::lock_guard lock(mutex_);
  auto it = derivatives_.find(key);
  if (it != derivatives_.end()) return it->second;
  Expr d = lambda_.body;
  for (std::size_t i = 0; i < key.size(); ++i) {
    for (int k = 0; k < key[i]; ++k) d = differentiate(d, lambda_.params[i]);
  }
  derivatives_.emplace(key, d);
  return d;
}

double FunctionImpl::eval(std::span<const double> args, std::span<const int> orders, const Binding& b) const {
  if (args.size() != arity_) throw EvalError("function called with " + std::to_string(args.size()) + " arguments, expected " + std::to_string(arity_));
  if (callable_) {
    bool plain = true;
    for (int o : orders) plain = plain && o == 0;
    if (plain) return callable_(args);
    return finite_difference(std::vector<double>(args.begin(), args.end()), std::vector<int>(orders.begin(), orders.end()), b);
  }
  Expr d = derivative(orders);
  Evaluator ev(b);
  return ev(d, lambda_.params, args);
}

double FunctionImpl::finite_difference(std::vector<double> args, std::vector<int> orders, const Binding& b) const {
  std::size_t i = 0;
  while (i < orders.size() && orders[i] == 0) ++i;
  if (i == orders.size()) return callable_(args);
  int k = orders[i];
  orders[i] = 0;
  double h0 = b.fd_step * std::pow(10.0, k - 1);
  double x0 = args[i];
  auto central = [&](double h) {
    // k-th central difference with nodes x0 + (k/2 - j) h.
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      args[i] = x0 + (0.5 * k - j) * h;
      double v = finite_difference(args, orders, b);
      sum += ((j % 2 == 0) ? binom : -binom) * v;
      binom = binom * (k - j) / (j + 1);
    }
    args[i] = x0;
    return sum / std::pow(h, k);
  };
  // Richardson table for an error expansion in even powers of h.
  std::vector<double> row;
  double h = h0;
  for (int level = 0; level <= b.richardson; ++level) {
    row.push_back(central(h));
    h *= 0.5;
  }
  double factor = 4.0;
  for (int level = 1; level <= b.richardson; ++level) {
    for (std::size_t j = row.size() - 1; j >= static_cast<std::size_t>(level); --j) {
      row[j] = (factor * row[j] - row[j - 1]) / (factor - 1.0);
    }
    factor *= 4.0;
  }
  return row.back();
}

Binding& Binding::set(std::string_view name, double value) { return set(intern(name), value); }

Binding& Binding::set(SymbolId id, double value) {
  variables[id] = value;
  return *this;
}

Binding& Binding::bind(std::string_view name, Lambda l) { return bind(intern(name), FunctionImpl::expression(std::move(l))); }

Binding& Binding::bind(std::string_view name, std::size_t arity, Callable f) {
  return bind(intern(name), FunctionImpl::callable(arity, std::move(f)));
}

Binding& Binding::bind(SymbolId id, std::shared_ptr<const FunctionImpl> impl) {
  functions[id] = std::move(impl);
  return *this;
}

Binding& Binding::bind_text(std::string_view name, std::vector<std::string_view> params, std::string_view body) {
  return bind(name, lambda(std::move(params), parse(body)));
}

double evaluate(const Expr& e, const Binding& b) {
  Evaluator ev(b);
  return ev(e);
}

namespace {

std::string describe(const Expr& e) {
  std::string s = to_string(e);
  if (s.size() > 160) s = s.substr(0, 157) + "...";
  return s;
}

}  // namespace

void Evaluator::fail(const Expr& e, const std::string& why) const { throw EvalError(why + " in '" + describe(e) + "'"); }

double Evaluator::operator()(const Expr& e) {
  if (integral_cache_.size() > 2000000) integral_cache_.clear();
  if (keep_alive_.size() > 4096) {
    keep_alive_.clear();
    integral_cache_.clear();
    free_vars_.clear();
  }
  keep_alive_.push_back(e);
  return eval(e);
}

double Evaluator::operator()(const Expr& e, std::span<const SymbolId> names, std::span<const double> values) {
  std::size_t mark = scope_.size();
  for (std::size_t i = 0; i < names.size(); ++i) scope_.emplace_back(names[i], values[i]);
  double v = 0.0;
  try {
    v = (*this)(e);
  } catch (...) {
    scope_.resize(mark);
    throw;
  }
  scope_.resize(mark);
  return v;
}

double Evaluator::lookup(SymbolId v) const {
  for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
    if (it->first == v) return it->second;
  }
  auto it = b_.variables.find(v);
  if (it == b_.variables.end()) throw EvalError("unbound variable '" + symbol_name(v) + "'");
  return it->second;
}

double Evaluator::eval(const Expr& e) {
  double v = 0.0;
  switch (e.kind()) {
    case NodeKind::Number:
      return e.number().value();
    case NodeKind::Variable:
      return lookup(e.symbol());
    case NodeKind::Add:
      for (const auto& t : e.operands()) v += eval(t);
      break;
    case NodeKind::Mul:
      v = 1.0;
      for (const auto& f : e.operands()) v *= eval(f);
      break;
    case NodeKind::Pow: {
      double b = eval(e.base());
      const Expr& x = e.exponent();
      if (x.is_number() && x.number().is_integer()) {
        std::int64_t n = x.number().numerator();
        if (b == 0.0 && n < 0) fail(e, "division by zero");
        v = std::pow(b, static_cast<double>(n));
      } else {
        v = std::pow(b, eval(x));
      }
      break;
    }
    case NodeKind::Function: {
      double a = eval(e.operands()[0]);
      switch (e.builtin()) {
        case Builtin::Exp: v = std::exp(a); break;
        case Builtin::Log:
          if (a <= 0.0) fail(e, "logarithm of non-positive value " + std::to_string(a));
          v = std::log(a);
          break;
        case Builtin::Sin: v = std::sin(a); break;
        case Builtin::Cos: v = std::cos(a); break;
        case Builtin::Sqrt:
          if (a < 0.0) fail(e, "square root of negative value " + std::to_string(a));
          v = std::sqrt(a);
          break;
      }
      break;
    }
    case NodeKind::Apply: {
      auto it = b_.functions.find(e.symbol());
      if (it == b_.functions.end()) throw EvalError("unbound function '" + symbol_name(e.symbol()) + "'");
      std::vector<double> args;
      args.reserve(e.operands().size());
      for (const auto& a : e.operands()) args.push_back(eval(a));
      v = it->second->eval(args, e.orders(), b_);
      break;
    }
    case NodeKind::Integral:
      v = integral(e);
      break;
  }
  if (!std::isfinite(v)) fail(e, "non-finite value");
  return v;
}

double Evaluator::integral(const Expr& e) {
  auto fv = free_vars_.find(e.get());
  if (fv == free_vars_.end()) fv = free_vars_.emplace(e.get(), free_variables(e)).first;
  std::vector<double> key;
  key.reserve(fv->second.size());
  for (SymbolId s : fv->second) key.push_back(lookup(s));
  auto cached = integral_cache_.find({e.get(), key});
  if (cached != integral_cache_.end()) return cached->second;

  double lo = eval(e.lower());
  double hi = eval(e.upper());
  SymbolId t = e.symbol();
  const Expr& body = e.body();
  auto f = [&](double x) {
    scope_.emplace_back(t, x);
    double y = 0.0;
    try {
      y = eval(body);
    } catch (...) {
      scope_.pop_back();
      throw;
    }
    scope_.pop_back();
    return y;
  };
  QuadratureOptions opt;
  opt.abs_tol = b_.quad_tol;
  opt.max_depth = b_.max_depth;
  double v = 0.0;
  try {
    v = integrate_gk15(f, lo, hi, opt).value;
  } catch (const QuadratureError& err) {
    throw QuadratureError(std::string(err.what()) + " in '" + describe(e) + "'");
  }
  integral_cache_.emplace(std::make_pair(e.get(), std::move(key)), v);
  return v;
}

}  // namespace darboux
