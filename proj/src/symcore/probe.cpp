#include "darboux/symcore/probe.hpp"

#include <cmath>
#include <unordered_set>

#include "darboux/error.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

double random_rational(std::mt19937_64& rng, double lo, double hi, int den) {
  auto a = static_cast<std::int64_t>(std::ceil(lo * den));
  auto b = static_cast<std::int64_t>(std::floor(hi * den));
  if (b < a) return 0.5 * (lo + hi);
  std::uniform_int_distribution<std::int64_t> dist(a, b);
  return static_cast<double>(dist(rng)) / den;
}

namespace {

Expr generic_function(std::size_t arity, std::mt19937_64& rng) {
  std::vector<Expr> params;
  for (std::size_t i = 0; i < arity; ++i) params.push_back(var("_p" + std::to_string(i)));
  auto coef = [&](double lo, double hi) { return Expr(Number::rational(static_cast<std::int64_t>(std::llround(random_rational(rng, lo, hi) * 97)), 97)); };
  Expr lin = coef(-1, 1);
  Expr phase = coef(-1, 1);
  Expr growth;
  for (const auto& p : params) {
    lin = lin + coef(0.5, 1.5) * p;
    phase = phase + coef(0.3, 1.2) * p;
    growth = growth + coef(0.1, 0.4) * p;
  }
  return lin + coef(0.5, 1.0) * sin(phase) + coef(0.2, 0.6) * exp(growth);
}

}  // namespace

void bind_generic_functions(Binding& b, const std::vector<Expr>& exprs, std::mt19937_64& rng) {
  for (const auto& e : exprs) {
    for (const auto& [f, arity] : function_symbols(e)) {
      if (b.functions.count(f)) continue;
      Lambda l;
      for (std::size_t i = 0; i < arity; ++i) l.params.push_back(intern("_p" + std::to_string(i)));
      l.body = generic_function(arity, rng);
      b.functions[f] = FunctionImpl::expression(std::move(l));
    }
  }
}

Binding draw_probe(const std::vector<Expr>& exprs, const ProbeOptions& options, std::mt19937_64& rng,
                   const Binding& functions) {
  std::vector<SymbolId> vars;
  std::unordered_set<SymbolId> seen;
  for (const auto& e : exprs) {
    for (SymbolId v : free_variables(e)) {
      if (seen.insert(v).second) vars.push_back(v);
    }
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    Binding b = functions;
    if (options.fixed) {
      for (const auto& [k, v] : options.fixed->variables) b.variables[k] = v;
    }
    if (options.sampler && !options.sampler(b, rng)) continue;
    for (SymbolId v : vars) {
      if (!b.variables.count(v)) b.variables[v] = random_rational(rng, -2.0, 2.0);
    }
    bool ok = true;
    for (const auto& e : exprs) {
      try {
        evaluate(e, b);
      } catch (const EvalError&) {
        ok = false;
        break;
      }
    }
    if (ok) return b;
  }
  throw RankError("no admissible probe point found after " + std::to_string(options.max_attempts) + " attempts");
}

bool is_zero(const Expr& e, const ProbeOptions& options) {
  Expr s = simplify(e);
  if (s.is_zero()) return true;
  if (s.is_number()) return std::fabs(s.number().value()) <= options.threshold;
  std::mt19937_64 rng(options.seed);
  Binding functions;
  if (options.fixed) functions = *options.fixed;
  bind_generic_functions(functions, {e}, rng);
  std::vector<Expr> terms;
  if (e.kind() == NodeKind::Add) {
    terms.assign(e.operands().begin(), e.operands().end());
  } else {
    terms.push_back(e);
  }
  for (int i = 0; i < options.points; ++i) {
    Binding b = draw_probe({e, s}, options, rng, functions);
    double v = evaluate(s, b);
    double scale = 0.0;
    for (const auto& t : terms) scale += std::fabs(evaluate(t, b));
    if (std::fabs(v) > options.threshold * (1.0 + scale)) return false;
  }
  return true;
}

}  // namespace darboux
