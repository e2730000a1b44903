#include "darboux/examples/classical.hpp"

#include <cmath>
#include <string>

#include "darboux/error.hpp"
#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

Expr dalembert_wave(std::string_view a, std::string_view b, const Expr& t, const Expr& x) {
  SymbolId s = fresh_symbol("s");
  Expr half = Expr(Number::rational(1, 2));
  return half * (apply(a, {x - t}) + apply(a, {x + t})) + half * integral(x - t, x + t, apply(b, {var(s)}), s);
}

Expr schwarzian(const Expr& v, std::string_view x) {
  Expr d1 = simplify(differentiate(v, x));
  if (d1.is_zero()) throw Error("schwarzian: first derivative vanishes identically");
  Expr d2 = differentiate(d1, x);
  Expr d3 = differentiate(d2, x);
  Expr ratio = d2 / d1;
  return simplify(d3 / d1 - Expr(Number::rational(3, 2)) * ratio * ratio);
}

std::vector<double> schwarzian(const CurveSolution& v, const std::vector<double>& samples, const Binding& data) {
  if (v.state().size() != 3) throw Error("schwarzian: curve state must be (v, v', v'')");
  std::vector<double> out;
  out.reserve(samples.size());
  for (double t : samples) {
    auto y = v.value(t, data);
    auto dy = v.derivative(t, data);
    if (y[1] == 0.0 || !std::isfinite(y[1])) throw EvalError("schwarzian: v' vanishes at " + std::to_string(t));
    double r = y[2] / y[1];
    out.push_back(dy[2] / y[1] - 1.5 * r * r);
  }
  return out;
}

CurveSolution reconstruct_from_schwarzian(const Expr& F, const std::vector<double>& init, double x0,
                                          std::pair<double, double> span, const Binding& data,
                                          const RKConfig& config, std::string_view x) {
  if (init.size() != 3) throw Error("reconstruct_from_schwarzian: init must be (v, v', v'')");
  if (init[1] == 0.0) throw Error("reconstruct_from_schwarzian: v'(x0) = 0");
  SymbolId v = fresh_symbol("v"), v1 = fresh_symbol("v_x"), v2 = fresh_symbol("v_xx");
  LieODE ode;
  ode.parameter = intern(x);
  ode.state = {v, v1, v2};
  Expr r = var(v2) / var(v1);
  ode.rhs = {var(v1), var(v2), var(v1) * (F + Expr(Number::rational(3, 2)) * r * r)};
  ode.domain = {Constraint{Constraint::Kind::Nonzero, var(v1)}};
  return integrate_rk(ode, init, x0, span.first, span.second, config, data);
}

}  // namespace darboux
