#include "darboux/geometry/curve.hpp"

#include "darboux/error.hpp"
#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/parse.hpp"

namespace darboux {

ParamCurve::ParamCurve(ChartPtr c, SymbolId t, std::vector<Expr> comps) : chart(std::move(c)), parameter(t), components(std::move(comps)) {
  if (components.size() != chart->dim()) throw ChartMismatch("curve needs one component per coordinate of " + chart->name());
}

ParamCurve::ParamCurve(ChartPtr c, const std::string& t, const std::vector<std::string>& comps) : chart(std::move(c)), parameter(intern(t)) {
  for (const auto& s : comps) components.push_back(parse(s));
  if (components.size() != chart->dim()) throw ChartMismatch("curve needs one component per coordinate of " + chart->name());
}

std::vector<Expr> ParamCurve::velocity() const {
  std::vector<Expr> out;
  for (const auto& c : components) out.push_back(differentiate(c, parameter));
  return out;
}

std::vector<double> ParamCurve::at(double t, const Binding& data) const {
  Binding b = data;
  b.variables[parameter] = t;
  Evaluator ev(b);
  std::vector<double> out;
  for (const auto& c : components) out.push_back(ev(c));
  return out;
}

std::vector<double> ParamCurve::velocity_at(double t, const Binding& data) const {
  Binding b = data;
  b.variables[parameter] = t;
  Evaluator ev(b);
  std::vector<double> out;
  for (const auto& c : velocity()) out.push_back(ev(c));
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {0.5 * (lo + hi)};
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace darboux
