#pragma once

#include <string>
#include <vector>

#include "darboux/geometry/chart.hpp"
#include "darboux/symcore/evaluate.hpp"

namespace darboux {

/// Curve into a chart, one expression per coordinate in a single parameter.
struct ParamCurve {
  ChartPtr chart;
  SymbolId parameter = 0;
  std::vector<Expr> components;

  ParamCurve() = default;
  ParamCurve(ChartPtr c, SymbolId t, std::vector<Expr> comps);
  ParamCurve(ChartPtr c, const std::string& t, const std::vector<std::string>& comps);

  std::vector<Expr> velocity() const;
  /// Coordinates at t; `data` binds the free functions of the components.
  std::vector<double> at(double t, const Binding& data) const;
  std::vector<double> velocity_at(double t, const Binding& data) const;
};

/// n evenly spaced samples of [lo, hi] (endpoints included for n > 1).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace darboux
