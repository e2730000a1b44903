#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "darboux/lietype/lie.hpp"

namespace darboux {

/// (a(x − t) + a(x + t))/2 + ½∫_{x−t}^{x+t} b.
Expr dalembert_wave(std::string_view a, std::string_view b, const Expr& t, const Expr& x);

/// v‴/v′ − (3/2)(v″/v′)² with respect to `x`.
Expr schwarzian(const Expr& v, std::string_view x);

/// Schwarzian of a curve whose state is (v, v′, v″), using the derivative channel
/// for v‴. Throws EvalError where v′ vanishes.
std::vector<double> schwarzian(const CurveSolution& v, const std::vector<double>& samples, const Binding& data);

/// v‴ = v′(F + (3/2)(v″/v′)²) from (v, v′, v″) at x0, integrated over `span`
/// with Dormand–Prince. F is an expression in `x`. Throws DomainViolation when v′
/// reaches zero.
CurveSolution reconstruct_from_schwarzian(const Expr& F, const std::vector<double>& init, double x0,
                                          std::pair<double, double> span, const Binding& data = {},
                                          const RKConfig& config = {}, std::string_view x = "x");

}  // namespace darboux
