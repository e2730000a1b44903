#pragma once

#include <algorithm>
#include <cmath>

#include "darboux/geometry/form.hpp"
#include "darboux/geometry/linalg.hpp"
#include "darboux/symcore/parse.hpp"
#include "darboux/symcore/simplify.hpp"

namespace testing_support {

using namespace darboux;

/// Largest coefficient magnitude of `a` over random admissible points.
inline double max_abs(const DifferentialForm& a, int points = 10, std::uint64_t seed = 7, const Binding* fixed = nullptr) {
  std::vector<Expr> coeffs;
  for (const auto& [idx, c] : a.terms()) coeffs.push_back(c);
  if (coeffs.empty()) return 0.0;
  RankOptions o;
  o.points = points;
  o.seed = seed;
  o.fixed = fixed;
  ProbeSet probes(a.chart(), coeffs, o);
  double m = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (const auto& c : coeffs) m = std::max(m, std::fabs(evaluate(c, probes[p])));
  }
  return m;
}

inline bool same_form(const DifferentialForm& a, const DifferentialForm& b, double tol = 1e-9) {
  return max_abs(a - b) <= tol;
}

inline Expr P(const char* s) { return parse(s); }

}  // namespace testing_support
