#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "darboux/symcore/evaluate.hpp"
#include "darboux/symcore/expr.hpp"

namespace darboux {

/// Numeric probing configuration shared by zero tests and rank computations.
struct ProbeOptions {
  int points = 12;
  double threshold = 1e-9;
  int max_attempts = 200;
  std::uint64_t seed = 0;
  /// Assigns coordinates for one draw; returning false rejects it. Variables it
  /// leaves unset receive rationals drawn from [-2, 2].
  std::function<bool(Binding&, std::mt19937_64&)> sampler;
  /// Variables and functions that hold at every probe (parameters of the problem).
  const Binding* fixed = nullptr;
};

/// Rational p/den drawn uniformly from [lo, hi].
double random_rational(std::mt19937_64& rng, double lo, double hi, int den = 97);

/// Bind every opaque function of `exprs` that `b` leaves unbound to a random
/// smooth expression with non-vanishing derivatives of all orders.
void bind_generic_functions(Binding& b, const std::vector<Expr>& exprs, std::mt19937_64& rng);

/// Draw a binding covering all free variables of `exprs`. Throws RankError when
/// no admissible point is found within the attempt budget.
Binding draw_probe(const std::vector<Expr>& exprs, const ProbeOptions& options, std::mt19937_64& rng,
                   const Binding& functions);

/// Simplify, then require |e| <= threshold * (1 + scale) at every probe point,
/// where scale sums the magnitudes of the top-level terms of `e`.
bool is_zero(const Expr& e, const ProbeOptions& options = {});

}  // namespace darboux
