#pragma once

#include "darboux/symcore/expr.hpp"

namespace darboux {

/// Canonical rational form over the non-polynomial kernels of `e`: numerator
/// expanded, denominators kept as normalized factors, exponentials merged,
/// constants folded. Closed-form definite integrals are taken from a small
/// table (polynomials, exp times polynomial, reciprocal linear, derivatives of
/// opaque functions); everything else stays an integral node. Idempotent.
Expr simplify(const Expr& e);

}  // namespace darboux
