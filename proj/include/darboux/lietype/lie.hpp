#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "darboux/eds/pfaffian.hpp"

namespace darboux {

/// A curve as a map from a one-dimensional parameter chart.
SmoothMap curve_map(const ParamCurve& curve);

struct FiberOptions {
  /// Concrete data functions; unbound functions get generic implementations.
  const Binding* data = nullptr;
  int samples = 25;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
};

/// The fiber q⁻¹(S) over data S parametrized by (data parameters, fiber coordinates),
/// and the system restricted to it.
struct FiberRestriction {
  ChartPtr chart;  ///< data parameters then fiber coordinates, with the product constraints pulled back
  std::vector<SymbolId> parameters;
  std::vector<SymbolId> fiber;
  SmoothMap parametrization;              ///< chart → M₁ × M₂
  std::vector<DifferentialForm> forms;    ///< K restricted to the fiber
  double consistency_residual = 0.0;      ///< max relative |q∘P − S| at the samples
};

/// Solves q(m) = S(t) for the product coordinates not named in `known`. Equations
/// are taken one at a time when a single unknown enters their numerator linearly
/// (log(A) − B is first rewritten as A − exp(B)). Throws Error when some
/// coordinate cannot be solved this way.
std::vector<Expr> solve_fiber(const SmoothMap& q, const SmoothMap& data, const std::vector<SymbolId>& known);

/// Parameters of `data` that are also product coordinates are identified with them.
FiberRestriction restrict_to_fiber(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                                   const std::vector<std::string>& fiber, const FiberOptions& options = {});
/// With an explicit parametrization, one component per product coordinate.
FiberRestriction restrict_to_fiber(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                                   const std::vector<std::string>& fiber, std::vector<Expr> components,
                                   const FiberOptions& options = {});

/// d(state)/d(parameter) = rhs. Other parameters of a multi-parameter system stay symbolic.
struct LieODE {
  SymbolId parameter = 0;
  std::vector<SymbolId> state;
  std::vector<Expr> rhs;
  /// Constraints on (parameters, state) monitored during numeric integration.
  std::vector<Constraint> domain;
};

/// One LieODE per parameter direction of the fiber chart.
struct LieSystem {
  std::vector<SymbolId> parameters;
  std::vector<SymbolId> state;
  std::vector<std::vector<Expr>> rhs;  ///< by parameter, then state
  std::vector<Constraint> domain;
  /// Largest mismatch of mixed partials at the probes (zero for one parameter).
  double compatibility_residual = 0.0;

  LieODE direction(std::size_t a) const;
};

/// Solves the restricted forms for the fiber differentials. Throws
/// CharacteristicError when their coefficient matrix is singular, and Error when
/// mixed partials disagree by more than 1e-8.
LieSystem as_lie_system(const FiberRestriction& f, const FiberOptions& options = {});
/// Single-parameter case; throws Error for more parameters.
LieODE as_ode(const FiberRestriction& f, const FiberOptions& options = {});

struct Triangularization {
  bool ok = false;
  std::vector<std::size_t> order;  ///< state indices
  std::string reason;
};

/// Each right-hand side may depend on the parameter and earlier states, and
/// affinely on its own state.
Triangularization triangularize(const LieODE& ode);

struct RKConfig {
  double rtol = 1e-9;
  double atol = 1e-11;
  int max_steps = 200000;
  /// Steps shorter than this fraction of the span count as underflow.
  double min_step = 1e-14;
};

/// Symbolic or densely sampled solution of a LieODE or LieSystem.
class CurveSolution {
 public:
  enum class Kind { Symbolic, Sampled };

  static CurveSolution symbolic(std::vector<SymbolId> parameters, std::vector<SymbolId> state, std::vector<Expr> exprs);

  Kind kind() const { return kind_; }
  const std::vector<SymbolId>& parameters() const { return params_; }
  const std::vector<SymbolId>& state() const { return state_; }
  /// Per-state expressions of a symbolic solution.
  const std::vector<Expr>& exprs() const { return exprs_; }
  std::string method() const { return kind_ == Kind::Symbolic ? "quadrature" : "rk45"; }

  std::vector<double> value(double t, const Binding& data) const;
  std::vector<double> value(const std::vector<double>& params, const Binding& data) const;
  /// d(state)/dt: derivative of the symbolic expressions, or the right-hand side at the interpolated state.
  std::vector<double> derivative(double t, const Binding& data) const;

  double lower() const { return lo_; }
  double upper() const { return hi_; }
  /// Largest scaled local error estimate over accepted steps.
  double error_estimate() const { return error_; }
  int steps() const { return static_cast<int>(segments_.size()); }

 private:
  friend CurveSolution integrate_rk(const LieODE&, const std::vector<double>&, double, double, double,
                                    const RKConfig&, const Binding&);
  struct Segment {
    double t0 = 0.0, h = 0.0;
    Eigen::VectorXd r1, r2, r3, r4, r5;
  };
  const Segment& segment(double t) const;

  Kind kind_ = Kind::Symbolic;
  std::vector<SymbolId> params_;
  std::vector<SymbolId> state_;
  std::vector<Expr> exprs_;
  std::vector<Expr> derivs_;  ///< symbolic derivatives, or the right-hand sides of a sampled solution
  Eigen::VectorXd init_;
  std::vector<Segment> segments_;  ///< sorted by start time
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  double error_ = 0.0;
};

/// States as nested integrals and exponentials of integrals, starting from `init` at `t0`.
/// Throws Error when the ODE is not triangular.
CurveSolution integrate_quadrature(const LieODE& ode, const std::vector<Expr>& init, const Expr& t0);
/// Integrates along each parameter in turn from `base`, later parameters held at their base values.
CurveSolution integrate_quadrature(const LieSystem& system, const std::vector<Expr>& init, const std::vector<Expr>& base);

/// Dormand–Prince 5(4) with dense output over [lo, hi] from (t0, init), t0 ∈ [lo, hi].
/// `data` binds the functions and fixed parameters of the right-hand sides.
/// Throws DomainViolation when a domain constraint fails and IntegrationError on step underflow.
CurveSolution integrate_rk(const LieODE& ode, const std::vector<double>& init, double t0, double lo, double hi,
                           const RKConfig& config, const Binding& data);

/// State at `point` of a multi-parameter system, integrating along each parameter in turn
/// from `base` with Dormand–Prince 5(4).
std::vector<double> integrate_rk_point(const LieSystem& system, const std::vector<double>& init,
                                       const std::vector<double>& base, const std::vector<double>& point,
                                       const RKConfig& config, const Binding& data);

/// max |ψ(σ')| over the restricted forms ψ at `samples` points of [lo, hi], where σ(t) = (t, state(t)).
double lie_residual(const FiberRestriction& f, const CurveSolution& s, double lo, double hi, const Binding& data,
                    int samples = 20);

}  // namespace darboux
