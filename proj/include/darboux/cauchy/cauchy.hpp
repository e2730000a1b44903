#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "darboux/lietype/lie.hpp"
#include "darboux/quotient/quotient.hpp"

namespace darboux {

/// Scalar PDE checked by finite differences. Variables of `residual` that are not
/// chart coordinates and are named `dependent` + "_" + letters from `independents`
/// are replaced by difference quotients of the dependent coordinate.
struct ScalarPDE {
  Expr residual;
  std::string dependent = "u";
  std::vector<std::string> independents = {"x", "y"};
};

enum class Method { Auto, Quadrature, RK45 };

std::string to_string(Method m);
/// "auto", "quadrature" or "rk45"; throws InputError otherwise.
Method parse_method(const std::string& text);

struct CauchyProblem {
  CauchyProblem(PfaffianSystem system, std::shared_ptr<const QuotientRepresentation> rep, SmoothMap data);

  PfaffianSystem system;
  /// Singular systems for the non-characteristic test of one-parameter data.
  std::optional<PfaffianSystem> hat, check;
  std::shared_ptr<const QuotientRepresentation> rep;
  /// Cauchy data S from a parameter chart into the base chart.
  SmoothMap data;
  /// Per data parameter; defaults to the data chart ranges.
  std::vector<std::pair<double, double>> ranges;
  /// t₀; defaults to the midpoint of the ranges.
  std::vector<double> base_point;
  /// Fiber coordinates on M₁ × M₂ and their values at t₀.
  std::vector<std::string> fiber;
  std::vector<Expr> fiber_point;
  /// Explicit fiber parametrization, one component per product coordinate.
  std::optional<std::vector<Expr>> parametrization;
  /// Fiber coordinates of M₁ → M₁/G and M₂ → M₂/G for the second method.
  std::vector<std::string> fiber1, fiber2;
  /// Expected dimensions of the projections: dim π₁(L) = n₂, dim π₂(L) = n₁.
  int n1 = 1, n2 = 1;
  Binding functions;
  std::optional<ScalarPDE> pde;
  Method method = Method::Auto;
  RKConfig rk;
  /// Fraction of each range added on both sides of numeric integration spans.
  double padding = 0.05;
  std::uint64_t seed = 0;

  std::vector<std::pair<double, double>> parameter_ranges() const;
  std::vector<double> base() const;
};

/// The lift L of the data into K₁ + K₂ through the fiber point.
class LiftedCurve {
 public:
  LiftedCurve(FiberRestriction fiber, LieSystem system, std::vector<double> base, std::vector<Expr> init,
              std::shared_ptr<const Binding> data);

  const FiberRestriction& fiber() const { return fiber_; }
  const LieSystem& system() const { return system_; }
  const std::vector<double>& base() const { return base_; }
  const std::vector<Expr>& init() const { return init_; }
  const Binding& data() const { return *data_; }
  std::size_t parameter_count() const { return system_.parameters.size(); }

  /// "quadrature" or "rk45".
  const std::string& method() const { return method_; }
  /// Why quadrature was not used; empty when it was.
  const std::string& refusal() const { return refusal_; }
  const std::optional<CurveSolution>& solution() const { return solution_; }

  std::vector<double> state(const std::vector<double>& params) const;
  /// Product coordinates of L at the data parameters.
  std::vector<double> point(const std::vector<double>& params) const;
  /// L_*(∂/∂t_a) in product coordinates.
  std::vector<double> velocity(const std::vector<double>& params, std::size_t a) const;
  /// Product coordinates as expressions in the data parameters (quadrature only).
  std::optional<std::vector<Expr>> symbolic() const;

 private:
  friend LiftedCurve lift_cauchy_data(const CauchyProblem& problem);
  friend LiftedCurve lift_factor(const PfaffianSystem&, const SmoothMap&, const SmoothMap&, const std::vector<std::string>&,
                                 const std::vector<double>&, const std::vector<Expr>&, const CauchyProblem&);
  void integrate(Method method, bool solvable, const std::vector<std::pair<double, double>>& ranges, const RKConfig& rk,
                 double padding);

  FiberRestriction fiber_;
  LieSystem system_;
  std::vector<double> base_;
  std::vector<Expr> init_;
  std::shared_ptr<const Binding> data_;
  std::string method_, refusal_;
  std::optional<CurveSolution> solution_;
  RKConfig rk_;
  std::vector<std::vector<Expr>> velocity_;  ///< by direction, then product coordinate
};

/// One factor of a solution: a map from its own parameters into M₁ or M₂.
struct Branch {
  ChartPtr chart;
  std::vector<std::string> parameters;
  std::vector<std::pair<double, double>> ranges;
  std::function<std::vector<double>(const std::vector<double>&)> point;
  /// Coordinates of `chart` in the parameters, when known in closed form.
  std::optional<std::vector<Expr>> symbolic;
  std::size_t dim() const { return parameters.size(); }
};

struct SurfaceGrid;

/// s(t₁, t₂) = q(σ₁(t₁), σ₂(t₂)).
class SolutionSurface {
 public:
  SolutionSurface(std::shared_ptr<const QuotientRepresentation> rep, Branch b1, Branch b2, std::string method,
                  std::string route);

  const QuotientRepresentation& rep() const { return *rep_; }
  std::shared_ptr<const QuotientRepresentation> rep_ptr() const { return rep_; }
  const ChartPtr& chart() const { return rep_->base(); }
  const Branch& branch1() const { return b1_; }
  const Branch& branch2() const { return b2_; }
  /// "quadrature" or "rk45" (rk45 when any factor was integrated numerically).
  const std::string& method() const { return method_; }
  /// "quotient", "decomposable" or "second-method".
  const std::string& route() const { return route_; }
  /// Parameter names: branch 1 then branch 2.
  std::vector<std::string> parameter_names() const;

  /// Memoized factor evaluations.
  std::vector<double> sigma1(const std::vector<double>& t1) const;
  std::vector<double> sigma2(const std::vector<double>& t2) const;
  std::vector<double> at(const std::vector<double>& t1, const std::vector<double>& t2) const;
  std::vector<double> at(double t1, double t2) const { return at(std::vector<double>{t1}, std::vector<double>{t2}); }
  /// Base coordinates in the branch parameters, when both factors are symbolic.
  std::optional<std::vector<Expr>> symbolic() const;

  /// Product point of the lift at data parameters, for surfaces built from a lift.
  std::function<std::vector<double>(const std::vector<double>&)> lift;
  std::string refusal;

 private:
  friend SolutionSurface surface_from_grid(const SurfaceGrid&, std::shared_ptr<const QuotientRepresentation>,
                                           const std::vector<std::string>&, std::size_t);

  std::shared_ptr<const QuotientRepresentation> rep_;
  Branch b1_, b2_;
  std::string method_, route_;
  std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)> direct_;
  struct Memo {
    std::mutex mutex;
    std::map<std::vector<double>, std::vector<double>> values;
  };
  std::vector<double> cached(const Branch& b, Memo& memo, const std::vector<double>& t) const;
  std::shared_ptr<Memo> memo1_, memo2_;
};


/// Lifts the data through the fiber point by integrating the restricted Lie system.
/// Quadrature is used when the group is solvable and every direction is triangular
/// (unless the problem asks for RK). Throws CharacteristicError for characteristic
/// data, IntegrationError when the integration fails, and Error when the fiber point
/// does not lie over the data.
LiftedCurve lift_cauchy_data(const CauchyProblem& problem);

/// Lift of one-parameter factor data through a Lie system of a factor.
LiftedCurve lift_factor(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                        const std::vector<std::string>& fiber, const std::vector<double>& base,
                        const std::vector<Expr>& init, const CauchyProblem& problem);

/// Projections of the lift onto M₁ and M₂. Each branch varies the smallest set of
/// data parameters on which the projection attains rank n₂ (resp. n₁) at t₀, the
/// others held at t₀. Throws CharacteristicError when a projection is not an
/// immersion of that rank at the samples.
std::pair<Branch, Branch> split_lift(const LiftedCurve& lift, const QuotientRepresentation& rep,
                                     const std::vector<std::pair<double, double>>& ranges, int n1 = 1, int n2 = 1,
                                     int samples = 9);

SolutionSurface compose_solution(Branch sigma1, Branch sigma2, std::shared_ptr<const QuotientRepresentation> rep,
                                 std::string method, std::string route = "quotient");

SolutionSurface solve(const CauchyProblem& problem);
SolutionSurface solve_decomposable(const CauchyProblem& problem);
/// Lifts p_i∘γ through the factor quotients, starting at the factors of the fiber point.
SolutionSurface solve_second_method(const CauchyProblem& problem);

struct VerifyOptions {
  int n1 = 21, n2 = 21;  ///< grid points per parameter of each branch
  double fd_step = 1e-3;
};

struct SolutionReport {
  std::vector<std::string> generators;
  std::vector<double> pullback;    ///< max |s*θ| per generator of I
  double pullback_max = 0.0;
  /// max |s(t,t) − γ(t)|, or max |q(L(t)) − S(t)| for multi-parameter data.
  std::optional<double> diagonal;
  std::optional<double> pde;       ///< max finite-difference PDE residual
  int grid_points = 0;
  int domain_violations = 0;
  double fd_step = 0.0;
  std::string method, route;
};

/// Grid of t₁ values times grid of t₂ values, t₂ varying fastest.
struct SurfaceGrid {
  std::vector<std::vector<double>> t1, t2;
  std::vector<std::vector<double>> values;  ///< base coordinates, row-major
};

/// Worker threads for grid evaluation; 0 uses the hardware concurrency.
void set_worker_threads(std::size_t n);

SurfaceGrid sample_grid(const SolutionSurface& s, int n1, int n2);

SolutionReport verify_solution(const SolutionSurface& s, const CauchyProblem& problem, const VerifyOptions& options = {});

/// Surface interpolating grid samples (degree-7 tensor Lagrange), for checking stored output.
/// The first `dim1` parameters belong to the first factor.
SolutionSurface surface_from_grid(const SurfaceGrid& grid, std::shared_ptr<const QuotientRepresentation> rep,
                                  const std::vector<std::string>& parameter_names, std::size_t dim1);

}  // namespace darboux
