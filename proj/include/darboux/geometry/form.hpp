#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "darboux/geometry/chart.hpp"
#include "darboux/symcore/expr.hpp"

namespace darboux {

/// Strictly increasing coordinate indices of a wedge of differentials.
using MultiIndex = std::vector<int>;

/// Homogeneous differential form stored sparsely by sorted multi-index.
class DifferentialForm {
 public:
  DifferentialForm(ChartPtr chart, int degree);
  static DifferentialForm scalar(ChartPtr chart, const Expr& f);
  /// d(coordinate i).
  static DifferentialForm differential(ChartPtr chart, std::size_t i);
  /// df for a scalar expression f.
  static DifferentialForm exact(ChartPtr chart, const Expr& f);
  /// Sum of coeffs[i] * d(coordinate i).
  static DifferentialForm one_form(ChartPtr chart, const std::vector<Expr>& coeffs);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<MultiIndex, Expr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Expr coefficient(const MultiIndex& index) const;
  /// Coefficients of a 1-form, one per coordinate.
  std::vector<Expr> components() const;
  /// The scalar of a 0-form.
  Expr as_scalar() const;

  /// Add coeff * d(x_{i1}) ^ ... ^ d(x_{ik}) for arbitrary (unsorted) indices.
  void add_term(MultiIndex index, const Expr& coeff);

  DifferentialForm& operator+=(const DifferentialForm& other);
  DifferentialForm& operator-=(const DifferentialForm& other);
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator-(const DifferentialForm& a);
  friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a);

  /// Simplify every coefficient and drop vanishing terms.
  DifferentialForm simplified() const;

 private:
  ChartPtr chart_;
  int degree_;
  std::map<MultiIndex, Expr> terms_;
};

std::string to_string(const DifferentialForm& a);

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& a);

class VectorField {
 public:
  VectorField(ChartPtr chart, std::vector<Expr> components);
  static VectorField coordinate(ChartPtr chart, std::size_t i);

  const ChartPtr& chart() const { return chart_; }
  const std::vector<Expr>& components() const { return comps_; }
  const Expr& operator[](std::size_t i) const { return comps_[i]; }
  /// X(f).
  Expr apply(const Expr& f) const;
  VectorField simplified() const;

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  friend VectorField operator*(const Expr& f, const VectorField& a);

 private:
  ChartPtr chart_;
  std::vector<Expr> comps_;
};

std::string to_string(const VectorField& x);

VectorField bracket(const VectorField& a, const VectorField& b);
DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a);
DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a);
/// Value of a 2-form on a pair of vector fields.
Expr evaluate_pair(const DifferentialForm& omega, const VectorField& x, const VectorField& y);

/// One expression per target coordinate, written in source coordinates.
class SmoothMap {
 public:
  SmoothMap(ChartPtr source, ChartPtr target, std::vector<Expr> components);
  static SmoothMap identity(ChartPtr chart);
  /// Projection of a product chart onto the factor whose coordinates it contains.
  static SmoothMap projection(ChartPtr product, ChartPtr factor);

  const ChartPtr& source() const { return source_; }
  const ChartPtr& target() const { return target_; }
  const std::vector<Expr>& components() const { return comps_; }
  const Expr& operator[](std::size_t i) const { return comps_[i]; }

  /// f(target coords) composed with the map.
  Expr pull(const Expr& f) const;
  /// Jacobian rows by target coordinate, columns by source coordinate.
  std::vector<std::vector<Expr>> jacobian() const;
  /// Target constraints pulled back and appended to the source constraints.
  ChartPtr pulled_domain() const;

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<Expr> comps_;
};

/// (outer after inner): source of inner to target of outer.
SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner);
DifferentialForm pullback(const SmoothMap& phi, const DifferentialForm& a);
/// Pushforward of a vector field on the source, expressed in source coordinates.
std::vector<Expr> pushforward(const SmoothMap& phi, const VectorField& x);

/// Parse a form in the grammar extended with `d(...)` and `/\`.
DifferentialForm parse_form(std::string_view text, ChartPtr chart);

}  // namespace darboux
