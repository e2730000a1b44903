#pragma once

#include <optional>
#include <string>
#include <vector>

#include "darboux/eds/pfaffian.hpp"

namespace darboux {

/// c[i][j][k] with [X_i, X_j] = sum_k c[i][j][k] X_k.
using StructureConstants = std::vector<std::vector<std::vector<double>>>;

/// Infinitesimal action of an r-dimensional Lie group on a chart.
class GroupAction {
 public:
  /// Computes the structure constants by least squares over probe points.
  /// Throws Error when the brackets do not close on the span of the generators.
  GroupAction(ChartPtr chart, std::vector<VectorField> generators, RankOptions options = {});

  const ChartPtr& chart() const { return chart_; }
  const std::vector<VectorField>& generators() const { return gens_; }
  std::size_t dimension() const { return gens_.size(); }
  const StructureConstants& structure() const { return c_; }
  /// Largest least-squares residual of the bracket expansions.
  double closure_residual() const { return closure_; }
  /// Largest violation of the Jacobi identity by the structure constants.
  double jacobi_residual() const;

 private:
  ChartPtr chart_;
  std::vector<VectorField> gens_;
  StructureConstants c_;
  double closure_ = 0.0;
};

bool same_structure(const StructureConstants& a, const StructureConstants& b, double tol = 1e-10);
/// Derived series of the Lie algebra reaches zero.
bool is_solvable(const StructureConstants& c);
inline bool is_solvable(const GroupAction& a) { return is_solvable(a.structure()); }

/// Forms of a factor chart rewritten on a product chart containing its coordinates.
DifferentialForm lift_form(const DifferentialForm& a, const ChartPtr& product);
VectorField lift_field(const VectorField& x, const ChartPtr& product);

/// π₁*K₁ + π₂*K₂ on the product of the two charts.
PfaffianSystem sum_system(const PfaffianSystem& k1, const PfaffianSystem& k2);
PfaffianSystem sum_system(const PfaffianSystem& k1, const PfaffianSystem& k2, const ChartPtr& product);

/// L_X θ lies in the span of K for every generator X and every generator θ.
bool verify_symmetry(const GroupAction& action, const PfaffianSystem& k);
/// span(generators) ∩ ann(I) = 0 at the probes.
bool verify_transversality(const GroupAction& action, const PfaffianSystem& system);

/// Maps from M and from each factor onto the factor quotients M_i/G.
struct FactorQuotients {
  SmoothMap p1, p2;  ///< M → M₁/G, M → M₂/G
  SmoothMap q1, q2;  ///< M₁ → M₁/G, M₂ → M₂/G
};

/// (M₁, M₂, K₁, K₂, G, q) with q: M₁ × M₂ → M invariant under the diagonal action.
class QuotientRepresentation {
 public:
  /// Throws Error when the dimensions or the structure constants of the factor actions disagree.
  QuotientRepresentation(PfaffianSystem k1, PfaffianSystem k2, GroupAction g1, GroupAction g2, ChartPtr base,
                         std::vector<Expr> q_components);

  const PfaffianSystem& k1() const { return k1_; }
  const PfaffianSystem& k2() const { return k2_; }
  const GroupAction& g1() const { return g1_; }
  const GroupAction& g2() const { return g2_; }
  const ChartPtr& m1() const { return k1_.chart(); }
  const ChartPtr& m2() const { return k2_.chart(); }
  const ChartPtr& product() const { return product_; }
  const ChartPtr& base() const { return q_.target(); }
  const SmoothMap& q() const { return q_; }
  std::size_t group_dimension() const { return g1_.dimension(); }

  /// Generators X_i⁽¹⁾ + X_i⁽²⁾ on the product.
  GroupAction diagonal() const;
  PfaffianSystem sum() const;
  /// K₁ + T*M₂ and T*M₁ + K₂ on the product.
  PfaffianSystem hat_w() const;
  PfaffianSystem check_w() const;

  std::optional<FactorQuotients> factor_quotients;

 private:
  PfaffianSystem k1_, k2_;
  GroupAction g1_, g2_;
  ChartPtr product_;
  SmoothMap q_;
};

struct QuotientCheck {
  bool pullback = false;    ///< q*θ ∈ K₁ + K₂
  bool rank = false;        ///< rank I = rank(K₁ + K₂) − r
  bool invariance = false;  ///< X(q) = 0 for the diagonal generators
  int rank_base = 0, rank_sum = 0, group_dimension = 0;
  double invariance_residual = 0.0;
  /// Product coordinates of the first failing probe, per check.
  std::vector<double> pullback_witness, invariance_witness;
  bool ok() const { return pullback && rank && invariance; }
};

QuotientCheck verify_quotient_map(const QuotientRepresentation& rep, const PfaffianSystem& system);

/// q*(hV) ⊆ K₁ + T*M₂ and q*(cV) ⊆ T*M₁ + K₂ with ranks dropping by r.
bool verify_singular_correspondence(const QuotientRepresentation& rep, const PfaffianSystem& hat, const PfaffianSystem& check);

struct PushforwardCheck {
  bool ok = true;
  int points = 0;
  int expected_rank = 0;           ///< dim M − rank V
  std::vector<int> pushed_rank;    ///< rank of q_* ann(W) at each point
  double annihilation = 0.0;       ///< max |θ(q_* X)| over V's generators, normalized
  std::vector<double> witness;
};

/// At `points` probes of the source, the Jacobian of q maps ann(W) onto ann(V) at the image point.
PushforwardCheck verify_annihilator_pushforward(const SmoothMap& q, const PfaffianSystem& w, const PfaffianSystem& v,
                                                int points = 10);

}  // namespace darboux
