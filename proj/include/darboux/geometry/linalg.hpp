#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "darboux/geometry/chart.hpp"
#include "darboux/geometry/form.hpp"
#include "darboux/symcore/evaluate.hpp"

namespace darboux {

using ExprMatrix = std::vector<std::vector<Expr>>;

struct RankOptions {
  std::uint64_t seed = 0;
  int points = 12;
  /// Singular values below threshold * largest count as zero.
  double threshold = 1e-9;
  int max_attempts = 200;
  /// Parameter values and concrete function bindings shared by every probe.
  const Binding* fixed = nullptr;
};

/// Admissible random points of a chart at which a set of expressions evaluates.
/// Opaque functions not bound by `fixed` get generic random implementations.
class ProbeSet {
 public:
  ProbeSet(ChartPtr chart, const std::vector<Expr>& exprs, const RankOptions& options = {});

  std::size_t size() const { return points_.size(); }
  const Binding& operator[](std::size_t i) const { return points_[i]; }
  const ChartPtr& chart() const { return chart_; }
  /// Chart coordinates of probe i, in chart order.
  std::vector<double> coordinates(std::size_t i) const;
  double threshold() const { return threshold_; }

 private:
  ChartPtr chart_;
  std::vector<Binding> points_;
  double threshold_;
};

Eigen::MatrixXd evaluate_matrix(const ExprMatrix& m, std::size_t cols, const Binding& b);
/// Rank with rows scaled to unit length; singular values below threshold * largest are zero.
int numeric_rank(Eigen::MatrixXd m, double threshold = 1e-9);
/// Orthonormal basis of the null space (columns), same threshold convention.
Eigen::MatrixXd numeric_null_space(const Eigen::MatrixXd& m, double threshold = 1e-9);

/// Coefficient rows of homogeneous forms (or vector fields) in a fixed basis.
ExprMatrix coefficient_rows(const std::vector<DifferentialForm>& forms);
ExprMatrix coefficient_rows(const std::vector<VectorField>& fields);
std::size_t basis_size(const Chart& chart, int degree);

struct RankReport {
  int rank = 0;
  std::vector<int> per_probe;
  bool constant = true;
  /// Coordinates of a probe whose rank differs from the maximum.
  std::vector<double> witness;
};

RankReport generic_rank(const ProbeSet& probes, const ExprMatrix& rows, std::size_t cols);
RankReport generic_rank(ChartPtr chart, const std::vector<DifferentialForm>& forms, const RankOptions& options = {});
RankReport generic_rank(ChartPtr chart, const std::vector<VectorField>& fields, const RankOptions& options = {});

/// True iff every row of `candidates` lies in the span of `basis` at every probe.
bool span_contains(const ProbeSet& probes, const ExprMatrix& basis, const ExprMatrix& candidates, std::size_t cols);
bool span_contains(ChartPtr chart, const std::vector<DifferentialForm>& basis, const std::vector<DifferentialForm>& candidates,
                   const RankOptions& options = {});

/// Gauss-Jordan elimination over the coefficient field. Pivots are chosen
/// among entries that are nonzero at the probes, preferring small expressions.
struct ReducedMatrix {
  ExprMatrix rows;              ///< pivot rows, each normalized to 1 at its pivot
  std::vector<std::size_t> pivots;
  std::size_t cols = 0;
};

ReducedMatrix row_reduce(const ExprMatrix& m, std::size_t cols, const ProbeSet& probes);
/// Basis of {v : m v = 0}; one vector per free column.
ExprMatrix null_space(const ExprMatrix& m, std::size_t cols, const ProbeSet& probes);

/// Vector fields spanning the annihilator of a constant-rank set of 1-forms.
/// Throws RankError when the rank is not constant on the probes.
std::vector<VectorField> annihilator(ChartPtr chart, const std::vector<DifferentialForm>& forms, const RankOptions& options = {});

}  // namespace darboux
