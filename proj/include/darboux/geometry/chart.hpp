#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "darboux/symcore/evaluate.hpp"
#include "darboux/symcore/expr.hpp"
#include "darboux/symcore/probe.hpp"

namespace darboux {

struct Constraint {
  enum class Kind { Positive, Nonzero };
  Kind kind = Kind::Nonzero;
  Expr expr;
};

/// Ordered coordinates with domain constraints and sampling ranges.
class Chart {
 public:
  Chart(std::string name, const std::vector<std::string>& coordinates, std::vector<Constraint> constraints = {});

  const std::string& name() const { return name_; }
  std::size_t dim() const { return coords_.size(); }
  const std::vector<SymbolId>& coords() const { return coords_; }
  SymbolId coord(std::size_t i) const { return coords_.at(i); }
  Expr coord_expr(std::size_t i) const { return var(coords_.at(i)); }
  std::vector<std::string> coord_names() const;
  /// Index of a coordinate; throws ChartMismatch when absent.
  std::size_t index(SymbolId s) const;
  std::size_t index(const std::string& name) const { return index(intern(name)); }
  bool has(SymbolId s) const;

  const std::vector<Constraint>& constraints() const { return constraints_; }
  void add_constraint(Constraint c) { constraints_.push_back(std::move(c)); }
  void set_range(SymbolId s, double lo, double hi);
  std::pair<double, double> range(SymbolId s) const;
  const std::vector<std::pair<double, double>>& ranges() const { return ranges_; }

  /// All constraints hold at the coordinates bound in `b` (non-finite counts as violation).
  bool admissible(const Binding& b) const;
  /// Sampler assigning each coordinate a rational in its range and rejecting inadmissible draws.
  ProbeOptions probe_options(std::uint64_t seed = 0, const Binding* fixed = nullptr) const;

  /// Disjoint union of coordinates; throws ChartMismatch on shared names.
  static std::shared_ptr<const Chart> product(const Chart& a, const Chart& b, std::string name = {});

  bool same_coordinates(const Chart& other) const { return coords_ == other.coords_; }

 private:
  std::string name_;
  std::vector<SymbolId> coords_;
  std::vector<Constraint> constraints_;
  std::vector<std::pair<double, double>> ranges_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::string name, const std::vector<std::string>& coordinates, std::vector<Constraint> constraints = {});

/// Throws ChartMismatch unless both charts have the same coordinates.
void require_same_chart(const Chart& a, const Chart& b, const char* what);

}  // namespace darboux
