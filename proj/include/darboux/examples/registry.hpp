#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "darboux/cauchy/cauchy.hpp"
#include "darboux/eds/pfaffian.hpp"
#include "darboux/quotient/quotient.hpp"

namespace darboux {

/// A free function of the Cauchy data with an optional default body.
struct FunctionSlot {
  std::string name;
  std::vector<std::string> params;
  std::optional<std::string> body;
};

/// Closed-form solution components. A graph oracle is a function of base
/// coordinates (`variables`); a parametric oracle is a function of the surface
/// parameters, branch 1 first.
struct Oracle {
  enum class Kind { Graph, Parametric };
  Kind kind = Kind::Graph;
  std::vector<std::string> variables;
  std::vector<std::pair<std::string, Expr>> components;
};

struct CauchyTemplate {
  ChartPtr parameters;
  std::vector<Expr> data;
  std::vector<std::pair<double, double>> ranges;
  std::vector<double> base_point;
  std::vector<FunctionSlot> functions;
  std::vector<std::string> fiber;
  std::vector<Expr> fiber_point;
  std::optional<std::vector<Expr>> parametrization;
  std::vector<std::string> fiber1, fiber2;
  int n1 = 1, n2 = 1;
  /// "quotient", "decomposable" or "second-method".
  std::string route = "quotient";
  int grid1 = 21, grid2 = 21;
  std::optional<ScalarPDE> pde;
  std::optional<Oracle> oracle;
};

struct IntegratorSettings {
  Method method = Method::Auto;
  RKConfig rk;
  double padding = 0.05;
  std::uint64_t seed = 0;
  double fd_step = 1e-3;
};

struct RegistryEntry {
  explicit RegistryEntry(PfaffianSystem s) : system(std::move(s)) {}

  std::string name, description;
  std::map<std::string, ChartPtr> charts;
  PfaffianSystem system;
  std::optional<PfaffianSystem> hat, check;
  std::optional<Coframe> coframe;
  std::vector<Expr> hat_integrals, check_integrals;
  std::shared_ptr<QuotientRepresentation> rep;
  std::optional<StructureConstants> structure;
  std::optional<CauchyTemplate> cauchy;
  IntegratorSettings integrator;
  std::string csv_path, report_path;
  /// The problem document the entry was built from.
  nlohmann::json document;

  const ChartPtr& chart() const { return system.chart(); }

  /// Cauchy problem with the template's functions, bodies in `overrides` taking
  /// precedence. Throws InputError when the entry has no Cauchy section or a
  /// function is left unbound.
  CauchyProblem problem(const std::map<std::string, std::string>& overrides = {}) const;
};

struct EntryCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct EntryReport {
  std::vector<std::pair<std::string, std::vector<int>>> flags;  ///< derived-flag ranks of K₁, K₂, I
  std::optional<DarbouxVerdict> darboux;
  bool solvable = false;
  std::size_t group_dimension = 0;
  std::vector<EntryCheck> checks;
  bool ok() const;
};

std::vector<std::string> example_names();
/// Problem document of a built-in entry; throws InputError for unknown names.
nlohmann::json example_document(const std::string& name);

/// Builds an entry from a problem document. Throws InputError when the document
/// is malformed or refers to unknown names.
RegistryEntry load_problem(const nlohmann::json& document);
/// Runs the quotient, Darboux, intermediate-integral, factor-quotient and
/// derived-flag checks.
EntryReport check_entry(const RegistryEntry& entry);
/// Built-in entry, verified; throws Error naming the first failing check.
RegistryEntry load_example(const std::string& name);

nlohmann::json to_json(const RegistryEntry& entry);

/// solve, solve_decomposable or solve_second_method by route name.
SolutionSurface solve_route(const CauchyProblem& problem, const std::string& route);

/// max |oracle − surface| over an n1 × n2 grid of the surface parameters.
double oracle_error(const Oracle& oracle, const SolutionSurface& surface, const Binding& functions, int n1, int n2);

}  // namespace darboux
