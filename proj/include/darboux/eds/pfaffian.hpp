#pragma once

#include <optional>
#include <string>
#include <vector>

#include "darboux/geometry/curve.hpp"
#include "darboux/geometry/form.hpp"
#include "darboux/geometry/linalg.hpp"

namespace darboux {

/// Span of 1-forms of constant generic rank on a chart.
class PfaffianSystem {
 public:
  /// Throws RankError when the generators do not have constant rank on the probes.
  PfaffianSystem(ChartPtr chart, std::vector<DifferentialForm> generators, RankOptions options = {});
  static PfaffianSystem parse(ChartPtr chart, const std::vector<std::string>& generators, RankOptions options = {});
  static PfaffianSystem zero(ChartPtr chart, RankOptions options = {});
  /// T*M.
  static PfaffianSystem cotangent(ChartPtr chart, RankOptions options = {});

  const ChartPtr& chart() const { return chart_; }
  const std::vector<DifferentialForm>& generators() const { return gens_; }
  int rank() const { return rank_; }
  const RankOptions& options() const { return options_; }

  /// Span of both generator lists (recomputes the rank).
  PfaffianSystem operator+(const PfaffianSystem& other) const;
  /// Subset of the generators forming a basis at generic points.
  std::vector<DifferentialForm> basis() const;
  bool contains(const DifferentialForm& a) const;
  bool contains(const PfaffianSystem& other) const;
  bool same_span(const PfaffianSystem& other) const { return contains(other) && other.contains(*this); }
  std::vector<VectorField> annihilator() const;

 private:
  ChartPtr chart_;
  std::vector<DifferentialForm> gens_;
  RankOptions options_;
  int rank_ = 0;
};

/// Forms θ of I with dθ ≡ 0 modulo the algebraic ideal of I.
PfaffianSystem derived_system(const PfaffianSystem& system);

struct DerivedFlag {
  std::vector<PfaffianSystem> systems;
  std::vector<int> ranks() const;
  const PfaffianSystem& infinity() const { return systems.back(); }
};

/// I ⊃ I' ⊃ I'' ⊃ ... up to the first repetition; throws Error when it fails to
/// stabilize within dim + 1 steps.
DerivedFlag derived_flag(const PfaffianSystem& system);
PfaffianSystem infinity_system(const PfaffianSystem& system);

/// dF lies in the span of the system at every probe.
bool verify_first_integral(const Expr& f, const PfaffianSystem& system);

/// Ordered coframe adapted to a hyperbolic or decomposable system.
struct Coframe {
  enum class Kind { Hyperbolic, Decomposable };
  Kind kind = Kind::Hyperbolic;
  std::vector<DifferentialForm> theta;
  std::vector<DifferentialForm> hat_omega;
  std::vector<DifferentialForm> hat_pi;  ///< the τ̂ block for decomposable systems
  std::vector<DifferentialForm> check_omega;
  std::vector<DifferentialForm> check_pi;

  std::vector<DifferentialForm> all() const;
};

struct DarbouxVerdict {
  bool integrable = false;
  int rank_infinity = 0;      ///< rank I∞
  int rank_hat = 0;           ///< rank hV
  int rank_check = 0;         ///< rank cV
  int rank_hat_infinity = 0;  ///< rank hV∞
  int rank_check_infinity = 0;
  int rank_hat_plus_check_infinity = 0;  ///< rank(hV + cV∞)
  int rank_hat_infinity_plus_check = 0;  ///< rank(hV∞ + cV)
  int rank_infinity_intersection = 0;    ///< rank(hV∞ ∩ cV∞)
  int dim = 0;
};

struct StructureReport {
  enum class Classification { Hyperbolic, Decomposable, Neither };
  Classification classification = Classification::Neither;
  int s = 0;                      ///< class of a hyperbolic system
  int n1 = 0, p1 = 0, n2 = 0, p2 = 0;
  /// Role of each θ: 0 closed mod I, 1 hat block, 2 check block.
  std::vector<int> roles;
  /// Monge–Ampère invariants at the probes (7-dimensional class 3 only).
  std::optional<std::vector<double>> mu1, mu2;
  std::optional<PfaffianSystem> hat, check;
  std::optional<DarbouxVerdict> darboux;
  /// First offending residual when the pattern does not match.
  std::string diagnostic;
};

std::string to_string(StructureReport::Classification c);

/// Expands each dθ in the coframe at probe points and matches the class-s or
/// decomposable pattern; populates the singular systems on success. Throws
/// RankError when the coframe is rank deficient or does not start with a basis of I.
StructureReport classify_structure(const PfaffianSystem& system, const Coframe& coframe);

DarbouxVerdict is_darboux_integrable(const PfaffianSystem& system, const PfaffianSystem& hat, const PfaffianSystem& check);

struct NoncharacteristicReport {
  bool integral = true;
  double integral_residual = 0.0;  ///< max |γ*θ| over samples and generators
  std::vector<double> samples;
  std::vector<bool> noncharacteristic;  ///< per sample
  bool ok() const;
};

/// Checks γ*I = 0 and γ' ∉ ann(hV), γ' ∉ ann(cV) at `samples` parameter values in [lo, hi].
NoncharacteristicReport is_noncharacteristic(const ParamCurve& curve, const Binding& data, double lo, double hi,
                                             const PfaffianSystem& system, const PfaffianSystem& hat,
                                             const PfaffianSystem& check, int samples = 25);

}  // namespace darboux
