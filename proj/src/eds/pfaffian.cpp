#include "darboux/eds/pfaffian.hpp"

#include <cmath>

#include "darboux/error.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

namespace {

std::vector<Expr> entries(const std::vector<DifferentialForm>& forms) {
  std::vector<Expr> out;
  for (const auto& f : forms) {
    for (const auto& [idx, c] : f.terms()) {
      if (!c.is_number()) out.push_back(c);
    }
  }
  return out;
}

Eigen::MatrixXd two_form_matrix(const DifferentialForm& omega, Evaluator& ev, std::size_t dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& [idx, c] : omega.terms()) {
    double v = ev(c);
    a(idx[0], idx[1]) = v;
    a(idx[1], idx[0]) = -v;
  }
  return a;
}

}  // namespace

PfaffianSystem::PfaffianSystem(ChartPtr chart, std::vector<DifferentialForm> generators, RankOptions options)
    : chart_(std::move(chart)), gens_(std::move(generators)), options_(options) {
  for (const auto& g : gens_) {
    require_same_chart(*chart_, *g.chart(), "Pfaffian system");
    if (g.degree() != 1 && !g.is_zero()) throw Error("Pfaffian system generators must be 1-forms");
  }
  if (gens_.empty()) return;
  RankReport rep = generic_rank(chart_, gens_, options_);
  if (!rep.constant) throw RankError("Pfaffian system does not have constant rank on the domain", rep.witness);
  rank_ = rep.rank;
}

PfaffianSystem PfaffianSystem::parse(ChartPtr chart, const std::vector<std::string>& generators, RankOptions options) {
  std::vector<DifferentialForm> forms;
  for (const auto& g : generators) forms.push_back(parse_form(g, chart));
  return PfaffianSystem(chart, std::move(forms), options);
}

PfaffianSystem PfaffianSystem::zero(ChartPtr chart, RankOptions options) { return PfaffianSystem(std::move(chart), {}, options); }

PfaffianSystem PfaffianSystem::cotangent(ChartPtr chart, RankOptions options) {
  std::vector<DifferentialForm> forms;
  for (std::size_t i = 0; i < chart->dim(); ++i) forms.push_back(DifferentialForm::differential(chart, i));
  return PfaffianSystem(chart, std::move(forms), options);
}

PfaffianSystem PfaffianSystem::operator+(const PfaffianSystem& other) const {
  require_same_chart(*chart_, *other.chart_, "system sum");
  auto g = gens_;
  g.insert(g.end(), other.gens_.begin(), other.gens_.end());
  return PfaffianSystem(chart_, std::move(g), options_);
}

std::vector<DifferentialForm> PfaffianSystem::basis() const {
  if (gens_.empty()) return {};
  ExprMatrix rows = coefficient_rows(gens_);
  ProbeSet probes(chart_, entries(gens_), options_);
  std::vector<Eigen::MatrixXd> values;
  for (std::size_t p = 0; p < probes.size(); ++p) values.push_back(evaluate_matrix(rows, chart_->dim(), probes[p]));
  std::vector<DifferentialForm> out;
  std::vector<Eigen::Index> chosen;
  std::vector<int> current(probes.size(), 0);
  for (std::size_t i = 0; i < gens_.size() && static_cast<int>(out.size()) < rank_; ++i) {
    auto trial = chosen;
    trial.push_back(static_cast<Eigen::Index>(i));
    bool grows = false;
    std::vector<int> next(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(trial.size()), values[p].cols());
      for (std::size_t k = 0; k < trial.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = values[p].row(trial[k]);
      next[p] = numeric_rank(sub, options_.threshold);
      if (next[p] > current[p]) grows = true;
    }
    if (grows) {
      chosen = trial;
      current = next;
      out.push_back(gens_[i]);
    }
  }
  return out;
}

bool PfaffianSystem::contains(const DifferentialForm& a) const {
  if (a.is_zero()) return true;
  return span_contains(chart_, gens_, {a}, options_);
}

bool PfaffianSystem::contains(const PfaffianSystem& other) const {
  if (other.gens_.empty()) return true;
  if (gens_.empty()) return other.rank_ == 0;
  return span_contains(chart_, gens_, other.gens_, options_);
}

std::vector<VectorField> PfaffianSystem::annihilator() const { return darboux::annihilator(chart_, gens_, options_); }

PfaffianSystem derived_system(const PfaffianSystem& system) {
  const ChartPtr& chart = system.chart();
  std::vector<DifferentialForm> b = system.basis();
  if (b.empty()) return PfaffianSystem::zero(chart, system.options());
  std::vector<VectorField> ann = system.annihilator();
  std::vector<DifferentialForm> dtheta;
  for (const auto& t : b) dtheta.push_back(exterior_derivative(t));
  ExprMatrix c;
  for (std::size_t p = 0; p < ann.size(); ++p) {
    for (std::size_t q = p + 1; q < ann.size(); ++q) {
      std::vector<Expr> row;
      for (const auto& dt : dtheta) row.push_back(simplify(evaluate_pair(dt, ann[p], ann[q])));
      c.push_back(std::move(row));
    }
  }
  std::vector<DifferentialForm> gens;
  if (c.empty()) {
    gens = b;
  } else {
    std::vector<Expr> probe_exprs = entries(b);
    for (const auto& row : c) {
      for (const auto& e : row) {
        if (!e.is_number()) probe_exprs.push_back(e);
      }
    }
    ProbeSet probes(chart, probe_exprs, system.options());
    ExprMatrix lambdas = null_space(c, b.size(), probes);
    for (const auto& l : lambdas) {
      DifferentialForm f(chart, 1);
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!l[i].is_zero()) f += l[i] * b[i];
      }
      gens.push_back(f.simplified());
    }
  }
  return PfaffianSystem(chart, std::move(gens), system.options());
}

std::vector<int> DerivedFlag::ranks() const {
  std::vector<int> r;
  for (const auto& s : systems) r.push_back(s.rank());
  return r;
}

DerivedFlag derived_flag(const PfaffianSystem& system) {
  DerivedFlag flag;
  flag.systems.push_back(system);
  const std::size_t limit = system.chart()->dim() + 1;
  while (true) {
    if (flag.systems.size() > limit) throw Error("derived flag failed to stabilize within the depth limit");
    const PfaffianSystem& last = flag.systems.back();
    if (last.rank() == 0) break;
    PfaffianSystem next = derived_system(last);
    if (next.rank() == last.rank()) break;
    flag.systems.push_back(std::move(next));
  }
  return flag;
}

PfaffianSystem infinity_system(const PfaffianSystem& system) { return derived_flag(system).infinity(); }

bool verify_first_integral(const Expr& f, const PfaffianSystem& system) {
  return system.contains(DifferentialForm::exact(system.chart(), f));
}

std::vector<DifferentialForm> Coframe::all() const {
  std::vector<DifferentialForm> out = theta;
  for (const auto* block : {&hat_omega, &hat_pi, &check_omega, &check_pi}) out.insert(out.end(), block->begin(), block->end());
  return out;
}

std::string to_string(StructureReport::Classification c) {
  switch (c) {
    case StructureReport::Classification::Hyperbolic: return "hyperbolic";
    case StructureReport::Classification::Decomposable: return "decomposable";
    case StructureReport::Classification::Neither: break;
  }
  return "neither";
}

StructureReport classify_structure(const PfaffianSystem& system, const Coframe& coframe) {
  const ChartPtr& chart = system.chart();
  const std::size_t dim = chart->dim();
  std::vector<DifferentialForm> frame = coframe.all();
  if (frame.size() != dim) throw RankError("coframe has " + std::to_string(frame.size()) + " forms on a " + std::to_string(dim) + "-dimensional chart");
  const std::size_t s = coframe.theta.size();
  PfaffianSystem theta_span(chart, coframe.theta, system.options());
  if (theta_span.rank() != static_cast<int>(s) || !theta_span.same_span(system)) {
    throw RankError("first block of the coframe is not a basis of the system");
  }

  std::vector<DifferentialForm> dtheta;
  for (const auto& t : coframe.theta) dtheta.push_back(exterior_derivative(t));
  std::vector<Expr> probe_exprs = entries(frame);
  for (const auto& e : entries(dtheta)) probe_exprs.push_back(e);
  ProbeSet probes(chart, probe_exprs, system.options());
  ExprMatrix rows = coefficient_rows(frame);

  // Block label of each coframe position.
  enum Block { Theta, HatOmega, HatPi, CheckOmega, CheckPi };
  std::vector<Block> label;
  for (std::size_t i = 0; i < s; ++i) label.push_back(Theta);
  for (std::size_t i = 0; i < coframe.hat_omega.size(); ++i) label.push_back(HatOmega);
  for (std::size_t i = 0; i < coframe.hat_pi.size(); ++i) label.push_back(HatPi);
  for (std::size_t i = 0; i < coframe.check_omega.size(); ++i) label.push_back(CheckOmega);
  for (std::size_t i = 0; i < coframe.check_pi.size(); ++i) label.push_back(CheckPi);
  const char* block_names[] = {"theta", "hat omega", "hat pi", "check omega", "check pi"};

  StructureReport rep;
  std::vector<int> roles(s, 0);
  std::vector<std::vector<Eigen::MatrixXd>> expansions(s);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    Eigen::MatrixXd bm = evaluate_matrix(rows, dim, probes[p]);
    if (numeric_rank(bm, system.options().threshold) != static_cast<int>(dim)) {
      throw RankError("coframe is rank deficient", probes.coordinates(p));
    }
    Eigen::MatrixXd dual = bm.inverse();
    Evaluator ev(probes[p]);
    for (std::size_t i = 0; i < s; ++i) {
      Eigen::MatrixXd c = dual.transpose() * two_form_matrix(dtheta[i], ev, dim) * dual;
      expansions[i].push_back(c);
      const double tol = 1e-8 * std::max(1.0, c.cwiseAbs().maxCoeff());
      bool hat = false, check = false;
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t k = j + 1; k < dim; ++k) {
          if (label[j] == Theta || label[k] == Theta) continue;
          if (std::fabs(c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))) <= tol) continue;
          Block a = label[j], b = label[k];
          if ((a == HatOmega && b == HatPi) || (a == HatPi && b == HatOmega)) {
            hat = true;
          } else if ((a == CheckOmega && b == CheckPi) || (a == CheckPi && b == CheckOmega)) {
            check = true;
          } else if (rep.diagnostic.empty()) {
            rep.diagnostic = "d(theta" + std::to_string(i + 1) + ") has a " + block_names[a] + " ^ " + block_names[b] +
                             " term of size " + std::to_string(c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
          }
        }
      }
      if (hat && check && rep.diagnostic.empty()) {
        rep.diagnostic = "d(theta" + std::to_string(i + 1) + ") mixes both characteristic blocks";
      }
      int role = hat ? 1 : (check ? 2 : 0);
      if (role != 0) {
        if (roles[i] != 0 && roles[i] != role && rep.diagnostic.empty()) rep.diagnostic = "inconsistent structure across probes";
        roles[i] = role;
      }
    }
  }
  rep.roles = roles;
  if (!rep.diagnostic.empty()) return rep;

  int zero = 0, one = 0, two = 0;
  for (int r : roles) (r == 0 ? zero : r == 1 ? one : two)++;
  if (one == 0 || two == 0) {
    rep.diagnostic = "no omega ^ pi term in the structure equations";
    return rep;
  }
  const bool single = coframe.hat_omega.size() == 1 && coframe.hat_pi.size() == 1 && coframe.check_omega.size() == 1 &&
                      coframe.check_pi.size() == 1;
  if (coframe.kind == Coframe::Kind::Hyperbolic) {
    if (!single || one != 1 || two != 1) {
      rep.diagnostic = "class-s pattern needs exactly one hat and one check equation";
      return rep;
    }
    rep.classification = StructureReport::Classification::Hyperbolic;
    rep.s = static_cast<int>(s);
    if (dim == 7 && s == 3) {
      std::size_t i1 = 0, i2 = 0;
      for (std::size_t i = 0; i < s; ++i) {
        if (roles[i] == 1) i1 = i;
        if (roles[i] == 2) i2 = i;
      }
      const auto hw = static_cast<Eigen::Index>(s), hp = hw + 1, cw = hw + 2, cp = hw + 3;
      std::vector<double> m1, m2;
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto& c1 = expansions[i1][p];
        const auto& c2 = expansions[i2][p];
        double k1 = c1(hw, hp), k2 = c2(cw, cp);
        m1.push_back(c1(static_cast<Eigen::Index>(i2), cp) / k2);
        m2.push_back(c2(static_cast<Eigen::Index>(i1), hp) / k1);
      }
      rep.mu1 = m1;
      rep.mu2 = m2;
    }
  } else {
    const int n1 = static_cast<int>(coframe.hat_omega.size()), p1 = static_cast<int>(coframe.hat_pi.size());
    const int n2 = static_cast<int>(coframe.check_omega.size()), p2 = static_cast<int>(coframe.check_pi.size());
    if (n1 < 1 || p1 < 1 || n2 < 1 || p2 < 1 || n1 + p1 < 2 || n2 + p2 < 2) {
      rep.diagnostic = "decomposable block sizes out of range";
      return rep;
    }
    PfaffianSystem derived = derived_system(system);
    std::vector<DifferentialForm> closed;
    for (std::size_t i = 0; i < s; ++i) {
      if (roles[i] == 0) closed.push_back(coframe.theta[i]);
    }
    PfaffianSystem closed_span(chart, closed, system.options());
    if (derived.rank() != zero || !closed_span.same_span(derived)) {
      rep.diagnostic = "derived system differs from the span of the closed generators";
      return rep;
    }
    rep.classification = StructureReport::Classification::Decomposable;
    rep.n1 = n1;
    rep.p1 = p1;
    rep.n2 = n2;
    rep.p2 = p2;
  }
  auto hat = coframe.theta;
  hat.insert(hat.end(), coframe.hat_omega.begin(), coframe.hat_omega.end());
  hat.insert(hat.end(), coframe.hat_pi.begin(), coframe.hat_pi.end());
  auto check = coframe.theta;
  check.insert(check.end(), coframe.check_omega.begin(), coframe.check_omega.end());
  check.insert(check.end(), coframe.check_pi.begin(), coframe.check_pi.end());
  rep.hat.emplace(chart, hat, system.options());
  rep.check.emplace(chart, check, system.options());
  rep.darboux = is_darboux_integrable(system, *rep.hat, *rep.check);
  return rep;
}

DarbouxVerdict is_darboux_integrable(const PfaffianSystem& system, const PfaffianSystem& hat, const PfaffianSystem& check) {
  DarbouxVerdict v;
  v.dim = static_cast<int>(system.chart()->dim());
  PfaffianSystem inf = infinity_system(system);
  PfaffianSystem hat_inf = infinity_system(hat);
  PfaffianSystem check_inf = infinity_system(check);
  v.rank_infinity = inf.rank();
  v.rank_hat = hat.rank();
  v.rank_check = check.rank();
  v.rank_hat_infinity = hat_inf.rank();
  v.rank_check_infinity = check_inf.rank();
  v.rank_hat_plus_check_infinity = (hat + check_inf).rank();
  v.rank_hat_infinity_plus_check = (hat_inf + check).rank();
  v.rank_infinity_intersection = hat_inf.rank() + check_inf.rank() - (hat_inf + check_inf).rank();
  v.integrable = v.rank_infinity == 0 && v.rank_hat_plus_check_infinity == v.dim && v.rank_hat_infinity_plus_check == v.dim;
  return v;
}

bool NoncharacteristicReport::ok() const {
  if (!integral) return false;
  for (bool b : noncharacteristic) {
    if (!b) return false;
  }
  return true;
}

NoncharacteristicReport is_noncharacteristic(const ParamCurve& curve, const Binding& data, double lo, double hi,
                                             const PfaffianSystem& system, const PfaffianSystem& hat,
                                             const PfaffianSystem& check, int samples) {
  require_same_chart(*curve.chart, *system.chart(), "non-characteristic test");
  const ChartPtr& chart = system.chart();
  NoncharacteristicReport rep;
  rep.samples = linspace(lo, hi, samples);
  auto pairing = [&](const PfaffianSystem& sys, const Binding& b, const std::vector<double>& vel, double& worst) {
    Evaluator ev(b);
    double vnorm = 0.0;
    for (double x : vel) vnorm += x * x;
    vnorm = std::sqrt(vnorm);
    double best = 0.0;
    worst = 0.0;
    for (const auto& g : sys.generators()) {
      double dot = 0.0, gnorm = 0.0;
      for (const auto& [idx, c] : g.terms()) {
        double cv = ev(c);
        dot += cv * vel[idx[0]];
        gnorm += cv * cv;
      }
      gnorm = std::sqrt(gnorm);
      worst = std::max(worst, std::fabs(dot));
      if (gnorm > 0 && vnorm > 0) best = std::max(best, std::fabs(dot) / (gnorm * vnorm));
    }
    return best;
  };
  for (double t : rep.samples) {
    std::vector<double> pt = curve.at(t, data);
    std::vector<double> vel = curve.velocity_at(t, data);
    Binding b = data;
    b.variables[curve.parameter] = t;
    for (std::size_t i = 0; i < chart->dim(); ++i) b.variables[chart->coord(i)] = pt[i];
    double residual = 0.0;
    double vnorm = 0.0;
    for (double x : vel) vnorm = std::max(vnorm, std::fabs(x));
    pairing(system, b, vel, residual);
    rep.integral_residual = std::max(rep.integral_residual, residual);
    if (residual > 1e-8 * std::max(1.0, vnorm)) rep.integral = false;
    double dummy = 0.0;
    bool hat_ok = pairing(hat, b, vel, dummy) > 1e-8;
    bool check_ok = pairing(check, b, vel, dummy) > 1e-8;
    rep.noncharacteristic.push_back(hat_ok && check_ok);
  }
  return rep;
}

}  // namespace darboux
