#include "darboux/lietype/lie.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "darboux/error.hpp"
#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

namespace {

bool contains(const std::vector<SymbolId>& v, SymbolId s) { return std::find(v.begin(), v.end(), s) != v.end(); }

std::vector<std::string> names_of(const std::vector<SymbolId>& ids) {
  std::vector<std::string> out;
  for (SymbolId s : ids) out.push_back(symbol_name(s));
  return out;
}

// log(A) + B = 0 becomes A − exp(−B) = 0.
Expr unlog(const Expr& e) {
  if (e.kind() == NodeKind::Function && e.builtin() == Builtin::Log) return e.operands()[0] - Expr(1);
  if (e.kind() != NodeKind::Add) return e;
  std::vector<Expr> rest;
  std::optional<Expr> arg;
  Number sign(1);
  for (const auto& t : e.operands()) {
    if (!arg && t.kind() == NodeKind::Function && t.builtin() == Builtin::Log) {
      arg = t.operands()[0];
      continue;
    }
    if (!arg && t.kind() == NodeKind::Mul && t.operands().size() == 2 && t.operands()[0].is_number() &&
        t.operands()[0].number().is_exact() && t.operands()[0].number().value() == -1.0 &&
        t.operands()[1].kind() == NodeKind::Function && t.operands()[1].builtin() == Builtin::Log) {
      arg = t.operands()[1].operands()[0];
      sign = Number(-1);
      continue;
    }
    rest.push_back(t);
  }
  if (!arg) return e;
  Expr b = add(std::move(rest));
  // sign*log(A) + b = 0  ⇔  A = exp(−b/sign)
  return *arg - exp(sign.value() > 0 ? -b : b);
}

// Factors of a simplified expression that are not negative powers.
Expr numerator(const Expr& e) {
  Expr s = simplify(e);
  auto negative_power = [](const Expr& f) {
    return f.kind() == NodeKind::Pow && f.exponent().is_number() && f.exponent().number().value() < 0;
  };
  if (s.kind() == NodeKind::Mul) {
    std::vector<Expr> keep;
    for (const auto& f : s.operands()) {
      if (!negative_power(f) && !f.is_number()) keep.push_back(f);
    }
    return keep.empty() ? Expr(1) : mul(std::move(keep));
  }
  if (negative_power(s)) return Expr(1);
  return s;
}

void collect_symbols(const Expr& e, std::set<SymbolId>& out) {
  if (e.kind() == NodeKind::Variable) out.insert(e.symbol());
  if (e.kind() == NodeKind::Integral) out.insert(e.symbol());
  for (const auto& o : e.operands()) collect_symbols(o, out);
}

SymbolId pick_dummy(const std::vector<Expr>& exprs, const std::vector<SymbolId>& avoid) {
  std::set<SymbolId> used(avoid.begin(), avoid.end());
  for (const auto& e : exprs) collect_symbols(e, used);
  static const char* stems[] = {"s", "r", "xi", "eta", "zeta"};
  for (int n = 0;; ++n) {
    for (const char* stem : stems) {
      std::string name = n == 0 ? std::string(stem) : std::string(stem) + std::to_string(n);
      SymbolId id = intern(name);
      if (!used.count(id)) return id;
    }
  }
}

double rms(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

SmoothMap curve_map(const ParamCurve& curve) {
  auto t = std::make_shared<Chart>("T", std::vector<std::string>{symbol_name(curve.parameter)});
  return SmoothMap(t, curve.chart, curve.components);
}

// ---- fiber ----

std::vector<Expr> solve_fiber(const SmoothMap& q, const SmoothMap& data, const std::vector<SymbolId>& known) {
  require_same_chart(*q.target(), *data.target(), "solve_fiber");
  const Chart& product = *q.source();
  std::vector<SymbolId> unknown;
  for (SymbolId c : product.coords()) {
    if (!contains(known, c)) unknown.push_back(c);
  }
  std::vector<Expr> eqs;
  for (std::size_t i = 0; i < q.components().size(); ++i) eqs.push_back(simplify(q[i] - data[i]));
  std::vector<bool> used(eqs.size(), false);
  Substitution solved;
  std::vector<bool> done(unknown.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < eqs.size() && !progress; ++i) {
      if (used[i]) continue;
      Expr num = numerator(unlog(eqs[i]));
      std::optional<std::size_t> only;
      int count = 0;
      for (std::size_t j = 0; j < unknown.size(); ++j) {
        if (!done[j] && depends_on(num, unknown[j])) {
          only = j;
          ++count;
        }
      }
      if (count == 0) {
        used[i] = true;
        continue;
      }
      if (count != 1) continue;
      SymbolId u = unknown[*only];
      Expr a = simplify(differentiate(num, u));
      if (a.is_zero() || depends_on(a, u)) continue;
      Expr b = simplify(substitute(num, u, Expr(0)));
      Expr value = simplify(-b / a);
      solved.variables[u] = value;
      done[*only] = true;
      used[i] = true;
      for (std::size_t k = 0; k < eqs.size(); ++k) {
        if (!used[k]) eqs[k] = simplify(substitute(eqs[k], u, value));
      }
      progress = true;
    }
  }
  std::vector<std::string> missing;
  for (std::size_t j = 0; j < unknown.size(); ++j) {
    if (!done[j]) missing.push_back(symbol_name(unknown[j]));
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "cannot solve the fiber equations for";
    for (const auto& m : missing) msg << ' ' << m;
    throw Error(msg.str());
  }
  std::vector<Expr> out;
  for (SymbolId c : product.coords()) {
    auto it = solved.variables.find(c);
    out.push_back(it == solved.variables.end() ? var(c) : it->second);
  }
  return out;
}

FiberRestriction restrict_to_fiber(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                                   const std::vector<std::string>& fiber, const FiberOptions& options) {
  std::vector<SymbolId> known;
  for (const auto& f : fiber) known.push_back(intern(f));
  for (SymbolId p : data.source()->coords()) {
    if (q.source()->has(p)) known.push_back(p);
  }
  return restrict_to_fiber(k, q, data, fiber, solve_fiber(q, data, known), options);
}

FiberRestriction restrict_to_fiber(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                                   const std::vector<std::string>& fiber, std::vector<Expr> components,
                                   const FiberOptions& options) {
  require_same_chart(*k.chart(), *q.source(), "restrict_to_fiber");
  require_same_chart(*q.target(), *data.target(), "restrict_to_fiber");
  const ChartPtr& product = q.source();
  if (components.size() != product->dim()) throw ChartMismatch("fiber parametrization needs one component per product coordinate");
  const Chart& tchart = *data.source();
  std::vector<SymbolId> params = tchart.coords();
  std::vector<SymbolId> fib;
  for (const auto& f : fiber) fib.push_back(intern(f));
  std::vector<SymbolId> all = params;
  all.insert(all.end(), fib.begin(), fib.end());
  auto chart = std::make_shared<Chart>("P", names_of(all), tchart.constraints());
  for (SymbolId p : params) chart->set_range(p, tchart.range(p).first, tchart.range(p).second);
  for (SymbolId f : fib) {
    if (product->has(f)) chart->set_range(f, product->range(f).first, product->range(f).second);
  }
  for (auto& c : components) c = simplify(c);
  ChartPtr domain = SmoothMap(chart, product, components).pulled_domain();
  SmoothMap param(domain, product, components);

  std::vector<Expr> residuals;
  std::vector<Expr> targets;
  for (std::size_t i = 0; i < q.components().size(); ++i) {
    targets.push_back(data[i]);
    residuals.push_back(simplify(param.pull(q[i]) - data[i]));
  }
  RankOptions ro;
  ro.seed = options.seed;
  ro.points = options.samples;
  ro.fixed = options.data;
  std::vector<Expr> probed = residuals;
  probed.insert(probed.end(), targets.begin(), targets.end());
  ProbeSet probes(domain, probed, ro);
  double worst = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    Evaluator ev(probes[p]);
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      if (residuals[i].is_zero()) continue;
      double rel = std::abs(ev(residuals[i])) / std::max(1.0, std::abs(ev(targets[i])));
      worst = std::max(worst, rel);
      if (!(rel <= options.tolerance)) {
        std::ostringstream msg;
        msg << "fiber parametrization inconsistent with the data: " << symbol_name(q.target()->coord(i))
            << " differs by " << rel;
        throw Error(msg.str());
      }
    }
  }

  std::vector<DifferentialForm> forms;
  for (const auto& g : k.generators()) forms.push_back(pullback(param, g).simplified());
  RankOptions rr;
  rr.seed = options.seed;
  rr.fixed = options.data;
  int rank = generic_rank(domain, forms, rr).rank;
  if (rank != static_cast<int>(fib.size())) {
    throw Error("fiber dimension mismatch: restricted system has rank " + std::to_string(rank) + ", fiber has dimension " +
                std::to_string(fib.size()));
  }
  return FiberRestriction{domain, params, fib, param, std::move(forms), worst};
}

// ---- Lie systems ----

LieODE LieSystem::direction(std::size_t a) const { return LieODE{parameters.at(a), state, rhs.at(a), domain}; }

LieSystem as_lie_system(const FiberRestriction& f, const FiberOptions& options) {
  std::size_t m = f.parameters.size();
  std::size_t r = f.fiber.size();
  ExprMatrix rows;
  for (const auto& form : f.forms) {
    std::vector<Expr> c = form.components();
    std::vector<Expr> row;
    for (std::size_t j = 0; j < r; ++j) row.push_back(c[m + j]);
    for (std::size_t a = 0; a < m; ++a) row.push_back(c[a]);
    rows.push_back(std::move(row));
  }
  std::vector<Expr> entries;
  for (const auto& row : rows) {
    for (const auto& e : row) {
      if (!e.is_number()) entries.push_back(e);
    }
  }
  RankOptions ro;
  ro.seed = options.seed;
  ro.fixed = options.data;
  ProbeSet probes(f.chart, entries, ro);
  ReducedMatrix red = row_reduce(rows, m + r, probes);
  bool ok = red.pivots.size() == r;
  for (std::size_t i = 0; i < red.pivots.size(); ++i) ok = ok && red.pivots[i] < r;
  if (!ok) throw CharacteristicError("restricted system is not solvable for the fiber differentials");

  LieSystem sys;
  sys.parameters = f.parameters;
  sys.state = f.fiber;
  sys.domain = f.chart->constraints();
  sys.rhs.assign(m, std::vector<Expr>(r));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t a = 0; a < m; ++a) sys.rhs[a][red.pivots[i]] = simplify(-red.rows[i][r + a]);
  }

  // Mixed partials: D_a F_b = D_b F_a with D_a = ∂_a + Σ F_a,j ∂_j.
  auto total = [&](std::size_t a, const Expr& e) {
    Expr out = differentiate(e, sys.parameters[a]);
    for (std::size_t j = 0; j < r; ++j) out += differentiate(e, sys.state[j]) * sys.rhs[a][j];
    return out;
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      for (std::size_t i = 0; i < r; ++i) {
        Expr lhs = simplify(total(a, sys.rhs[b][i]));
        Expr rhs = simplify(total(b, sys.rhs[a][i]));
        if (simplify(lhs - rhs).is_zero()) continue;
        for (std::size_t p = 0; p < probes.size(); ++p) {
          Evaluator ev(probes[p]);
          double l = ev(lhs);
          double rv = ev(rhs);
          double res = std::abs(l - rv) / std::max(1.0, std::abs(l) + std::abs(rv));
          sys.compatibility_residual = std::max(sys.compatibility_residual, res);
        }
      }
    }
  }
  if (sys.compatibility_residual > 1e-8) {
    std::ostringstream msg;
    msg << "Lie system is not compatible: mixed partials differ by " << sys.compatibility_residual;
    throw Error(msg.str());
  }
  return sys;
}

LieODE as_ode(const FiberRestriction& f, const FiberOptions& options) {
  if (f.parameters.size() != 1) throw Error("as_ode needs a one-parameter fiber; use as_lie_system");
  return as_lie_system(f, options).direction(0);
}

Triangularization triangularize(const LieODE& ode) {
  std::size_t n = ode.state.size();
  Triangularization out;
  std::vector<bool> placed(n, false);
  std::vector<bool> affine(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (depends_on(ode.rhs[i], ode.state[i])) {
      Expr second = simplify(differentiate(differentiate(ode.rhs[i], ode.state[i]), ode.state[i]));
      affine[i] = second.is_zero();
    }
  }
  for (std::size_t step = 0; step < n; ++step) {
    std::optional<std::size_t> pick;
    for (std::size_t i = n; i-- > 0;) {
      if (placed[i] || !affine[i]) continue;
      bool ready = true;
      for (std::size_t j = 0; j < n && ready; ++j) {
        if (j != i && !placed[j] && depends_on(ode.rhs[i], ode.state[j])) ready = false;
      }
      if (ready) {
        pick = i;
        break;
      }
    }
    if (!pick) {
      std::ostringstream msg;
      msg << "no triangular ordering: remaining";
      for (std::size_t i = 0; i < n; ++i) {
        if (!placed[i]) msg << ' ' << symbol_name(ode.state[i]) << (affine[i] ? "" : " (nonlinear in itself)");
      }
      out.reason = msg.str();
      out.order.clear();
      return out;
    }
    placed[*pick] = true;
    out.order.push_back(*pick);
  }
  out.ok = true;
  return out;
}

// ---- solutions ----

CurveSolution CurveSolution::symbolic(std::vector<SymbolId> parameters, std::vector<SymbolId> state, std::vector<Expr> exprs) {
  CurveSolution s;
  s.kind_ = Kind::Symbolic;
  s.params_ = std::move(parameters);
  s.state_ = std::move(state);
  s.exprs_ = std::move(exprs);
  if (s.params_.size() == 1) {
    for (const auto& e : s.exprs_) s.derivs_.push_back(simplify(differentiate(e, s.params_[0])));
  }
  return s;
}

const CurveSolution::Segment& CurveSolution::segment(double t) const {
  auto start = [](const Segment& s) { return std::min(s.t0, s.t0 + s.h); };
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [&](double v, const Segment& s) { return v < start(s); });
  if (it != segments_.begin()) --it;
  return *it;
}

std::vector<double> CurveSolution::value(double t, const Binding& data) const {
  if (kind_ == Kind::Symbolic) return value(std::vector<double>{t}, data);
  if (t < lo_ - 1e-12 * std::max(1.0, std::abs(lo_)) || t > hi_ + 1e-12 * std::max(1.0, std::abs(hi_))) {
    throw EvalError("solution requested at t = " + std::to_string(t) + " outside the integrated span");
  }
  if (segments_.empty()) return {init_.data(), init_.data() + init_.size()};
  const Segment& s = segment(t);
  double th = (t - s.t0) / s.h;
  double th1 = 1.0 - th;
  Eigen::VectorXd y = s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
  return {y.data(), y.data() + y.size()};
}

std::vector<double> CurveSolution::value(const std::vector<double>& params, const Binding& data) const {
  if (kind_ == Kind::Sampled) {
    if (params.size() != 1) throw EvalError("sampled solution has one parameter");
    return value(params[0], data);
  }
  if (params.size() != params_.size()) throw EvalError("solution needs " + std::to_string(params_.size()) + " parameters");
  Evaluator ev(data);
  std::vector<double> out;
  for (const auto& e : exprs_) out.push_back(ev(e, params_, params));
  return out;
}

std::vector<double> CurveSolution::derivative(double t, const Binding& data) const {
  if (kind_ == Kind::Symbolic) {
    if (params_.size() != 1) throw EvalError("derivative needs a one-parameter solution");
    Evaluator ev(data);
    std::vector<double> out;
    std::array<double, 1> tv{t};
    for (const auto& e : derivs_) out.push_back(ev(e, params_, tv));
    return out;
  }
  std::vector<double> y = value(t, data);
  std::vector<SymbolId> names = params_;
  names.insert(names.end(), state_.begin(), state_.end());
  std::vector<double> vals = {t};
  vals.insert(vals.end(), y.begin(), y.end());
  Evaluator ev(data);
  std::vector<double> out;
  for (const auto& e : derivs_) out.push_back(ev(e, names, vals));
  return out;
}

CurveSolution integrate_quadrature(const LieODE& ode, const std::vector<Expr>& init, const Expr& t0) {
  if (init.size() != ode.state.size()) throw Error("initial values must match the state");
  Triangularization tri = triangularize(ode);
  if (!tri.ok) throw Error(tri.reason);
  SymbolId p = ode.parameter;
  Expr t = var(p);
  Substitution solved;
  std::vector<Expr> out(ode.state.size());
  for (std::size_t i : tri.order) {
    Expr r = simplify(solved.empty() ? ode.rhs[i] : substitute(ode.rhs[i], solved));
    SymbolId s = ode.state[i];
    Expr a = simplify(differentiate(r, s));
    Expr b = simplify(substitute(r, s, Expr(0)));
    std::vector<Expr> seen = {r, init[i], t0};
    for (const auto& e : out) seen.push_back(e);
    std::vector<SymbolId> avoid = ode.state;
    avoid.push_back(p);
    SymbolId tau = pick_dummy(seen, avoid);
    Expr at = substitute(a, p, var(tau));
    Expr bt = substitute(b, p, var(tau));
    Expr value;
    if (a.is_zero()) {
      value = init[i] + integral(t0, t, bt, tau);
    } else {
      Expr A = simplify(integral(t0, t, at, tau));
      if (b.is_zero()) {
        value = init[i] * exp(A);
      } else {
        Expr Atau = substitute(A, p, var(tau));
        value = exp(A) * (init[i] + integral(t0, t, bt * exp(-Atau), tau));
      }
    }
    out[i] = simplify(value);
    solved.variables[s] = out[i];
  }
  return CurveSolution::symbolic({p}, ode.state, std::move(out));
}

CurveSolution integrate_quadrature(const LieSystem& system, const std::vector<Expr>& init, const std::vector<Expr>& base) {
  if (base.size() != system.parameters.size()) throw Error("base point must give every parameter");
  std::vector<Expr> cur = init;
  for (std::size_t a = 0; a < system.parameters.size(); ++a) {
    LieODE ode = system.direction(a);
    Substitution later;
    for (std::size_t b = a + 1; b < system.parameters.size(); ++b) later.variables[system.parameters[b]] = base[b];
    if (!later.empty()) {
      for (auto& e : ode.rhs) e = simplify(substitute(e, later));
    }
    cur = integrate_quadrature(ode, cur, base[a]).exprs();
  }
  return CurveSolution::symbolic(system.parameters, system.state, std::move(cur));
}

// ---- Dormand–Prince 5(4) ----

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799, d4 = -10690763975.0 / 1880347072,
                 d5 = 701980252875.0 / 199316789632, d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Rhs {
 public:
  Rhs(const LieODE& ode, const Binding& data) : ode_(ode), ev_(data) {
    names_.push_back(ode.parameter);
    names_.insert(names_.end(), ode.state.begin(), ode.state.end());
    vals_.resize(names_.size());
  }

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& y) {
    load(t, y);
    Eigen::VectorXd out(static_cast<Eigen::Index>(ode_.rhs.size()));
    for (std::size_t i = 0; i < ode_.rhs.size(); ++i) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = ev_(ode_.rhs[i], names_, vals_);
      } catch (const EvalError&) {
      }
      out(static_cast<Eigen::Index>(i)) = v;
    }
    return out;
  }

  // Value of each domain constraint; NaN when it cannot be evaluated.
  std::vector<double> constraints(double t, const Eigen::VectorXd& y) {
    load(t, y);
    std::vector<double> out;
    for (const auto& c : ode_.domain) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = ev_(c.expr, names_, vals_);
      } catch (const EvalError&) {
      }
      out.push_back(v);
    }
    return out;
  }

 private:
  void load(double t, const Eigen::VectorXd& y) {
    vals_[0] = t;
    for (Eigen::Index i = 0; i < y.size(); ++i) vals_[static_cast<std::size_t>(i) + 1] = y(i);
  }

  const LieODE& ode_;
  Evaluator ev_;
  std::vector<SymbolId> names_;
  std::vector<double> vals_;
};

}  // namespace

CurveSolution integrate_rk(const LieODE& ode, const std::vector<double>& init, double t0, double lo, double hi,
                           const RKConfig& config, const Binding& data) {
  if (init.size() != ode.state.size()) throw IntegrationError("initial values must match the state");
  if (!(lo <= t0 && t0 <= hi)) throw IntegrationError("initial time outside the integration span");
  Rhs f(ode, data);
  Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
  std::vector<double> c0 = f.constraints(t0, y0);
  for (std::size_t i = 0; i < c0.size(); ++i) {
    bool bad = !std::isfinite(c0[i]) || c0[i] == 0.0 || (ode.domain[i].kind == Constraint::Kind::Positive && c0[i] < 0);
    if (bad) throw DomainViolation("initial point violates " + to_string(ode.domain[i].expr));
  }
  Eigen::VectorXd k0 = f(t0, y0);
  if (!k0.allFinite()) throw DomainViolation("right-hand side is not finite at the initial point");

  CurveSolution sol;
  sol.kind_ = CurveSolution::Kind::Sampled;
  sol.params_ = {ode.parameter};
  sol.state_ = ode.state;
  sol.init_ = y0;
  sol.derivs_ = ode.rhs;
  sol.lo_ = lo;
  sol.hi_ = hi;
  double span = std::max(hi - lo, 1e-300);

  auto scale = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (config.atol + config.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  std::vector<CurveSolution::Segment> backward;
  for (int dir : {1, -1}) {
    double end = dir > 0 ? hi : lo;
    if (end == t0) continue;
    double t = t0;
    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1 = k0;
    // Initial step after Hairer, Nørsett and Wanner.
    Eigen::VectorXd sc = scale(y, y);
    double dn0 = rms(y.cwiseQuotient(sc));
    double dn1 = rms(k1.cwiseQuotient(sc));
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, std::abs(end - t0));
    Eigen::VectorXd yp = y + dir * h0 * k1;
    Eigen::VectorXd kp = f(t + dir * h0, yp);
    double dn2 = kp.allFinite() ? rms((kp - k1).cwiseQuotient(sc)) / h0 : 0.0;
    double dmax = std::max(dn1, dn2);
    double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    double h = dir * std::min({100 * h0, h1, std::abs(end - t0)});

    std::vector<double> prev = c0;
    int steps = 0;
    while (dir * (end - t) > 0) {
      if (++steps > config.max_steps) throw IntegrationError("step limit reached at t = " + std::to_string(t));
      if (dir * (t + h - end) > 0) h = end - t;
      if (std::abs(h) < config.min_step * span) throw IntegrationError("step size underflow at t = " + std::to_string(t));
      Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
      Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      Eigen::VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      Eigen::VectorXd k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Eigen::VectorXd y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      Eigen::VectorXd k7 = f(t + h, y1);
      Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double errn = rms(err.cwiseQuotient(scale(y, y1)));
      if (!std::isfinite(errn) || !y1.allFinite() || !k7.allFinite()) errn = std::numeric_limits<double>::infinity();
      if (errn <= 1.0) {
        std::vector<double> cv = f.constraints(t + h, y1);
        for (std::size_t i = 0; i < cv.size(); ++i) {
          bool pos = ode.domain[i].kind == Constraint::Kind::Positive;
          bool bad = !std::isfinite(cv[i]) || cv[i] == 0.0 || (pos && cv[i] < 0) || (!pos && (cv[i] > 0) != (prev[i] > 0));
          if (bad) {
            std::ostringstream msg;
            msg << "domain constraint " << to_string(ode.domain[i].expr) << " violated near t = " << t + h;
            throw DomainViolation(msg.str());
          }
        }
        prev = cv;
        CurveSolution::Segment seg;
        seg.t0 = t;
        seg.h = h;
        seg.r1 = y;
        seg.r2 = y1 - y;
        seg.r3 = h * k1 - seg.r2;
        seg.r4 = seg.r2 - h * k7 - seg.r3;
        seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        (dir > 0 ? sol.segments_ : backward).push_back(std::move(seg));
        sol.error_ = std::max(sol.error_, errn);
        t += h;
        y = y1;
        k1 = k7;
        double fac = errn == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(errn, -0.2), 0.2, 5.0);
        h *= fac;
      } else {
        double fac = std::isfinite(errn) ? std::clamp(0.9 * std::pow(errn, -0.2), 0.2, 1.0) : 0.2;
        h *= fac;
      }
    }
  }
  std::reverse(backward.begin(), backward.end());
  backward.insert(backward.end(), sol.segments_.begin(), sol.segments_.end());
  sol.segments_ = std::move(backward);
  return sol;
}

std::vector<double> integrate_rk_point(const LieSystem& system, const std::vector<double>& init,
                                       const std::vector<double>& base, const std::vector<double>& point,
                                       const RKConfig& config, const Binding& data) {
  std::size_t m = system.parameters.size();
  if (base.size() != m || point.size() != m) throw IntegrationError("base and target must give every parameter");
  std::vector<double> y = init;
  for (std::size_t a = 0; a < m; ++a) {
    if (point[a] == base[a]) continue;
    Binding b = data;
    for (std::size_t c = 0; c < m; ++c) {
      if (c != a) b.variables[system.parameters[c]] = c < a ? point[c] : base[c];
    }
    double lo = std::min(base[a], point[a]);
    double hi = std::max(base[a], point[a]);
    y = integrate_rk(system.direction(a), y, base[a], lo, hi, config, b).value(point[a], b);
  }
  return y;
}

double lie_residual(const FiberRestriction& f, const CurveSolution& s, double lo, double hi, const Binding& data, int samples) {
  if (f.parameters.size() != 1) throw Error("lie_residual needs a one-parameter fiber");
  std::vector<std::vector<Expr>> comps;
  for (const auto& form : f.forms) comps.push_back(form.components());
  std::vector<SymbolId> names = f.parameters;
  names.insert(names.end(), f.fiber.begin(), f.fiber.end());
  Evaluator ev(data);
  double worst = 0.0;
  for (double t : linspace(lo, hi, samples)) {
    std::vector<double> y = s.value(t, data);
    std::vector<double> dy = s.derivative(t, data);
    std::vector<double> point = {t};
    point.insert(point.end(), y.begin(), y.end());
    std::vector<double> vel = {1.0};
    vel.insert(vel.end(), dy.begin(), dy.end());
    for (const auto& c : comps) {
      double v = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (!c[j].is_zero()) v += ev(c[j], names, point) * vel[j];
      }
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

}  // namespace darboux
