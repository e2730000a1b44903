#include "darboux/cauchy/cauchy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "darboux/error.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

namespace {

/// Exact rational when the value is a short decimal, a float otherwise.
Expr number(double v) {
  for (std::int64_t den : {1, 2, 4, 5, 8, 10, 16, 20, 25, 50, 100, 1000}) {
    double n = v * static_cast<double>(den);
    if (std::abs(n - std::round(n)) < 1e-12 && std::abs(n) < 1e12) {
      return Expr(Number::rational(static_cast<std::int64_t>(std::llround(n)), den));
    }
  }
  return Expr(v);
}

std::atomic<std::size_t> worker_limit{0};

template <class F>
void parallel_for(std::size_t n, F f) {
  std::size_t limit = worker_limit.load();
  if (limit == 0) limit = std::thread::hardware_concurrency();
  std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, limit));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Points of the tensor grid with `n` samples per range, last range fastest.
std::vector<std::vector<double>> tensor_grid(const std::vector<std::pair<double, double>>& ranges, int n) {
  std::vector<std::vector<double>> out = {{}};
  for (const auto& [lo, hi] : ranges) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (double t : linspace(lo, hi, n)) {
        auto p = prefix;
        p.push_back(t);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Expression-bound functions substituted into `e`.
Substitution function_substitution(const Binding& b) {
  Substitution s;
  for (const auto& [id, impl] : b.functions) {
    if (impl && impl->is_expression()) s.functions.emplace(id, impl->lambda());
  }
  return s;
}

std::vector<Expr> substituted(const std::vector<Expr>& es, const Substitution& s) {
  std::vector<Expr> out;
  for (const auto& e : es) out.push_back(s.empty() ? e : simplify(substitute(e, s)));
  return out;
}

SmoothMap substituted(const SmoothMap& m, const Substitution& s) {
  return SmoothMap(m.source(), m.target(), substituted(m.components(), s));
}

std::vector<double> eval_all(const std::vector<Expr>& es, const Binding& b, const std::vector<SymbolId>& names,
                             const std::vector<double>& values) {
  Evaluator ev(b);
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(ev(e, names, values));
  return out;
}

int svd_rank(const Eigen::MatrixXd& m, double tol = 1e-8) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > tol * std::max(1.0, s(0));
  return r;
}

const Binding& empty_binding() {
  static const Binding b;
  return b;
}

std::string branch_name(int branch, std::size_t i, std::size_t dim) {
  std::string n = "t" + std::to_string(branch);
  return dim == 1 ? n : n + "_" + std::to_string(i + 1);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Auto: return "auto";
    case Method::Quadrature: return "quadrature";
    case Method::RK45: return "rk45";
  }
  return "auto";
}

Method parse_method(const std::string& text) {
  if (text == "auto") return Method::Auto;
  if (text == "quadrature") return Method::Quadrature;
  if (text == "rk45") return Method::RK45;
  throw InputError("unknown method '" + text + "' (expected auto, quadrature or rk45)");
}

CauchyProblem::CauchyProblem(PfaffianSystem system_, std::shared_ptr<const QuotientRepresentation> rep_, SmoothMap data_)
    : system(std::move(system_)), rep(std::move(rep_)), data(std::move(data_)) {
  if (!rep) throw Error("Cauchy problem needs a quotient representation");
  require_same_chart(*system.chart(), *rep->base(), "Cauchy problem system and quotient base");
  require_same_chart(*data.target(), *rep->base(), "Cauchy data and quotient base");
}

std::vector<std::pair<double, double>> CauchyProblem::parameter_ranges() const {
  if (!ranges.empty()) {
    if (ranges.size() != data.source()->dim()) throw InputError("one range per data parameter is required");
    return ranges;
  }
  return data.source()->ranges();
}

std::vector<double> CauchyProblem::base() const {
  if (!base_point.empty()) {
    if (base_point.size() != data.source()->dim()) throw InputError("base point needs one value per data parameter");
    return base_point;
  }
  std::vector<double> out;
  for (const auto& [lo, hi] : parameter_ranges()) out.push_back(0.5 * (lo + hi));
  return out;
}

// ---------------------------------------------------------------------------
// Lift

LiftedCurve::LiftedCurve(FiberRestriction fiber, LieSystem system, std::vector<double> base, std::vector<Expr> init,
                         std::shared_ptr<const Binding> data)
    : fiber_(std::move(fiber)), system_(std::move(system)), base_(std::move(base)), init_(std::move(init)),
      data_(std::move(data)) {
  const auto& comps = fiber_.parametrization.components();
  for (std::size_t a = 0; a < system_.parameters.size(); ++a) {
    std::vector<Expr> v;
    for (const auto& c : comps) {
      Expr d = differentiate(c, system_.parameters[a]);
      for (std::size_t j = 0; j < system_.state.size(); ++j) {
        d = d + differentiate(c, system_.state[j]) * system_.rhs[a][j];
      }
      v.push_back(simplify(d));
    }
    velocity_.push_back(std::move(v));
  }
}

void LiftedCurve::integrate(Method method, bool solvable, const std::vector<std::pair<double, double>>& ranges,
                            const RKConfig& rk, double padding) {
  rk_ = rk;
  std::string why;
  if (!solvable) why = "group is not solvable";
  for (std::size_t a = 0; why.empty() && a < system_.parameters.size(); ++a) {
    Triangularization tri = triangularize(system_.direction(a));
    if (!tri.ok) why = "system is not triangular along " + symbol_name(system_.parameters[a]) + ": " + tri.reason;
  }
  if (method == Method::Quadrature && !why.empty()) throw Error("quadrature refused: " + why);
  bool quadrature = method != Method::RK45 && why.empty();
  refusal_ = method == Method::RK45 && why.empty() ? "rk45 requested" : why;
  if (quadrature) {
    std::vector<Expr> base;
    for (double b : base_) base.push_back(number(b));
    solution_ = system_.parameters.size() == 1 ? integrate_quadrature(system_.direction(0), init_, base[0])
                                               : integrate_quadrature(system_, init_, base);
    method_ = "quadrature";
    refusal_.clear();
    return;
  }
  method_ = "rk45";
  if (system_.parameters.size() == 1) {
    auto [lo, hi] = ranges.at(0);
    double pad = padding * (hi - lo);
    std::vector<double> y0 = eval_all(init_, *data_, system_.parameters, base_);
    solution_ = integrate_rk(system_.direction(0), y0, base_[0], std::min(lo, base_[0]) - pad,
                             std::max(hi, base_[0]) + pad, rk, *data_);
  }
}

std::vector<double> LiftedCurve::state(const std::vector<double>& params) const {
  if (params.size() != system_.parameters.size()) throw EvalError("lift needs one value per data parameter");
  if (solution_) return solution_->value(params, *data_);
  std::vector<double> y0 = eval_all(init_, *data_, system_.parameters, base_);
  return integrate_rk_point(system_, y0, base_, params, rk_, *data_);
}

std::vector<double> LiftedCurve::point(const std::vector<double>& params) const {
  std::vector<double> y = state(params);
  std::vector<SymbolId> names = system_.parameters;
  names.insert(names.end(), system_.state.begin(), system_.state.end());
  std::vector<double> vals = params;
  vals.insert(vals.end(), y.begin(), y.end());
  return eval_all(fiber_.parametrization.components(), *data_, names, vals);
}

std::vector<double> LiftedCurve::velocity(const std::vector<double>& params, std::size_t a) const {
  std::vector<double> y = state(params);
  std::vector<SymbolId> names = system_.parameters;
  names.insert(names.end(), system_.state.begin(), system_.state.end());
  std::vector<double> vals = params;
  vals.insert(vals.end(), y.begin(), y.end());
  return eval_all(velocity_.at(a), *data_, names, vals);
}

std::optional<std::vector<Expr>> LiftedCurve::symbolic() const {
  if (!solution_ || solution_->kind() != CurveSolution::Kind::Symbolic) return std::nullopt;
  Substitution s;
  for (std::size_t j = 0; j < system_.state.size(); ++j) s.variables[system_.state[j]] = solution_->exprs()[j];
  return substituted(fiber_.parametrization.components(), s);
}

namespace {

FiberOptions fiber_options(const CauchyProblem& p, const Binding& data) {
  FiberOptions o;
  o.data = &data;
  o.seed = p.seed;
  return o;
}

/// Checks the domain of the fiber chart and q∘P = S at (t₀, fiber point).
void check_fiber_point(const FiberRestriction& fr, const SmoothMap& q, const SmoothMap& data,
                       const std::vector<double>& base, const std::vector<double>& y, const Binding& b) {
  std::vector<SymbolId> names = fr.parameters;
  names.insert(names.end(), fr.fiber.begin(), fr.fiber.end());
  std::vector<double> vals = base;
  vals.insert(vals.end(), y.begin(), y.end());
  Binding point = b;
  for (std::size_t i = 0; i < names.size(); ++i) point.variables[names[i]] = vals[i];
  if (!fr.chart->admissible(point)) throw Error("fiber point violates the domain of the fiber chart");
  std::vector<double> m = eval_all(fr.parametrization.components(), b, names, vals);
  std::vector<double> image = eval_all(q.components(), b, q.source()->coords(), m);
  std::vector<double> target = eval_all(data.components(), b, data.source()->coords(), base);
  for (std::size_t k = 0; k < image.size(); ++k) {
    if (std::abs(image[k] - target[k]) > 1e-9 * std::max(1.0, std::abs(target[k]))) {
      throw Error("fiber point does not lie over the data: " + symbol_name(q.target()->coord(k)) + " differs by " +
                  std::to_string(image[k] - target[k]));
    }
  }
}

}  // namespace

LiftedCurve lift_cauchy_data(const CauchyProblem& p) {
  const auto& rep = *p.rep;
  auto ranges = p.parameter_ranges();
  auto base = p.base();
  Substitution subs = function_substitution(p.functions);
  SmoothMap data = substituted(p.data, subs);
  auto binding = std::make_shared<const Binding>(p.functions);

  if (p.hat && p.check && data.source()->dim() == 1) {
    ParamCurve curve(data.target(), data.source()->coord(0), data.components());
    auto report = is_noncharacteristic(curve, *binding, ranges[0].first, ranges[0].second, p.system, *p.hat, *p.check);
    if (!report.integral) {
      throw CharacteristicError("Cauchy data is not an integral curve (residual " +
                                std::to_string(report.integral_residual) + ")");
    }
    if (!report.ok()) throw CharacteristicError("Cauchy data is characteristic");
  }
  if (p.fiber_point.size() != p.fiber.size()) throw InputError("fiber point needs one value per fiber coordinate");

  FiberOptions opts = fiber_options(p, *binding);
  PfaffianSystem k = rep.sum();
  FiberRestriction fr = p.parametrization
                            ? restrict_to_fiber(k, rep.q(), data, p.fiber, substituted(*p.parametrization, subs), opts)
                            : restrict_to_fiber(k, rep.q(), data, p.fiber, opts);
  LieSystem sys = as_lie_system(fr, opts);
  std::vector<Expr> init = substituted(p.fiber_point, subs);
  check_fiber_point(fr, rep.q(), data, base, eval_all(init, *binding, fr.parameters, base), *binding);

  LiftedCurve lift(std::move(fr), std::move(sys), base, std::move(init), binding);
  lift.integrate(p.method, is_solvable(rep.g1()), ranges, p.rk, p.padding);
  return lift;
}

LiftedCurve lift_factor(const PfaffianSystem& k, const SmoothMap& q, const SmoothMap& data,
                        const std::vector<std::string>& fiber, const std::vector<double>& base,
                        const std::vector<Expr>& init, const CauchyProblem& p) {
  auto binding = std::make_shared<const Binding>(p.functions);
  FiberOptions opts = fiber_options(p, *binding);
  FiberRestriction fr = restrict_to_fiber(k, q, data, fiber, opts);
  LieSystem sys = as_lie_system(fr, opts);
  check_fiber_point(fr, q, data, base, eval_all(init, *binding, fr.parameters, base), *binding);
  LiftedCurve lift(std::move(fr), std::move(sys), base, init, binding);
  lift.integrate(p.method, is_solvable(p.rep->g1()), p.parameter_ranges(), p.rk, p.padding);
  return lift;
}

// ---------------------------------------------------------------------------
// Split and compose

namespace {

std::vector<std::size_t> factor_indices(const Chart& product, const Chart& factor) {
  std::vector<std::size_t> idx;
  for (SymbolId c : factor.coords()) idx.push_back(product.index(c));
  return idx;
}

Eigen::MatrixXd projected_velocities(const LiftedCurve& lift, const std::vector<double>& params,
                                     const std::vector<std::size_t>& idx, const std::vector<std::size_t>& directions) {
  Eigen::MatrixXd m(idx.size(), directions.size());
  for (std::size_t c = 0; c < directions.size(); ++c) {
    auto v = lift.velocity(params, directions[c]);
    for (std::size_t r = 0; r < idx.size(); ++r) m(r, c) = v[idx[r]];
  }
  return m;
}

/// max |θ(σ_i')| / (|θ| |σ_i'|) over the generators of K_i.
double factor_residual(const PfaffianSystem& k, const std::vector<double>& point, const Eigen::MatrixXd& vel) {
  double worst = 0.0;
  for (const auto& g : k.generators()) {
    auto coeffs = eval_all(g.components(), empty_binding(), k.chart()->coords(), point);
    Eigen::Map<const Eigen::VectorXd> th(coeffs.data(), coeffs.size());
    for (int c = 0; c < vel.cols(); ++c) {
      double scale = std::max(1.0, th.norm() * vel.col(c).norm());
      worst = std::max(worst, std::abs(th.dot(vel.col(c))) / scale);
    }
  }
  return worst;
}

Branch lift_branch(const std::shared_ptr<const LiftedCurve>& lift, const ChartPtr& product, const ChartPtr& factor, int which,
                   const std::vector<std::size_t>& directions, const std::vector<std::pair<double, double>>& ranges) {
  Branch b;
  b.chart = factor;
  auto idx = factor_indices(*product, *factor);
  auto base = lift->base();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    b.parameters.push_back(branch_name(which, i, directions.size()));
    b.ranges.push_back(ranges.at(directions[i]));
  }
  b.point = [lift, idx, base, directions](const std::vector<double>& t) {
    std::vector<double> params = base;
    for (std::size_t i = 0; i < directions.size(); ++i) params[directions[i]] = t.at(i);
    auto m = lift->point(params);
    std::vector<double> out;
    for (std::size_t i : idx) out.push_back(m[i]);
    return out;
  };
  if (auto sym = lift->symbolic()) {
    Substitution s;
    const auto& params = lift->system().parameters;
    for (std::size_t a = 0; a < params.size(); ++a) s.variables[params[a]] = number(base[a]);
    for (std::size_t i = 0; i < directions.size(); ++i) s.variables[params[directions[i]]] = var(b.parameters[i]);
    std::vector<Expr> comps;
    for (std::size_t i : idx) comps.push_back(simplify(substitute((*sym)[i], s)));
    b.symbolic = std::move(comps);
  }
  return b;
}

}  // namespace

std::pair<Branch, Branch> split_lift(const LiftedCurve& lift, const QuotientRepresentation& rep,
                                     const std::vector<std::pair<double, double>>& ranges, int n1, int n2,
                                     int samples) {
  const auto& product = rep.product();
  std::size_t m = lift.parameter_count();
  if (ranges.size() != m) throw InputError("one range per data parameter is required");
  std::vector<std::size_t> all(m);
  for (std::size_t a = 0; a < m; ++a) all[a] = a;

  std::array<std::vector<std::size_t>, 2> chosen;
  std::array<ChartPtr, 2> factors = {rep.m1(), rep.m2()};
  std::array<int, 2> expected = {n2, n1};
  std::array<const PfaffianSystem*, 2> systems = {&rep.k1(), &rep.k2()};
  for (int i = 0; i < 2; ++i) {
    auto idx = factor_indices(*product, *factors[i]);
    Eigen::MatrixXd vel = projected_velocities(lift, lift.base(), idx, all);
    std::vector<std::size_t> dirs;
    int rank = 0;
    for (std::size_t a = 0; a < m && rank < expected[i]; ++a) {
      auto trial = dirs;
      trial.push_back(a);
      Eigen::MatrixXd sub(vel.rows(), static_cast<Eigen::Index>(trial.size()));
      for (std::size_t c = 0; c < trial.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = vel.col(static_cast<Eigen::Index>(trial[c]));
      int r = svd_rank(sub);
      if (r > rank) {
        dirs = trial;
        rank = r;
      }
    }
    if (rank < expected[i]) {
      throw CharacteristicError("projection onto " + factors[i]->name() + " has rank " + std::to_string(rank) +
                                ", expected " + std::to_string(expected[i]));
    }
    for (int k = 0; k < samples; ++k) {
      std::vector<double> params;
      double f = samples > 1 ? static_cast<double>(k) / (samples - 1) : 0.5;
      for (const auto& [lo, hi] : ranges) params.push_back(lo + f * (hi - lo));
      Eigen::MatrixXd v = projected_velocities(lift, params, idx, dirs);
      if (svd_rank(v) < expected[i]) {
        throw CharacteristicError("projection onto " + factors[i]->name() + " is not an immersion at sample " +
                                  std::to_string(k));
      }
      auto full = lift.point(params);
      std::vector<double> pt;
      for (std::size_t j : idx) pt.push_back(full[j]);
      double res = factor_residual(*systems[i], pt, v);
      if (res > 1e-8) {
        throw IntegrationError("projection onto " + factors[i]->name() + " is not an integral manifold (residual " +
                               std::to_string(res) + ")");
      }
    }
    chosen[i] = std::move(dirs);
  }
  auto shared = std::make_shared<const LiftedCurve>(lift);
  return {lift_branch(shared, product, rep.m1(), 1, chosen[0], ranges),
          lift_branch(shared, product, rep.m2(), 2, chosen[1], ranges)};
}

SolutionSurface::SolutionSurface(std::shared_ptr<const QuotientRepresentation> rep, Branch b1, Branch b2,
                                 std::string method, std::string route)
    : rep_(std::move(rep)), b1_(std::move(b1)), b2_(std::move(b2)), method_(std::move(method)),
      route_(std::move(route)), memo1_(std::make_shared<Memo>()), memo2_(std::make_shared<Memo>()) {}

std::vector<std::string> SolutionSurface::parameter_names() const {
  auto out = b1_.parameters;
  out.insert(out.end(), b2_.parameters.begin(), b2_.parameters.end());
  return out;
}

std::vector<double> SolutionSurface::cached(const Branch& b, Memo& memo, const std::vector<double>& t) const {
  {
    std::lock_guard lock(memo.mutex);
    auto it = memo.values.find(t);
    if (it != memo.values.end()) return it->second;
  }
  if (!b.point) throw EvalError("branch has no evaluator");
  auto v = b.point(t);
  std::lock_guard lock(memo.mutex);
  memo.values.emplace(t, v);
  return v;
}

std::vector<double> SolutionSurface::sigma1(const std::vector<double>& t1) const { return cached(b1_, *memo1_, t1); }
std::vector<double> SolutionSurface::sigma2(const std::vector<double>& t2) const { return cached(b2_, *memo2_, t2); }

std::vector<double> SolutionSurface::at(const std::vector<double>& t1, const std::vector<double>& t2) const {
  if (direct_) return direct_(t1, t2);
  auto m = sigma1(t1);
  auto m2 = sigma2(t2);
  m.insert(m.end(), m2.begin(), m2.end());
  return eval_all(rep_->q().components(), empty_binding(), rep_->product()->coords(), m);
}

std::optional<std::vector<Expr>> SolutionSurface::symbolic() const {
  if (!b1_.symbolic || !b2_.symbolic) return std::nullopt;
  Substitution s;
  const auto& c1 = rep_->m1()->coords();
  const auto& c2 = rep_->m2()->coords();
  for (std::size_t i = 0; i < c1.size(); ++i) s.variables[c1[i]] = (*b1_.symbolic)[i];
  for (std::size_t i = 0; i < c2.size(); ++i) s.variables[c2[i]] = (*b2_.symbolic)[i];
  return substituted(rep_->q().components(), s);
}

SolutionSurface compose_solution(Branch sigma1, Branch sigma2, std::shared_ptr<const QuotientRepresentation> rep,
                                 std::string method, std::string route) {
  require_same_chart(*sigma1.chart, *rep->m1(), "first factor curve");
  require_same_chart(*sigma2.chart, *rep->m2(), "second factor curve");
  return SolutionSurface(std::move(rep), std::move(sigma1), std::move(sigma2), std::move(method), std::move(route));
}

namespace {

SolutionSurface solve_via_lift(const CauchyProblem& p, const std::string& route, int n1, int n2) {
  auto lift = std::make_shared<LiftedCurve>(lift_cauchy_data(p));
  auto [b1, b2] = split_lift(*lift, *p.rep, p.parameter_ranges(), n1, n2);
  SolutionSurface s = compose_solution(std::move(b1), std::move(b2), p.rep, lift->method(), route);
  s.refusal = lift->refusal();
  s.lift = [lift](const std::vector<double>& params) { return lift->point(params); };
  return s;
}

}  // namespace

SolutionSurface solve(const CauchyProblem& p) {
  if (p.data.source()->dim() != 1) throw InputError("solve needs one-parameter Cauchy data");
  return solve_via_lift(p, "quotient", 1, 1);
}

SolutionSurface solve_decomposable(const CauchyProblem& p) {
  int expected = p.n1 + p.n2 - 1;
  if (static_cast<int>(p.data.source()->dim()) != expected) {
    throw InputError("decomposable data needs " + std::to_string(expected) + " parameters");
  }
  return solve_via_lift(p, "decomposable", p.n1, p.n2);
}

SolutionSurface solve_second_method(const CauchyProblem& p) {
  const auto& rep = *p.rep;
  if (!rep.factor_quotients) throw InputError("second method needs the factor quotient maps");
  if (p.data.source()->dim() != 1) throw InputError("second method needs one-parameter Cauchy data");
  const auto& fq = *rep.factor_quotients;
  Substitution subs = function_substitution(p.functions);
  SmoothMap data = substituted(p.data, subs);
  auto base = p.base();
  auto ranges = p.parameter_ranges();
  auto binding = std::make_shared<const Binding>(p.functions);

  // The factors of the fiber point over γ(t₀).
  FiberOptions opts = fiber_options(p, *binding);
  PfaffianSystem k = rep.sum();
  FiberRestriction fr = p.parametrization
                            ? restrict_to_fiber(k, rep.q(), data, p.fiber, substituted(*p.parametrization, subs), opts)
                            : restrict_to_fiber(k, rep.q(), data, p.fiber, opts);
  Substitution at_base;
  for (std::size_t a = 0; a < fr.parameters.size(); ++a) at_base.variables[fr.parameters[a]] = number(base[a]);
  auto fp = substituted(p.fiber_point, subs);
  for (std::size_t j = 0; j < fr.fiber.size(); ++j) at_base.variables[fr.fiber[j]] = fp.at(j);
  std::vector<Expr> x = substituted(fr.parametrization.components(), at_base);
  const auto& product = rep.product();

  auto factor_lift = [&](const PfaffianSystem& ki, const SmoothMap& pi, const SmoothMap& qi,
                         const std::vector<std::string>& fiber) {
    SmoothMap gamma_i = substituted(compose(pi, data), Substitution{});
    std::vector<Expr> init;
    for (const auto& f : fiber) init.push_back(x.at(product->index(f)));
    return std::make_shared<LiftedCurve>(lift_factor(ki, qi, gamma_i, fiber, base, init, p));
  };
  auto l1 = factor_lift(rep.k1(), fq.p1, fq.q1, p.fiber1);
  auto l2 = factor_lift(rep.k2(), fq.p2, fq.q2, p.fiber2);

  auto make_branch = [&](const std::shared_ptr<LiftedCurve>& l, const ChartPtr& factor, int which) {
    Branch b;
    b.chart = factor;
    b.parameters = {branch_name(which, 0, 1)};
    b.ranges = {ranges.at(0)};
    auto idx = factor_indices(*l->fiber().parametrization.target(), *factor);
    b.point = [l, idx](const std::vector<double>& t) {
      auto m = l->point(t);
      std::vector<double> out;
      for (std::size_t i : idx) out.push_back(m[i]);
      return out;
    };
    if (auto sym = l->symbolic()) {
      Substitution s;
      s.variables[l->system().parameters[0]] = var(b.parameters[0]);
      std::vector<Expr> comps;
      for (std::size_t i : idx) comps.push_back(simplify(substitute((*sym)[i], s)));
      b.symbolic = std::move(comps);
    }
    return b;
  };
  std::string method = l1->method() == "quadrature" && l2->method() == "quadrature" ? "quadrature" : "rk45";
  SolutionSurface s = compose_solution(make_branch(l1, rep.m1(), 1), make_branch(l2, rep.m2(), 2), p.rep, method,
                                       "second-method");
  s.refusal = !l1->refusal().empty() ? l1->refusal() : l2->refusal();
  return s;
}

// ---------------------------------------------------------------------------
// Verification

void set_worker_threads(std::size_t n) { worker_limit = n; }

SurfaceGrid sample_grid(const SolutionSurface& s, int n1, int n2) {
  SurfaceGrid g;
  g.t1 = tensor_grid(s.branch1().ranges, n1);
  g.t2 = tensor_grid(s.branch2().ranges, n2);
  if (s.branch1().point && s.branch2().point) {
    parallel_for(g.t1.size(), [&](std::size_t i) { s.sigma1(g.t1[i]); });
    parallel_for(g.t2.size(), [&](std::size_t i) { s.sigma2(g.t2[i]); });
  }
  g.values.resize(g.t1.size() * g.t2.size());
  parallel_for(g.values.size(), [&](std::size_t k) {
    g.values[k] = s.at(g.t1[k / g.t2.size()], g.t2[k % g.t2.size()]);
  });
  return g;
}

namespace {

struct DerivativeSymbol {
  SymbolId id;
  int dx = 0, dy = 0;
};

std::vector<DerivativeSymbol> derivative_symbols(const ScalarPDE& pde, const Chart& chart) {
  std::vector<DerivativeSymbol> out;
  std::string prefix = pde.dependent + "_";
  for (SymbolId v : free_variables(pde.residual)) {
    if (chart.has(v)) continue;
    const std::string& n = symbol_name(v);
    if (n.rfind(prefix, 0) != 0) throw InputError("PDE residual uses unknown symbol " + n);
    DerivativeSymbol d{v};
    for (char c : n.substr(prefix.size())) {
      if (std::string(1, c) == pde.independents.at(0)) ++d.dx;
      else if (std::string(1, c) == pde.independents.at(1)) ++d.dy;
      else throw InputError("PDE residual uses unknown symbol " + n);
    }
    if (d.dx + d.dy == 0 || d.dx + d.dy > 2) throw InputError("unsupported derivative " + n);
    out.push_back(d);
  }
  return out;
}

/// Base point of the surface whose (x, y) equal `target`, by chord Newton from `t`.
std::vector<double> invert(const SolutionSurface& s, std::vector<double> t, const Eigen::Matrix2d& jinv,
                           std::size_t ix, std::size_t iy, const Eigen::Vector2d& target) {
  std::vector<double> best;
  double best_r = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < 40 && stalled < 3; ++it) {
    auto m = s.at({t[0]}, {t[1]});
    Eigen::Vector2d r(m[ix] - target(0), m[iy] - target(1));
    if (r.norm() < best_r) {
      best_r = r.norm();
      best = m;
      stalled = 0;
    } else {
      ++stalled;
    }
    if (best_r == 0.0) break;
    Eigen::Vector2d dt = jinv * r;
    t[0] -= dt(0);
    t[1] -= dt(1);
  }
  return best;
}

}  // namespace

SolutionReport verify_solution(const SolutionSurface& s, const CauchyProblem& p, const VerifyOptions& o) {
  SolutionReport rep;
  rep.method = s.method();
  rep.route = s.route();
  rep.fd_step = o.fd_step;
  const Chart& chart = *s.chart();
  const auto& coords = chart.coords();
  SurfaceGrid grid = sample_grid(s, o.n1, o.n2);
  rep.grid_points = static_cast<int>(grid.values.size());
  std::size_t n2 = grid.t2.size();
  std::size_t d1 = s.branch1().dim(), d2 = s.branch2().dim();
  const double h = o.fd_step;

  // (a) pullbacks by fourth-order central differences in each parameter.
  const auto& gens = p.system.generators();
  for (const auto& g : gens) rep.generators.push_back(to_string(g));
  std::vector<std::vector<double>> worst(grid.values.size(), std::vector<double>(gens.size(), 0.0));
  parallel_for(grid.values.size(), [&](std::size_t k) {
    const auto& t1 = grid.t1[k / n2];
    const auto& t2 = grid.t2[k % n2];
    const auto& m0 = grid.values[k];
    std::vector<std::vector<double>> coeffs;
    for (const auto& g : gens) coeffs.push_back(eval_all(g.components(), p.functions, coords, m0));
    for (std::size_t a = 0; a < d1 + d2; ++a) {
      auto shifted = [&](double dt) {
        auto u1 = t1;
        auto u2 = t2;
        if (a < d1) u1[a] += dt;
        else u2[a - d1] += dt;
        return s.at(u1, u2);
      };
      auto p2 = shifted(2 * h), p1 = shifted(h), m1 = shifted(-h), m2 = shifted(-2 * h);
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        double sum = 0.0;
        for (std::size_t c = 0; c < coords.size(); ++c) {
          double d = (-p2[c] + 8 * p1[c] - 8 * m1[c] + m2[c]) / (12 * h);
          sum += coeffs[gi][c] * d;
        }
        worst[k][gi] = std::max(worst[k][gi], std::abs(sum));
      }
    }
  });
  rep.pullback.assign(gens.size(), 0.0);
  for (const auto& w : worst) {
    for (std::size_t gi = 0; gi < gens.size(); ++gi) rep.pullback[gi] = std::max(rep.pullback[gi], w[gi]);
  }
  for (double v : rep.pullback) rep.pullback_max = std::max(rep.pullback_max, v);

  // (b) reproduction of the data.
  auto ranges = p.parameter_ranges();
  const auto& dparams = p.data.source()->coords();
  if (d1 == 1 && d2 == 1 && dparams.size() == 1) {
    double m = 0.0;
    for (double t : linspace(ranges[0].first, ranges[0].second, o.n1)) {
      auto sv = s.at(t, t);
      auto gv = eval_all(p.data.components(), p.functions, dparams, {t});
      for (std::size_t c = 0; c < sv.size(); ++c) m = std::max(m, std::abs(sv[c] - gv[c]));
    }
    rep.diagonal = m;
  } else if (s.lift) {
    double m = 0.0;
    for (const auto& params : tensor_grid(ranges, std::min(o.n1, 9))) {
      auto lp = s.lift(params);
      auto sv = eval_all(s.rep().q().components(), empty_binding(), s.rep().product()->coords(), lp);
      auto gv = eval_all(p.data.components(), p.functions, dparams, params);
      for (std::size_t c = 0; c < sv.size(); ++c) m = std::max(m, std::abs(sv[c] - gv[c]));
    }
    rep.diagonal = m;
  }

  // (c) finite-difference residual of the attached PDE on the image grid.
  if (p.pde && d1 == 1 && d2 == 1) {
    const ScalarPDE& pde = *p.pde;
    auto dsyms = derivative_symbols(pde, chart);
    std::size_t ix = chart.index(pde.independents.at(0));
    std::size_t iy = chart.index(pde.independents.at(1));
    std::size_t iu = chart.index(pde.dependent);
    std::vector<double> res(grid.values.size(), 0.0);
    parallel_for(grid.values.size(), [&](std::size_t k) {
      std::vector<double> t = {grid.t1[k / n2][0], grid.t2[k % n2][0]};
      const auto& m0 = grid.values[k];
      const double jh = 1e-5;
      Eigen::Matrix2d j;
      for (int c = 0; c < 2; ++c) {
        auto tp = t, tm = t;
        tp[c] += jh;
        tm[c] -= jh;
        auto mp = s.at({tp[0]}, {tp[1]});
        auto mm = s.at({tm[0]}, {tm[1]});
        j(0, c) = (mp[ix] - mm[ix]) / (2 * jh);
        j(1, c) = (mp[iy] - mm[iy]) / (2 * jh);
      }
      Eigen::Matrix2d jinv = j.inverse();
      Eigen::Vector2d x0(m0[ix], m0[iy]);
      auto u = [&](double dx, double dy) {
        Eigen::Vector2d target = x0 + Eigen::Vector2d(dx, dy);
        Eigen::Vector2d dt = jinv * Eigen::Vector2d(dx, dy);
        return invert(s, {t[0] + dt(0), t[1] + dt(1)}, jinv, ix, iy, target)[iu];
      };
      std::vector<SymbolId> names = coords;
      std::vector<double> vals = m0;
      for (const auto& d : dsyms) {
        double v = 0.0;
        if (d.dx == 1 && d.dy == 1) v = (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4 * h * h);
        else if (d.dx == 2) v = (u(h, 0) - 2 * m0[iu] + u(-h, 0)) / (h * h);
        else if (d.dy == 2) v = (u(0, h) - 2 * m0[iu] + u(0, -h)) / (h * h);
        else if (d.dx == 1) v = (u(h, 0) - u(-h, 0)) / (2 * h);
        else v = (u(0, h) - u(0, -h)) / (2 * h);
        names.push_back(d.id);
        vals.push_back(v);
      }
      Evaluator ev(p.functions);
      res[k] = std::abs(ev(pde.residual, names, vals));
    });
    rep.pde = *std::max_element(res.begin(), res.end());
  }

  // (d) domain constraints at the grid points.
  for (const auto& m : grid.values) {
    Binding b = p.functions;
    bool finite = true;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      b.variables[coords[c]] = m[c];
      finite = finite && std::isfinite(m[c]);
    }
    if (!finite || !chart.admissible(b)) ++rep.domain_violations;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Interpolated surfaces

namespace {

/// Lagrange weights on up to eight nodes of a sorted axis nearest to t.
std::vector<std::pair<std::size_t, double>> lagrange(const std::vector<double>& axis, double t) {
  std::size_t n = axis.size();
  std::size_t m = std::min<std::size_t>(8, n);
  std::size_t pos = static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), t) - axis.begin());
  std::size_t start = pos >= m / 2 ? pos - m / 2 : 0;
  start = std::min(start, n - m);
  std::vector<std::pair<std::size_t, double>> w;
  for (std::size_t i = start; i < start + m; ++i) {
    double l = 1.0;
    for (std::size_t j = start; j < start + m; ++j) {
      if (j != i) l *= (t - axis[j]) / (axis[i] - axis[j]);
    }
    w.emplace_back(i, l);
  }
  return w;
}

}  // namespace

SolutionSurface surface_from_grid(const SurfaceGrid& grid, std::shared_ptr<const QuotientRepresentation> rep,
                                  const std::vector<std::string>& parameter_names, std::size_t dim1) {
  std::size_t dims = parameter_names.size();
  if (grid.t1.empty() || grid.t2.empty()) throw InputError("empty solution grid");
  if (grid.t1[0].size() != dim1 || grid.t1[0].size() + grid.t2[0].size() != dims) {
    throw InputError("grid parameters do not match the parameter names");
  }
  // Axis values per parameter.
  std::vector<std::vector<double>> axes(dims);
  auto collect = [&](const std::vector<std::vector<double>>& pts, std::size_t offset) {
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < p.size(); ++i) axes[offset + i].push_back(p[i]);
    }
  };
  collect(grid.t1, 0);
  collect(grid.t2, dim1);
  std::size_t total = 1;
  for (auto& a : axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    total *= a.size();
  }
  if (total != grid.values.size()) throw InputError("solution grid is not a full tensor grid");

  Branch b1, b2;
  b1.chart = rep->m1();
  b2.chart = rep->m2();
  for (std::size_t i = 0; i < dims; ++i) {
    Branch& b = i < dim1 ? b1 : b2;
    b.parameters.push_back(parameter_names[i]);
    b.ranges.emplace_back(axes[i].front(), axes[i].back());
  }
  SolutionSurface s(rep, b1, b2, "grid", "grid");
  auto values = std::make_shared<std::vector<std::vector<double>>>(grid.values);
  s.direct_ = [axes, values, dim1](const std::vector<double>& t1, const std::vector<double>& t2) {
    std::vector<double> t = t1;
    t.insert(t.end(), t2.begin(), t2.end());
    std::vector<std::vector<std::pair<std::size_t, double>>> w;
    for (std::size_t i = 0; i < axes.size(); ++i) w.push_back(lagrange(axes[i], t.at(i)));
    std::size_t width = values->front().size();
    std::vector<double> out(width, 0.0);
    std::vector<std::size_t> at(axes.size(), 0);
    while (true) {
      std::size_t flat = 0;
      double weight = 1.0;
      for (std::size_t i = 0; i < axes.size(); ++i) {
        flat = flat * axes[i].size() + w[i][at[i]].first;
        weight *= w[i][at[i]].second;
      }
      const auto& v = (*values)[flat];
      for (std::size_t c = 0; c < width; ++c) out[c] += weight * v[c];
      std::size_t i = axes.size();
      while (i > 0) {
        --i;
        if (++at[i] < w[i].size()) break;
        at[i] = 0;
        if (i == 0) return out;
      }
    }
    (void)dim1;
  };
  return s;
}

}  // namespace darboux
