#include "doctest.h"
#include "support.hpp"

#include <cmath>

#include "darboux/error.hpp"
#include "darboux/lietype/lie.hpp"
#include "darboux/quotient/quotient.hpp"

using namespace darboux;
using testing_support::P;

namespace {

std::vector<DifferentialForm> forms(const ChartPtr& c, std::initializer_list<const char*> texts) {
  std::vector<DifferentialForm> out;
  for (const char* t : texts) out.push_back(parse_form(t, c));
  return out;
}

struct Example1 {
  ChartPtr product;
  PfaffianSystem k;
  SmoothMap q;
};

Example1 example1() {
  auto m1 = make_chart("M1", {"y", "w", "w_y", "w_yy"});
  auto m2 = make_chart("M2", {"x", "v", "v_x", "v_xx", "v_xxx"}, {{Constraint::Kind::Positive, P("v_x")}});
  auto base = make_chart("M", {"x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"});
  PfaffianSystem k1(m1, forms(m1, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"}));
  PfaffianSystem k2(m2, forms(m2, {"d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"}));
  auto product = Chart::product(*m1, *m2);
  std::vector<Expr> q = {P("x"), P("y"), P("x - (v + w)/v_x"), P("(v + w)*v_xx/v_x^2"), P("-w_y/v_x"),
                         P("v_xx/v_x + (v + w)*v_xxx/v_x^2 - 2*(v + w)*v_xx^2/v_x^3"), P("-w_yy/v_x")};
  return {product, sum_system(k1, k2, product), SmoothMap(product, base, q)};
}

// Cauchy data u(x, x) = f(x), u_x(x, x) = g(x) for u_xy = u_x u_y/(u - x).
ParamCurve example1_data(const ChartPtr& base, const std::string& f, const std::string& g) {
  Expr F = parse(f), Gx = parse(g);
  Expr F1 = differentiate(F, "x"), F2 = differentiate(F1, "x"), G1 = differentiate(Gx, "x");
  Expr X = var("x");
  Expr mixed = Gx * (F1 - Gx) / (F - X);
  return ParamCurve(base, intern("x"), {X, X, F, Gx, F1 - Gx, G1 - mixed, F2 - G1 - mixed});
}

Binding generic_data() {
  Binding b;
  b.bind_text("f", {"x"}, "x + 1 + 0.1*sin(x)");
  b.bind_text("g", {"x"}, "cos(x)");
  return b;
}

LieODE example2_ode() {
  LieODE ode;
  ode.parameter = intern("e");
  ode.state = {intern("w"), intern("v"), intern("v_t")};
  ode.rhs = {P("f'(e)^2*h'(e)/4"), P("v_t*h'(e)"), P("f'(e)*h'(e)/2")};
  return ode;
}

double max_gap(const CurveSolution& a, const CurveSolution& b, double lo, double hi, const Binding& data, int n = 20) {
  double m = 0.0;
  for (double t : linspace(lo, hi, n)) {
    auto x = a.value(t, data);
    auto y = b.value(t, data);
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("fiber restriction of the first example") {
  Example1 ex = example1();
  ParamCurve gamma = example1_data(ex.q.target(), "f(x)", "g(x)");
  FiberRestriction fr = restrict_to_fiber(ex.k, ex.q, curve_map(gamma), {"v", "v_x"});
  CHECK(fr.chart->coord_names() == std::vector<std::string>{"x", "v", "v_x"});
  CHECK(fr.consistency_residual <= 1e-9);

  SUBCASE("parametrization") {
    const auto& pc = fr.parametrization.components();
    CHECK(pc[0] == P("x"));
    CHECK(simplify(pc[1] - P("(x - f(x))*v_x - v")).is_zero());
    CHECK(simplify(pc[2] - P("(g(x) - f'(x))*v_x")).is_zero());
    CHECK(simplify(pc[7] - P("g(x)/(x - f(x))*v_x")).is_zero());
  }
  SUBCASE("restricted forms") {
    PfaffianSystem restricted(fr.chart, fr.forms);
    PfaffianSystem expected(fr.chart, forms(fr.chart, {"d(v) - v_x*d(x)", "d(v_x) - g(x)/(x - f(x))*v_x*d(x)"}));
    CHECK(restricted.rank() == 2);
    CHECK(restricted.same_span(expected));
  }
  SUBCASE("ODE and ordering") {
    LieODE ode = as_ode(fr);
    CHECK(ode.parameter == intern("x"));
    CHECK(simplify(ode.rhs[0] - P("v_x")).is_zero());
    CHECK(simplify(ode.rhs[1] - P("g(x)*v_x/(x - f(x))")).is_zero());
    Triangularization tri = triangularize(ode);
    REQUIRE(tri.ok);
    CHECK(tri.order == std::vector<std::size_t>{1, 0});
  }
  SUBCASE("inconsistent parametrization") {
    std::vector<Expr> bad = fr.parametrization.components();
    bad[1] = bad[1] + Expr(1);
    CHECK_THROWS_AS(restrict_to_fiber(ex.k, ex.q, curve_map(gamma), {"v", "v_x"}, bad), Error);
  }
  SUBCASE("wrong fiber dimension") {
    CHECK_THROWS_AS(restrict_to_fiber(ex.k, ex.q, curve_map(gamma), {"v", "v_x", "v_xx"}), Error);
  }
}

TEST_CASE("closed case of the first example") {
  Example1 ex = example1();
  ParamCurve gamma = example1_data(ex.q.target(), "x + 1", "1");
  FiberRestriction fr = restrict_to_fiber(ex.k, ex.q, curve_map(gamma), {"v", "v_x"});
  LieODE ode = as_ode(fr);
  CurveSolution quad = integrate_quadrature(ode, {Expr(0), Expr(1)}, Expr(0));
  CHECK(quad.kind() == CurveSolution::Kind::Symbolic);
  CHECK(quad.exprs()[1] == simplify(P("exp(-x)")));
  CHECK(quad.exprs()[0] == simplify(P("1 - exp(-x)")));

  Binding none;
  CurveSolution rk = integrate_rk(ode, {0.0, 1.0}, 0.0, 0.0, 1.0, RKConfig{}, none);
  CHECK(rk.kind() == CurveSolution::Kind::Sampled);
  CHECK(std::abs(rk.value(1.0, none)[1] - std::exp(-1.0)) < 1e-9);
  CHECK(max_gap(quad, rk, 0.0, 1.0, none) < 1e-7);
  CHECK(lie_residual(fr, quad, -0.5, 0.5, none) < 1e-9);
  CHECK(lie_residual(fr, rk, 0.0, 1.0, none) < 1e-7);
}

TEST_CASE("generic case: quadrature and Runge-Kutta agree") {
  Example1 ex = example1();
  ParamCurve gamma = example1_data(ex.q.target(), "f(x)", "g(x)");
  Binding data = generic_data();
  FiberOptions fo;
  fo.data = &data;
  FiberRestriction fr = restrict_to_fiber(ex.k, ex.q, curve_map(gamma), {"v", "v_x"}, fo);
  LieODE ode = as_ode(fr);
  CurveSolution quad = integrate_quadrature(ode, {Expr(0), Expr(1)}, Expr(0));
  CurveSolution rk = integrate_rk(ode, {0.0, 1.0}, 0.0, -0.5, 0.5, RKConfig{}, data);
  CHECK(max_gap(quad, rk, -0.5, 0.5, data) < 1e-7);
  CHECK(lie_residual(fr, quad, -0.5, 0.5, data) < 1e-7);
  CHECK(lie_residual(fr, rk, -0.5, 0.5, data) < 1e-7);

  // v_x = exp(∫₀ˣ G), v = ∫₀ˣ exp(∫₀ˢ G) with G = g/(x - f).
  Expr G = P("g(t)/(t - f(t))");
  Expr vx = exp(integral(Expr(0), var("x"), G, intern("t")));
  Expr v = integral(Expr(0), var("x"), exp(integral(Expr(0), var("s"), G, intern("t"))), intern("s"));
  for (double x : linspace(-0.5, 0.5, 7)) {
    Binding b = data;
    b.set("x", x);
    auto val = quad.value(x, data);
    CHECK(val[1] == doctest::Approx(evaluate(vx, b)).epsilon(1e-9));
    CHECK(val[0] == doctest::Approx(evaluate(v, b)).epsilon(1e-9));
  }

  SUBCASE("uniqueness: different fiber points project to the same data") {
    CurveSolution other = integrate_rk(ode, {0.3, 2.0}, 0.0, -0.5, 0.5, RKConfig{}, data);
    CurveSolution again = integrate_rk(ode, {0.0, 1.0}, 0.0, -0.5, 0.5, RKConfig{}, data);
    CHECK(max_gap(rk, again, -0.5, 0.5, data) == 0.0);
    CHECK(max_gap(rk, other, -0.5, 0.5, data) > 0.1);
    SmoothMap qp = compose(ex.q, fr.parametrization);
    double worst = 0.0;
    for (double x : linspace(-0.5, 0.5, 11)) {
      auto s = other.value(x, data);
      Binding b = data;
      b.set("x", x).set("v", s[0]).set("v_x", s[1]);
      auto target = gamma.at(x, data);
      for (std::size_t i = 0; i < target.size(); ++i) worst = std::max(worst, std::abs(evaluate(qp[i], b) - target[i]));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("triangular ordering") {
  LieODE ode = example2_ode();
  Triangularization tri = triangularize(ode);
  REQUIRE(tri.ok);
  CHECK(tri.order == std::vector<std::size_t>{2, 1, 0});

  LieODE sq;
  sq.parameter = intern("t");
  sq.state = {intern("v")};
  sq.rhs = {P("v^2")};
  Triangularization bad = triangularize(sq);
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason.find("v") != std::string::npos);
  CHECK_THROWS_AS(integrate_quadrature(sq, {Expr(1)}, Expr(0)), Error);

  LieODE cyc;
  cyc.parameter = intern("t");
  cyc.state = {intern("a"), intern("b")};
  cyc.rhs = {P("b"), P("a")};
  CHECK_FALSE(triangularize(cyc).ok);

  LieODE aff;
  aff.parameter = intern("t");
  aff.state = {intern("a")};
  aff.rhs = {P("2*a + t")};
  CHECK(triangularize(aff).ok);
  CurveSolution s = integrate_quadrature(aff, {Expr(1)}, Expr(0));
  // a = (5 e^{2t} - 2t - 1)/4
  CHECK(is_zero(s.exprs()[0] - P("(5*exp(2*t) - 2*t - 1)/4")));
}

TEST_CASE("second example: quadrature against Runge-Kutta") {
  LieODE ode = example2_ode();
  Binding data;
  data.bind_text("f", {"e"}, "exp(e)");
  data.bind_text("h", {"e"}, "exp(-e) + e");
  CurveSolution quad = integrate_quadrature(ode, {Expr(0), Expr(0), Expr(0)}, Expr(0));
  // v_t(e) = ½∫₀^e h'f'
  Expr vt = integral(Expr(0), var("e"), P("h'(r)*f'(r)/2"), intern("r"));
  Binding b = data;
  b.set("e", 0.4);
  CHECK(quad.value(0.4, data)[2] == doctest::Approx(evaluate(vt, b)).epsilon(1e-10));
  CurveSolution rk = integrate_rk(ode, {0.0, 0.0, 0.0}, 0.0, 0.0, 0.5, RKConfig{}, data);
  CHECK(max_gap(quad, rk, 0.0, 0.5, data) < 1e-8);
  auto d = rk.derivative(0.25, data);
  b.set("e", 0.25);
  CHECK(d[1] == doctest::Approx(quad.value(0.25, data)[2] * evaluate(P("h'(e)"), b)).epsilon(1e-6));
}

TEST_CASE("Schwarzian reconstruction by Runge-Kutta") {
  LieODE ode;
  ode.parameter = intern("x");
  ode.state = {intern("v"), intern("v1"), intern("v2")};
  ode.rhs = {P("v1"), P("v2"), P("v1*(F(x) + 3/2*(v2/v1)^2)")};
  ode.domain = {{Constraint::Kind::Nonzero, P("v1")}};
  CHECK_FALSE(triangularize(ode).ok);
  Binding zero;
  zero.bind_text("F", {"x"}, "0");
  CurveSolution s = integrate_rk(ode, {0.0, 1.0, 0.0}, 0.0, 0.0, 1.0, RKConfig{}, zero);
  for (double x : linspace(0, 1, 11)) CHECK(std::abs(s.value(x, zero)[0] - x) < 1e-10);

  Binding half;
  half.bind_text("F", {"x"}, "-1/2");
  CurveSolution e = integrate_rk(ode, {1.0, 1.0, 1.0}, 0.0, -0.5, 0.8, RKConfig{}, half);
  for (double x : linspace(-0.5, 0.8, 11)) CHECK(std::abs(e.value(x, half)[0] - std::exp(x)) < 1e-8);
}

TEST_CASE("integration failures") {
  Binding none;
  LieODE down;
  down.parameter = intern("t");
  down.state = {intern("v")};
  down.rhs = {P("-1")};
  down.domain = {{Constraint::Kind::Positive, P("v")}};
  CHECK_THROWS_AS(integrate_rk(down, {0.5}, 0.0, 0.0, 1.0, RKConfig{}, none), DomainViolation);
  CHECK_NOTHROW(integrate_rk(down, {0.5}, 0.0, 0.0, 0.4, RKConfig{}, none));

  LieODE blow;
  blow.parameter = intern("t");
  blow.state = {intern("v")};
  blow.rhs = {P("v^2")};
  CHECK_THROWS_AS(integrate_rk(blow, {1.0}, 0.0, 0.0, 2.0, RKConfig{}, none), IntegrationError);

  CurveSolution ok = integrate_rk(blow, {1.0}, 0.0, -1.0, 0.5, RKConfig{}, none);
  CHECK(ok.value(-1.0, none)[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ok.value(0.5, none)[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(ok.value(0.6, none), EvalError);

  auto chart = make_chart("P", {"t", "a"});
  FiberRestriction only_dt{chart, {intern("t")}, {intern("a")}, SmoothMap::identity(chart), forms(chart, {"d(t)"}), 0.0};
  CHECK_THROWS_AS(as_ode(only_dt), CharacteristicError);
}

TEST_CASE("two-parameter Lie system") {
  auto chart = make_chart("P", {"x", "y", "v"});
  FiberRestriction fr{chart,
                      {intern("x"), intern("y")},
                      {intern("v")},
                      SmoothMap::identity(chart),
                      forms(chart, {"d(v) - (a'[1,0](x, y) - k(x + y))*d(x) - (a'[0,1](x, y) - k(x + y))*d(y)"}),
                      0.0};
  LieSystem sys = as_lie_system(fr);
  CHECK(sys.compatibility_residual < 1e-8);
  CHECK_THROWS_AS(as_ode(fr), Error);
  CurveSolution s = integrate_quadrature(sys, {P("a(0, 0)")}, {Expr(0), Expr(0)});
  CHECK(s.exprs()[0] == simplify(P("a(x, y) - int(0, x + y, k(s), s)")));

  Binding data;
  data.bind_text("a", {"x", "y"}, "x*y");
  data.bind_text("k", {"x"}, "1");
  CHECK(s.value(std::vector<double>{0.3, 0.2}, data)[0] == doctest::Approx(0.06 - 0.5).epsilon(1e-12));

  FiberRestriction twisted{chart, {intern("x"), intern("y")}, {intern("v")}, SmoothMap::identity(chart),
                           forms(chart, {"d(v) - y*d(x)"}), 0.0};
  CHECK_THROWS_AS(as_lie_system(twisted), Error);
}
