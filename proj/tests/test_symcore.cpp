#include <cmath>
#include <random>

#include "darboux/error.hpp"
#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/evaluate.hpp"
#include "darboux/symcore/parse.hpp"
#include "darboux/symcore/probe.hpp"
#include "darboux/symcore/quadrature.hpp"
#include "darboux/symcore/simplify.hpp"
#include "doctest.h"

using namespace darboux;

namespace {

double at(const Expr& e, std::initializer_list<std::pair<const char*, double>> values) {
  Binding b;
  for (const auto& [k, v] : values) b.set(k, v);
  return evaluate(e, b);
}

}  // namespace

TEST_CASE("numbers stay exact until they overflow") {
  Number a = Number::rational(6, -4);
  CHECK(a.numerator() == -3);
  CHECK(a.denominator() == 2);
  CHECK((a + Number::rational(3, 2)).is_zero());
  CHECK((a * a).to_string() == "9/4");
  Number big = Number(std::int64_t{1} << 62) * Number(8);
  CHECK_FALSE(big.is_exact());
  CHECK(Number(0.5).to_string() == "0.5");
  CHECK(Number(2.0).to_string() == "2.0");
}

TEST_CASE("parse builds the expected node kinds") {
  Expr e = parse("u_x*u_y/(u-x)");
  REQUIRE(e.kind() == NodeKind::Mul);
  CHECK(e.operands().size() == 3);
  CHECK(e.operands()[2].kind() == NodeKind::Pow);
  CHECK(e.operands()[2].base().kind() == NodeKind::Add);

  Expr g = parse("exp(int(0,x,G(t),t))");
  REQUIRE(g.kind() == NodeKind::Function);
  CHECK(g.builtin() == Builtin::Exp);
  CHECK(g.operands()[0].kind() == NodeKind::Integral);
  CHECK(symbol_name(g.operands()[0].symbol()) == "t");
}

TEST_CASE("parse precedence") {
  CHECK(at(parse("-x^2"), {{"x", 3}}) == doctest::Approx(-9));
  CHECK(at(parse("2^3^2"), {}) == doctest::Approx(512));
  CHECK(at(parse("2^-1"), {}) == doctest::Approx(0.5));
  CHECK(at(parse("1 - 2*3 + 4/2"), {}) == doctest::Approx(-3));
  CHECK(at(parse("-2*x - -x"), {{"x", 5}}) == doctest::Approx(-5));
  CHECK(parse("0.5").number().is_exact() == false);
  CHECK(parse("3").number().is_exact());
}

TEST_CASE("parse errors carry positions") {
  try {
    parse("x + * y");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.position() == 4);
  }
  CHECK_THROWS_AS(parse("d(u)"), ParseError);
  CHECK_THROWS_AS(parse("d(x) /\\ d(y)"), ParseError);
  CHECK_THROWS_AS(parse("(x"), ParseError);
  ParseOptions strict;
  strict.strict = true;
  strict.variables = {"x"};
  CHECK_NOTHROW(parse("x + int(0, x, t, t)", strict));
  CHECK_THROWS_AS(parse("x + y", strict), ParseError);
  CHECK_THROWS_AS(parse("f(x)", strict), ParseError);
  CHECK_NOTHROW(parse("x + y"));
}

TEST_CASE("printing is stable under re-parsing") {
  const char* cases[] = {"u_x*u_y/(u - x)",
                         "x - (v + w)/v_x",
                         "-x*y + 3/4*z^2 - 1/(a + b)^2",
                         "exp(int(0, x, G(t), t))",
                         "f'(x^2)*2*x",
                         "f'''(x) + g'[1,2](x, y) - h'[4](z)",
                         "(-2)^x + x^(1/2) + x^-3 + (x*y)^(a + b)",
                         "0.1*sin(x) + 1.0e-20*cos(y) - 2.5",
                         "-(a + b)*c/d/e^2"};
  for (const char* text : cases) {
    std::string once = to_string(parse(text));
    CAPTURE(text);
    CHECK(to_string(parse(once)) == once);
  }
}

TEST_CASE("differentiate: rules and fundamental theorem") {
  SymbolId x = intern("x");
  CHECK(is_zero(differentiate(parse("x^2"), x) - parse("2*x")));
  CHECK(differentiate(parse("f(x^2)"), x) == parse("f'(x^2)*2*x"));
  CHECK(is_zero(differentiate(parse("int(0, x, G(t), t)"), x) - parse("G(x)")));
  CHECK(differentiate(parse("7"), x).is_zero());
  CHECK(is_zero(differentiate(parse("int(x, x^2, x*t, t)"), x) - parse("x^3*2*x - x^2 + int(x, x^2, t, t)")));
  CHECK(differentiate(parse("g'[0,1](x, y)"), x) == parse("g'[1,1](x, y)"));
}

TEST_CASE("derivatives agree with central differences to second order") {
  std::mt19937_64 rng(7);
  const char* cases[] = {"x^3*exp(y) - sin(x*y)", "log(1 + x^2)*cos(y)/(2 + sin(x))", "sqrt(3 + x^2 + y^2)",
                         "int(0, x, exp(y*t)*t, t)", "(2 + x)^(y + 1/2)"};
  for (const char* text : cases) {
    Expr e = parse(text);
    Expr d = differentiate(e, intern("x"));
    for (int probe = 0; probe < 10; ++probe) {
      double x0 = random_rational(rng, 0.1, 1.0);
      double y0 = random_rational(rng, -1.0, 1.0);
      double exact = at(d, {{"x", x0}, {"y", y0}});
      double prev_err = 0.0;
      for (double h : {1e-2, 1e-3}) {
        double fd = (at(e, {{"x", x0 + h}, {"y", y0}}) - at(e, {{"x", x0 - h}, {"y", y0}})) / (2 * h);
        double err = std::fabs(fd - exact);
        CAPTURE(text);
        CHECK(err <= 10.0 * h * h * (1 + std::fabs(exact)));
        if (h < 1e-2 && prev_err > 1e-9) CHECK(err < prev_err);
        prev_err = err;
      }
    }
  }
}

TEST_CASE("substitute: simultaneous, capture-free, function lambdas") {
  Expr pde = parse("u_x*u_y/(u - x)");
  Substitution s;
  s.set("u", parse("x - (v + w)/v_x"));
  Expr out = substitute(pde, s);
  for (SymbolId v : free_variables(out)) CHECK(symbol_name(v) != "u");
  CHECK(is_zero(out - parse("u_x*u_y/(-(v + w)/v_x)")));

  Substitution id;
  id.set("x", parse("x")).set("y", parse("y"));
  Expr g = parse("exp(int(0, x, f(t)*y, t))");
  CHECK(substitute(g, id) == g);

  Substitution swap;
  swap.set("x", parse("y")).set("y", parse("x"));
  CHECK(substitute(parse("x - 2*y"), swap) == parse("y - 2*x"));

  Substitution fsub;
  fsub.set_function("f", lambda({"x"}, parse("x + 1")));
  CHECK(is_zero(substitute(parse("g(x)/(x - f(x))"), fsub) - parse("-g(x)")));
  CHECK(is_zero(substitute(parse("f'(z^2)"), fsub) - 1));

  // t is free in the replacement, so the dummy must be renamed.
  Substitution cap;
  cap.set("y", parse("t"));
  Expr captured = substitute(parse("int(0, 1, y*t, t)"), cap);
  Binding b;
  b.set("t", 3.0);
  CHECK(evaluate(captured, b) == doctest::Approx(1.5));
}

TEST_CASE("simplify examples") {
  CHECK(simplify(parse("(v+w)/v_x - (v+w)/v_x")).is_zero());
  CHECK(simplify(parse("exp(int(x, y, G(t), t))*exp(-int(x, y, G(t), t))")).is_one());
  Expr lhs = simplify(parse("1 - (v_x*v_x - (v+w)*v_xx)/v_x^2"));
  CHECK(lhs == simplify(parse("(v+w)*v_xx/v_x^2")));
  CHECK(simplify(parse("(x^2 - 1)/(x - 1)")) == simplify(parse("x + 1")));
  CHECK(simplify(parse("1/(x - u) + 1/(u - x)")).is_zero());
  CHECK(simplify(parse("log(exp(x + y))")) == simplify(parse("y + x")));
  CHECK(simplify(parse("exp(2*log(x) + y)")) == simplify(parse("x^2*exp(y)")));
  CHECK(simplify(parse("int(0, x, 3*t^2, t)")) == simplify(parse("x^3")));
  CHECK(simplify(parse("int(0, x, exp(-s), s)")) == simplify(parse("1 - exp(-x)")));
  CHECK(simplify(parse("int(a, b, f'(t), t)")) == simplify(parse("f(b) - f(a)")));
  CHECK(is_zero(parse("int(0, 1, 1/(2*t + 1), t)") - parse("log(3)/2")));
  CHECK(simplify(parse("sqrt(x)^2")) == parse("x"));
  CHECK(simplify(parse("2.0*0.25")).number().value() == doctest::Approx(0.5));
}

TEST_CASE("adjacent integrals merge") {
  CHECK(simplify(parse("int(0, y, k(x + s), s)")) == simplify(parse("int(x, x + y, k(s), s)")));
  CHECK(simplify(parse("int(0, x, k(s), s) + int(x, x + y, k(r), r)")) == simplify(parse("int(0, x + y, k(s), s)")));
  CHECK(simplify(parse("int(0, z, k(s), s) - int(0, x + y, k(s), s)")) == simplify(parse("int(x + y, z, k(s), s)")));
  CHECK(simplify(parse("int(a, z, k(s), s) - int(b, z, k(s), s)")) == simplify(parse("int(a, b, k(s), s)")));
  CHECK(simplify(parse("2*u*int(0, x, k(s), s) + 2*u*int(x, y, k(s), s)")) == simplify(parse("2*u*int(0, y, k(s), s)")));
  CHECK(simplify(parse("int(0, x, k(s), s) - int(x, 0, k(s), s)")) != simplify(parse("0")));
  Expr v = parse("a(x, 0) - a(0, 0) - int(0, x, k(s), s) + int(0, y, a'[0,1](x, s) - k(x + s), s)");
  CHECK(simplify(v) == simplify(parse("a(x, y) - a(0, 0) - int(0, x + y, k(s), s)")));
  Expr s = simplify(v);
  CHECK(simplify(s) == s);
}

TEST_CASE("simplify is idempotent and value preserving") {
  const char* cases[] = {"(x + y)^3/(x - y)^2 - x/(x - y)",
                         "exp(x)*exp(-y)/(1 + exp(x - y))",
                         "f(x)*g'(y)/(x - f(x)) + int(0, x, G(t)*exp(2*t), t)*x",
                         "1/(u - x)^2 - (u_x + 1)/(u - x) + u_x^2*(u - x)^-3",
                         "sqrt(x^2 + 1)*(x^2 + 1)^(3/2)",
                         "log(2*w_y*v_x/(v + w)^2)",
                         "int(x, y, exp(int(0, s, k(r), r)), s)*3 - int(x, y, exp(int(0, s, k(r), r)), s)",
                         "sin(x)^2 + cos(x)^2 - 1"};
  std::mt19937_64 rng(11);
  for (const char* text : cases) {
    CAPTURE(text);
    Expr e = parse(text);
    Expr s = simplify(e);
    CHECK(simplify(s) == s);
    Binding b;
    b.bind_text("f", {"x"}, "x/3 + 2");
    b.bind_text("g", {"x"}, "sin(x)");
    b.bind_text("G", {"x"}, "cos(x)");
    b.bind_text("k", {"x"}, "x^2 - 1");
    for (int i = 0; i < 20; ++i) {
      for (const char* v : {"x", "y", "u", "u_x", "v", "w", "w_y", "v_x"}) b.set(v, random_rational(rng, 0.2, 1.7));
      b.set("u", b.variables[intern("x")] + random_rational(rng, 0.5, 1.5));
      b.set("y", b.variables[intern("x")] + random_rational(rng, 0.2, 1.0));
      double a = evaluate(e, b);
      double c = evaluate(s, b);
      CHECK(std::fabs(a - c) <= 1e-10 * (1 + std::fabs(a)));
    }
  }
}

TEST_CASE("evaluate: quadrature, builtins, errors") {
  CHECK(evaluate(parse("int(0, 1, x, x)"), Binding{}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(evaluate(parse("exp(0)"), Binding{}) == 1.0);
  CHECK_THROWS_AS(evaluate(parse("x + 1"), Binding{}), EvalError);
  CHECK_THROWS_AS(evaluate(parse("f(1)"), Binding{}), EvalError);
  try {
    evaluate(parse("1 + log(x - 2)"), Binding().set("x", 1.0));
    FAIL("expected a domain error");
  } catch (const EvalError& err) {
    CHECK(std::string(err.what()).find("log(x - 2)") != std::string::npos);
  }
  Binding b;
  b.set("x", 0.8).set("y", -0.4);
  b.bind("f", 1, [](std::span<const double> a) { return std::sin(a[0]); });
  CHECK(evaluate(parse("f'(x)"), b) == doctest::Approx(std::cos(0.8)).epsilon(1e-10));
  CHECK(evaluate(parse("f''(x)"), b) == doctest::Approx(-std::sin(0.8)).epsilon(1e-8));
  CHECK(evaluate(parse("f'''(x)"), b) == doctest::Approx(-std::cos(0.8)).epsilon(1e-6));
  b.bind("g", 2, [](std::span<const double> a) { return std::exp(a[0] * a[1]); });
  CHECK(evaluate(parse("g'[1,1](x, y)"), b) == doctest::Approx((1 + 0.8 * -0.4) * std::exp(-0.32)).epsilon(1e-7));
  CHECK(evaluate(parse("int(0, x, int(0, s, exp(r), r), s)"), b) == doctest::Approx(std::exp(0.8) - 1 - 0.8).epsilon(1e-12));
}

TEST_CASE("closed-form oracle: d'Alembert-type formula with G = -1 collapses") {
  // u = x - (v + w)/v_x with v, w from iterated integrals; f = x+1, g = 1 gives G = g/(x - f) = -1.
  Binding b;
  b.bind_text("G", {"x"}, "-1");
  Expr vx = parse("exp(int(0, x, G(t), t))");
  Expr v = parse("int(0, x, exp(int(0, s, G(t), t)), s)");
  b.set("x", 0.3);
  CHECK(evaluate(vx, b) == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
  CHECK(evaluate(v, b) == doctest::Approx(1 - std::exp(-0.3)).epsilon(1e-12));
}

TEST_CASE("quadrature tolerance behaviour") {
  auto f = [](double x) { return std::exp(std::sin(3 * x)) * std::cos(x); };
  // Reference by a 10^6-point composite Simpson rule.
  const int n = 1000000;
  double h = 2.0 / n;
  double ref = f(0) + f(2);
  for (int i = 1; i < n; ++i) ref += f(i * h) * (i % 2 ? 4 : 2);
  ref *= h / 3;
  double prev = 1.0;
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    QuadratureOptions opt;
    opt.abs_tol = tol;
    double err = std::fabs(integrate_gk15(f, 0, 2, opt).value - ref);
    CHECK(err <= tol + 1e-13);
    CHECK(err <= prev + 1e-13);
    prev = err;
  }
  QuadratureOptions shallow;
  shallow.max_depth = 2;
  shallow.abs_tol = 1e-14;
  CHECK_THROWS_AS(integrate_gk15([](double x) { return std::sqrt(x); }, 0, 1, shallow), QuadratureError);
  CHECK(integrate_gk15([](double x) { return x; }, 1, 0).value == doctest::Approx(-0.5));
}

TEST_CASE("zero test uses probing for non-rational identities") {
  CHECK(is_zero(parse("sin(x)^2 + cos(x)^2 - 1")));
  CHECK_FALSE(is_zero(parse("sin(x)^2 + cos(x)^2 - 1.0001")));
  CHECK(is_zero(parse("f(x)*g(y) - g(y)*f(x)")));
  CHECK_FALSE(is_zero(parse("f(x) - f(y)")));
}
