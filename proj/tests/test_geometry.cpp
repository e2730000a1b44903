#include <random>

#include "doctest.h"
#include "support.hpp"

#include "darboux/error.hpp"

using namespace darboux;
using testing_support::max_abs;
using testing_support::P;
using testing_support::same_form;

namespace {

ChartPtr xyu() { return make_chart("N", {"x", "y", "u"}); }

ChartPtr jet_chart() {
  return make_chart("M", {"x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"}, {{Constraint::Kind::Nonzero, P("u - x")}});
}

ChartPtr factor1() { return make_chart("M1", {"y", "w", "w_y", "w_yy"}, {{Constraint::Kind::Positive, P("w_y")}}); }
ChartPtr factor2() { return make_chart("M2", {"x", "v", "v_x", "v_xx", "v_xxx"}, {{Constraint::Kind::Positive, P("v_x")}}); }

SmoothMap example1_quotient(const ChartPtr& product, const ChartPtr& m) {
  return SmoothMap(product, m,
                   {P("x"), P("y"), P("x - (v + w)/v_x"), P("(v + w)*v_xx/v_x^2"), P("-w_y/v_x"),
                    P("v_xx/v_x + (v + w)*v_xxx/v_x^2 - 2*(v + w)*v_xx^2/v_x^3"), P("-w_yy/v_x")});
}

std::vector<DifferentialForm> forms(const ChartPtr& c, std::initializer_list<const char*> texts) {
  std::vector<DifferentialForm> out;
  for (const char* t : texts) out.push_back(parse_form(t, c));
  return out;
}

Expr random_poly(std::mt19937_64& rng, const std::vector<Expr>& vars, int degree) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
  Expr out(coef(rng));
  for (int t = 0; t < 4; ++t) {
    Expr mono(coef(rng));
    std::uniform_int_distribution<int> deg(1, degree);
    int d = deg(rng);
    for (int k = 0; k < d; ++k) mono = mono * vars[pick(rng)];
    out = out + mono;
  }
  return out;
}

}  // namespace

TEST_CASE("chart construction and lookup") {
  auto c = xyu();
  CHECK(c->dim() == 3);
  CHECK(c->index("u") == 2);
  CHECK_THROWS_AS(c->index("q"), ChartMismatch);
  CHECK_THROWS_AS(make_chart("bad", {"x", "x"}), ChartMismatch);
  auto prod = Chart::product(*factor1(), *factor2());
  CHECK(prod->dim() == 9);
  CHECK(prod->constraints().size() == 2);
  CHECK_THROWS_AS(Chart::product(*factor1(), *factor1()), ChartMismatch);
}

TEST_CASE("wedge product") {
  auto c = xyu();
  auto dx = parse_form("d(x)", c);
  auto dy = parse_form("d(y)", c);
  CHECK(wedge(dx, dx).is_zero());
  CHECK(same_form(wedge(dx, dy), -wedge(dy, dx)));
  auto lhs = wedge(parse_form("d(u) - u_x*d(x)", c), dx);
  CHECK(same_form(lhs, parse_form("d(u) /\\ d(x)", c)));
  CHECK(lhs.degree() == 2);
  auto other = make_chart("Q", {"p", "q"});
  CHECK_THROWS_AS(wedge(dx, parse_form("d(p)", other)), ChartMismatch);

  SUBCASE("graded anticommutativity") {
    auto c4 = make_chart("R4", {"a", "b", "c", "e"});
    auto one = parse_form("a*d(b) + c^2*d(e)", c4);
    auto two = parse_form("b*d(a) /\\ d(c) + d(b) /\\ d(e)", c4);
    CHECK(same_form(wedge(one, two), wedge(two, one)));
    CHECK(same_form(wedge(one, one), DifferentialForm(c4, 2)));
  }
}

TEST_CASE("exterior derivative") {
  auto m = jet_chart();
  auto theta = parse_form("d(u) - u_x*d(x) - u_y*d(y)", m);
  CHECK(same_form(exterior_derivative(theta), parse_form("-d(u_x) /\\ d(x) - d(u_y) /\\ d(y)", m)));
  auto m1 = factor1();
  CHECK(same_form(exterior_derivative(parse_form("d(w) - w_y*d(y)", m1)), parse_form("-d(w_y) /\\ d(y)", m1)));
  CHECK(exterior_derivative(parse_form("d(x)", m)).is_zero());

  SUBCASE("d of d vanishes on random polynomial forms") {
    auto c4 = make_chart("R4", {"a", "b", "c", "e"});
    std::vector<Expr> vars{var("a"), var("b"), var("c"), var("e")};
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      DifferentialForm f0 = DifferentialForm::scalar(c4, random_poly(rng, vars, 3));
      CHECK(exterior_derivative(exterior_derivative(f0)).simplified().is_zero());
      DifferentialForm f1(c4, 1);
      for (int i = 0; i < 4; ++i) f1.add_term({i}, random_poly(rng, vars, 3));
      CHECK(exterior_derivative(exterior_derivative(f1)).simplified().is_zero());
      DifferentialForm f2(c4, 2);
      f2.add_term({0, 2}, random_poly(rng, vars, 3));
      f2.add_term({1, 3}, random_poly(rng, vars, 3));
      CHECK(exterior_derivative(exterior_derivative(f2)).simplified().is_zero());
    }
  }

  SUBCASE("Leibniz rule") {
    auto c4 = make_chart("R4", {"a", "b", "c", "e"});
    auto p = parse_form("a*b*d(c) + sin(e)*d(a)", c4);
    auto q = parse_form("exp(a)*d(b) - c*d(e)", c4);
    auto lhs = exterior_derivative(wedge(p, q));
    auto rhs = wedge(exterior_derivative(p), q) - wedge(p, exterior_derivative(q));
    CHECK(same_form(lhs, rhs));
  }
}

TEST_CASE("form parsing") {
  auto m = jet_chart();
  auto theta = parse_form("d(u) - u_x*d(x) - u_y*d(y)", m);
  CHECK(theta.degree() == 1);
  CHECK(theta.terms().size() == 3);
  CHECK(parse_form("d(x) /\\ d(u_x)", m).degree() == 2);
  CHECK(parse_form("u_x/(u - x)", m).degree() == 0);
  CHECK_THROWS_AS(parse_form("d(x)*d(y)", m), ParseError);
  CHECK_THROWS_AS(parse_form("d(x) + x", m), ParseError);
  CHECK_THROWS_AS(parse("d(u)"), ParseError);
  CHECK_THROWS_AS(parse("x /\\ y"), ParseError);
  auto exact = parse_form("d(u_x/(u - x))", m);
  CHECK(same_form(exact, DifferentialForm::exact(m, P("u_x/(u - x)"))));
}

TEST_CASE("pullback") {
  auto m1 = factor1();
  auto m2 = factor2();
  auto prod = Chart::product(*m1, *m2);
  auto m = jet_chart();
  auto q = example1_quotient(prod, m);

  SUBCASE("identity") {
    auto theta = parse_form("d(u) - u_x*d(x) - u_y*d(y)", m);
    CHECK(same_form(pullback(SmoothMap::identity(m), theta), theta));
  }
  SUBCASE("du under the quotient map") {
    auto du = pullback(q, parse_form("d(u)", m));
    CHECK(same_form(du, DifferentialForm::exact(prod, P("x - (v + w)/v_x"))));
  }
  SUBCASE("commutes with d") {
    for (const char* text : {"d(u_x) - u_xx*d(x) - u_x*u_y/(u - x)*d(y)", "d(u_y) - u_x*u_y/(u - x)*d(x) - u_yy*d(y)",
                             "u_x*d(u_y) /\\ d(x)"}) {
      auto a = parse_form(text, m);
      CHECK(same_form(pullback(q, exterior_derivative(a)), exterior_derivative(pullback(q, a)), 1e-8));
    }
  }
  SUBCASE("commutes with wedge") {
    auto a = parse_form("u*d(x) + d(u_y)", m);
    auto b = parse_form("d(u) - u_x*d(y)", m);
    CHECK(same_form(pullback(q, wedge(a, b)), wedge(pullback(q, a), pullback(q, b)), 1e-8));
  }
  SUBCASE("functorial under composition") {
    auto r = make_chart("R", {"s", "t", "r"});
    SmoothMap psi(r, xyu(), {P("s*t"), P("s + r"), P("t^2")});
    auto target = make_chart("T", {"p", "q"});
    SmoothMap phi(xyu(), target, {P("x + y*u"), P("exp(x)*y")});
    auto a = parse_form("p*d(q) + q^2*d(p)", target);
    auto direct = pullback(compose(phi, psi), a);
    auto stepwise = pullback(psi, pullback(phi, a));
    CHECK(same_form(direct, stepwise, 1e-8));
  }
  SUBCASE("contact forms pull back into K1 + K2") {
    std::vector<DifferentialForm> k;
    for (const char* t : {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)", "d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"}) {
      k.push_back(parse_form(t, prod));
    }
    std::vector<DifferentialForm> pulled;
    for (const char* t : {"d(u) - u_x*d(x) - u_y*d(y)", "d(u_x) - u_xx*d(x) - u_x*u_y/(u - x)*d(y)",
                          "d(u_y) - u_x*u_y/(u - x)*d(x) - u_yy*d(y)"}) {
      pulled.push_back(pullback(q, parse_form(t, m)));
    }
    CHECK(span_contains(prod, k, pulled));
    auto wrong = pullback(q, parse_form("d(u) - u_x*d(y)", m));
    CHECK_FALSE(span_contains(prod, k, {wrong}));
  }
  SUBCASE("chart mismatch") {
    CHECK_THROWS_AS(pullback(q, parse_form("d(y)", m1)), ChartMismatch);
  }
}

TEST_CASE("Lie derivative") {
  auto m1 = factor1();
  auto k1 = parse_form("d(w) - w_y*d(y)", m1);
  auto dw = VectorField::coordinate(m1, m1->index("w"));
  CHECK(lie_derivative(dw, k1).simplified().is_zero());

  // Prolonged scaling w -> a w acts on (w, w_y, w_yy) alike.
  VectorField scale(m1, {Expr(0), P("w"), P("w_y"), P("w_yy")});
  CHECK(same_form(lie_derivative(scale, k1), k1));

  auto c4 = make_chart("R4", {"a", "b", "c", "e"});
  VectorField x(c4, {P("b"), P("a*c"), P("sin(e)"), Expr(1)});
  Expr f = P("a^2*exp(b) + c*e");
  auto lhs = lie_derivative(x, DifferentialForm::exact(c4, f));
  CHECK(same_form(lhs, DifferentialForm::exact(c4, x.apply(f))));

  SUBCASE("Cartan formula against the bracket identity") {
    VectorField y(c4, {P("c"), Expr(0), P("a*b"), P("e^2")});
    auto omega = parse_form("a*d(b) + e*d(c)", c4);
    // i_[X,Y] = L_X i_Y - i_Y L_X
    auto lhs2 = interior_product(bracket(x, y), omega);
    auto rhs2 = lie_derivative(x, interior_product(y, omega)) - interior_product(y, lie_derivative(x, omega));
    CHECK(same_form(lhs2, rhs2));
  }
  SUBCASE("chart mismatch") {
    CHECK_THROWS_AS(lie_derivative(x, k1), ChartMismatch);
  }
}

TEST_CASE("annihilator") {
  auto c = xyu();
  auto ann = annihilator(c, {parse_form("d(x)", c), parse_form("d(y)", c)});
  REQUIRE(ann.size() == 1);
  CHECK(ann[0][0].is_zero());
  CHECK(ann[0][1].is_zero());
  CHECK_FALSE(ann[0][2].is_zero());

  auto m1 = factor1();
  auto k1 = forms(m1, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"});
  auto a1 = annihilator(m1, k1);
  REQUIRE(a1.size() == 2);
  std::vector<VectorField> expected{VectorField(m1, {Expr(1), P("w_y"), P("w_yy"), Expr(0)}),
                                    VectorField::coordinate(m1, 3)};
  auto both = a1;
  both.insert(both.end(), expected.begin(), expected.end());
  CHECK(generic_rank(m1, both).rank == 2);
  for (const auto& x : a1) {
    for (const auto& th : k1) CHECK(max_abs(interior_product(x, th)) < 1e-12);
  }

  auto full = forms(c, {"d(x)", "d(y)", "d(u)"});
  CHECK(annihilator(c, full).empty());
  CHECK(annihilator(c, {}).size() == 3);

  SUBCASE("rank drop is reported with a witness") {
    // Rationals with denominator 97 in [0, 0.02] are 0 or 1/97, so x = 0 is hit.
    auto narrow = std::make_shared<Chart>(*c);
    narrow->set_range(intern("x"), 0.0, 0.02);
    try {
      annihilator(narrow, forms(narrow, {"d(x) + d(y)", "x*d(u)"}));
      FAIL("expected RankError");
    } catch (const RankError& e) {
      CHECK(e.witness().size() == 3);
    }
  }
}

TEST_CASE("generic rank") {
  auto c = xyu();
  CHECK(generic_rank(c, forms(c, {"d(x)", "2*d(x)"})).rank == 1);
  CHECK(generic_rank(c, std::vector<DifferentialForm>{}).rank == 0);
  auto prod = Chart::product(*factor1(), *factor2());
  auto k = forms(prod, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)", "d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"});
  auto rep = generic_rank(prod, k);
  CHECK(rep.rank == 5);
  CHECK(rep.constant);

  SUBCASE("non-constant rank is flagged") {
    auto narrow = std::make_shared<Chart>(*c);
    narrow->set_range(intern("x"), 0.0, 0.02);
    auto r = generic_rank(narrow, forms(narrow, {"d(x)", "x*d(y)"}));
    CHECK(r.rank == 2);
    CHECK_FALSE(r.constant);
    REQUIRE(r.witness.size() == 3);
    CHECK(r.witness[0] == 0.0);
  }
  SUBCASE("probe failure when constraints cannot be met") {
    auto impossible = make_chart("E", {"x"}, {{Constraint::Kind::Positive, P("-(x^2) - 1")}});
    CHECK_THROWS_AS(generic_rank(impossible, forms(impossible, {"d(x)"})), RankError);
  }
}

TEST_CASE("symbolic null space") {
  auto c = make_chart("R3", {"a", "b", "c"});
  ExprMatrix m{{P("a"), P("b"), Expr(0)}, {Expr(0), P("c"), P("a*b")}};
  ProbeSet probes(c, {P("a"), P("b"), P("c")});
  auto ns = null_space(m, 3, probes);
  REQUIRE(ns.size() == 1);
  for (const auto& row : m) {
    Expr dot = row[0] * ns[0][0] + row[1] * ns[0][1] + row[2] * ns[0][2];
    CHECK(simplify(dot).is_zero());
  }
  ExprMatrix dependent{{P("a"), P("b")}, {P("2*a"), P("2*b")}};
  CHECK(null_space(dependent, 2, probes).size() == 1);
}
