#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "darboux/eds/pfaffian.hpp"
#include "darboux/error.hpp"

using namespace darboux;
using testing_support::P;

namespace {

std::vector<DifferentialForm> forms(const ChartPtr& c, std::initializer_list<const char*> texts) {
  std::vector<DifferentialForm> out;
  for (const char* t : texts) out.push_back(parse_form(t, c));
  return out;
}

ChartPtr jet_chart() {
  return make_chart("M", {"x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"},
                    {{Constraint::Kind::Nonzero, P("u - x")}, {Constraint::Kind::Nonzero, P("u_x")}, {Constraint::Kind::Nonzero, P("u_y")}});
}

const char* kTheta = "d(u) - u_x*d(x) - u_y*d(y)";
const char* kThetaX = "d(u_x) - u_xx*d(x) - u_x*u_y/(u - x)*d(y)";
const char* kThetaY = "d(u_y) - u_x*u_y/(u - x)*d(x) - u_yy*d(y)";
const char* kHatPi = "u_x*d(u_xx/u_x + 1/(u - x))";
const char* kCheckPi = "u_y*d(u_yy/u_y)";

PfaffianSystem example1_system(const ChartPtr& m) { return PfaffianSystem(m, forms(m, {kTheta, kThetaX, kThetaY})); }
PfaffianSystem example1_hat(const ChartPtr& m) { return PfaffianSystem(m, forms(m, {kTheta, kThetaX, kThetaY, "d(x)", kHatPi})); }
PfaffianSystem example1_check(const ChartPtr& m) { return PfaffianSystem(m, forms(m, {kTheta, kThetaX, kThetaY, "d(y)", kCheckPi})); }

Coframe example1_coframe(const ChartPtr& m) {
  Coframe c;
  c.theta = forms(m, {kTheta, kThetaX, kThetaY});
  c.hat_omega = forms(m, {"d(x)"});
  c.hat_pi = forms(m, {kHatPi});
  c.check_omega = forms(m, {"d(y)"});
  c.check_pi = forms(m, {kCheckPi});
  return c;
}

ChartPtr factor1() { return make_chart("M1", {"y", "w", "w_y", "w_yy"}, {{Constraint::Kind::Positive, P("w_y")}}); }
ChartPtr factor2() { return make_chart("M2", {"x", "v", "v_x", "v_xx", "v_xxx"}, {{Constraint::Kind::Positive, P("v_x")}}); }

ChartPtr example3_chart() {
  return make_chart("M", {"x", "y", "z", "u", "u_x", "u_y", "u_z", "u_xx", "u_xy", "u_yy", "u_zz"});
}

}  // namespace

TEST_CASE("derived systems") {
  SUBCASE("first factor of the first example") {
    auto m1 = factor1();
    PfaffianSystem k1(m1, forms(m1, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"}));
    auto d = derived_system(k1);
    CHECK(d.rank() == 1);
    CHECK(d.same_span(PfaffianSystem(m1, forms(m1, {"d(w) - w_y*d(y)"}))));
    CHECK(k1.contains(d));
  }
  SUBCASE("Frobenius system is its own derived system") {
    auto c = make_chart("R3", {"x", "y", "u"});
    PfaffianSystem s(c, forms(c, {"d(x)", "d(y)"}));
    auto d = derived_system(s);
    CHECK(d.rank() == 2);
    CHECK(d.same_span(s));
  }
  SUBCASE("first example system") {
    auto m = jet_chart();
    auto d = derived_system(example1_system(m));
    CHECK(d.rank() == 1);
    CHECK(d.same_span(PfaffianSystem(m, forms(m, {kTheta}))));
  }
  SUBCASE("rank-deficient generators reduce to a basis") {
    auto c = make_chart("R3", {"x", "y", "u"});
    PfaffianSystem s(c, forms(c, {"d(x)", "2*d(x)", "d(u) - y*d(x)"}));
    CHECK(s.rank() == 2);
    CHECK(s.basis().size() == 2);
  }
  SUBCASE("non-constant rank is rejected") {
    auto narrow = std::make_shared<Chart>(*make_chart("R2", {"x", "y"}));
    narrow->set_range(intern("x"), 0.0, 0.02);
    CHECK_THROWS_AS(PfaffianSystem(narrow, forms(narrow, {"x*d(y)"})), RankError);
  }
}

TEST_CASE("derived flags") {
  auto m1 = factor1();
  auto m2 = factor2();
  PfaffianSystem k1(m1, forms(m1, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"}));
  PfaffianSystem k2(m2, forms(m2, {"d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"}));
  CHECK(derived_flag(k1).ranks() == std::vector<int>{2, 1, 0});
  CHECK(derived_flag(k2).ranks() == std::vector<int>{3, 2, 1, 0});
  CHECK(infinity_system(k1).rank() == 0);

  auto m = jet_chart();
  CHECK(derived_flag(example1_system(m)).ranks() == std::vector<int>{3, 1, 0});

  auto c = make_chart("R3", {"x", "y", "u"});
  PfaffianSystem dx(c, forms(c, {"d(x)"}));
  CHECK(derived_flag(dx).ranks() == std::vector<int>{1});
  PfaffianSystem frob(c, forms(c, {"d(x)", "d(y)"}));
  CHECK(infinity_system(frob).same_span(frob));

  SUBCASE("monotone and stabilizing") {
    for (const auto& s : {k1, k2, example1_system(m), example1_hat(m), example1_check(m)}) {
      auto flag = derived_flag(s);
      for (std::size_t i = 1; i < flag.systems.size(); ++i) {
        CHECK(flag.systems[i - 1].contains(flag.systems[i]));
        CHECK(flag.systems[i].rank() < flag.systems[i - 1].rank());
      }
      auto inf = flag.infinity();
      CHECK(derived_system(inf).rank() == inf.rank());
    }
  }
}

TEST_CASE("singular systems of the first example") {
  auto m = jet_chart();
  auto hat = example1_hat(m);
  auto check = example1_check(m);
  CHECK(hat.rank() == 5);
  CHECK(check.rank() == 5);
  auto hat_inf = infinity_system(hat);
  auto check_inf = infinity_system(check);
  CHECK(hat_inf.rank() == 3);
  CHECK(check_inf.rank() == 2);
  CHECK(hat_inf.same_span(PfaffianSystem(m, forms(m, {"d(x)", "d(u_x/(u - x))", "d(u_xx/u_x + 1/(u - x))"}))));
  CHECK(check_inf.same_span(PfaffianSystem(m, forms(m, {"d(y)", "d(u_yy/u_y)"}))));

  CHECK(verify_first_integral(P("u_x/(u - x)"), hat));
  CHECK(verify_first_integral(P("u_yy/u_y"), check));
  CHECK_FALSE(verify_first_integral(P("u"), example1_system(m)));
  CHECK_FALSE(verify_first_integral(P("u_yy/u_y"), hat));
}

TEST_CASE("structure equations") {
  SUBCASE("first example is hyperbolic of class 3 with vanishing invariants") {
    auto m = jet_chart();
    auto rep = classify_structure(example1_system(m), example1_coframe(m));
    REQUIRE(rep.classification == StructureReport::Classification::Hyperbolic);
    CHECK(rep.s == 3);
    CHECK(rep.roles == std::vector<int>{0, 1, 2});
    REQUIRE(rep.mu1.has_value());
    REQUIRE(rep.mu2.has_value());
    for (double v : *rep.mu1) CHECK(std::fabs(v) < 1e-9);
    for (double v : *rep.mu2) CHECK(std::fabs(v) < 1e-9);
    REQUIRE(rep.darboux.has_value());
    CHECK(rep.darboux->integrable);
    CHECK(rep.darboux->rank_hat_infinity == 3);
    CHECK(rep.darboux->rank_check_infinity == 2);
  }
  SUBCASE("injected torsion shows up in the first invariant") {
    auto c = make_chart("N", {"x", "y", "z0", "z1", "z2", "p", "q"});
    Coframe cf;
    cf.theta = forms(c, {"d(z0)", "d(z1) - p*d(x) + 3/2*(z2*d(q) + 1/2*q^2*d(y))", "d(z2) - q*d(y)"});
    cf.hat_omega = forms(c, {"d(x)"});
    cf.hat_pi = forms(c, {"d(p)"});
    cf.check_omega = forms(c, {"d(y)"});
    cf.check_pi = forms(c, {"d(q)"});
    auto rep = classify_structure(PfaffianSystem(c, cf.theta), cf);
    REQUIRE(rep.classification == StructureReport::Classification::Hyperbolic);
    REQUIRE(rep.mu1.has_value());
    for (double v : *rep.mu1) CHECK(v == doctest::Approx(1.5).epsilon(1e-9));
    for (double v : *rep.mu2) CHECK(std::fabs(v) < 1e-9);
  }
  SUBCASE("third example is decomposable") {
    auto m = example3_chart();
    Coframe cf;
    cf.kind = Coframe::Kind::Decomposable;
    cf.theta = forms(m, {"d(u) - u_x*d(x) - u_y*d(y) - u_z*d(z)", "d(u_x) - u_xx*d(x) - u_xy*d(y)",
                         "d(u_y) - u_xy*d(x) - u_yy*d(y)", "d(u_z) - u_zz*d(z)"});
    cf.hat_omega = forms(m, {"d(x)", "d(y)"});
    cf.hat_pi = forms(m, {"d(u_xx)", "d(u_xy)", "d(u_yy)"});
    cf.check_omega = forms(m, {"d(z)"});
    cf.check_pi = forms(m, {"d(u_zz)"});
    auto rep = classify_structure(PfaffianSystem(m, cf.theta), cf);
    REQUIRE(rep.classification == StructureReport::Classification::Decomposable);
    CHECK(rep.n1 == 2);
    CHECK(rep.p1 == 3);
    CHECK(rep.n2 == 1);
    CHECK(rep.p2 == 1);
    CHECK(rep.roles == std::vector<int>{0, 1, 1, 2});
    REQUIRE(rep.darboux.has_value());
    CHECK(rep.darboux->integrable);
  }
  SUBCASE("Frobenius system matches neither pattern") {
    auto c = make_chart("R5", {"x", "y", "u", "p", "q"});
    Coframe cf;
    cf.theta = forms(c, {"d(x)"});
    cf.hat_omega = forms(c, {"d(y)"});
    cf.hat_pi = forms(c, {"d(u)"});
    cf.check_omega = forms(c, {"d(p)"});
    cf.check_pi = forms(c, {"d(q)"});
    auto rep = classify_structure(PfaffianSystem(c, cf.theta), cf);
    CHECK(rep.classification == StructureReport::Classification::Neither);
    CHECK_FALSE(rep.diagnostic.empty());
  }
  SUBCASE("offending term is reported") {
    auto c = make_chart("R5", {"x", "y", "u", "p", "q"});
    Coframe cf;
    cf.theta = forms(c, {"d(u) - x*d(y)"});
    cf.hat_omega = forms(c, {"d(x)"});
    cf.hat_pi = forms(c, {"d(p)"});
    cf.check_omega = forms(c, {"d(y)"});
    cf.check_pi = forms(c, {"d(q)"});
    auto rep = classify_structure(PfaffianSystem(c, cf.theta), cf);
    CHECK(rep.classification == StructureReport::Classification::Neither);
    CHECK(rep.diagnostic.find("hat omega ^ check omega") != std::string::npos);
  }
  SUBCASE("rank-deficient coframe") {
    auto m = jet_chart();
    auto cf = example1_coframe(m);
    cf.check_pi = forms(m, {"d(x)"});
    CHECK_THROWS_AS(classify_structure(example1_system(m), cf), RankError);
  }
}

TEST_CASE("Darboux integrability") {
  SUBCASE("first example") {
    auto m = jet_chart();
    auto v = is_darboux_integrable(example1_system(m), example1_hat(m), example1_check(m));
    CHECK(v.integrable);
    CHECK(v.rank_infinity == 0);
    CHECK(v.rank_hat == 5);
    CHECK(v.rank_check == 5);
    CHECK(v.rank_hat_plus_check_infinity == 7);
    CHECK(v.rank_hat_infinity_plus_check == 7);
    CHECK(v.rank_infinity_intersection == 0);
  }
  SUBCASE("Frobenius system") {
    auto c = make_chart("R3", {"x", "y", "u"});
    PfaffianSystem du(c, forms(c, {"d(u)"}));
    auto all = PfaffianSystem::cotangent(c);
    auto v = is_darboux_integrable(du, all, all);
    CHECK_FALSE(v.integrable);
    CHECK(v.rank_infinity == 1);
  }
}

TEST_CASE("non-characteristic Cauchy data") {
  auto m = jet_chart();
  auto system = example1_system(m);
  // Generators of the singular systems that stay finite where u_y vanishes.
  PfaffianSystem hat(m, forms(m, {kTheta, kThetaX, kThetaY, "d(x)", kHatPi}));
  PfaffianSystem check(m, forms(m, {kTheta, kThetaX, kThetaY, "d(y)", "u_y*d(u_yy) - u_yy*d(u_y)"}));
  Binding none;

  SUBCASE("first example data with f = x + 1, g = 1") {
    ParamCurve gamma(m, "t", {"t", "t", "t + 1", "1", "0", "0", "0"});
    auto rep = is_noncharacteristic(gamma, none, -1.0, 1.0, system, hat, check);
    CHECK(rep.integral);
    CHECK(rep.samples.size() == 25);
    CHECK(rep.ok());
  }
  SUBCASE("generic data through the formula for the jets") {
    Binding data;
    data.bind_text("f", {"s"}, "s^2/4 + 3");
    data.bind_text("g", {"s"}, "1 + s/5");
    ParamCurve gamma(m, "t",
                     {"t", "t", "f(t)", "g(t)", "f'(t) - g(t)", "g'(t) + g(t)*(f'(t) - g(t))/(t - f(t))",
                      "f''(t) - g'(t) + g(t)*(f'(t) - g(t))/(t - f(t))"});
    auto rep = is_noncharacteristic(gamma, data, -1.0, 1.0, system, hat, check);
    CHECK(rep.integral_residual < 1e-10);
    CHECK(rep.ok());
  }
  SUBCASE("characteristic curve of the wave equation") {
    auto c = make_chart("W", {"x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"});
    auto base = forms(c, {"d(u) - u_x*d(x) - u_y*d(y)", "d(u_x) - u_xx*d(x)", "d(u_y) - u_yy*d(y)"});
    PfaffianSystem wave(c, base);
    auto hv = base;
    for (auto& f : forms(c, {"d(x)", "d(u_xx)"})) hv.push_back(f);
    auto cv = base;
    for (auto& f : forms(c, {"d(y)", "d(u_yy)"})) cv.push_back(f);
    ParamCurve gamma(c, "t", {"t", "0", "0", "0", "0", "0", "0"});
    auto rep = is_noncharacteristic(gamma, none, 0.0, 1.0, wave, PfaffianSystem(c, hv), PfaffianSystem(c, cv));
    CHECK(rep.integral);
    CHECK_FALSE(rep.ok());
    for (bool b : rep.noncharacteristic) CHECK_FALSE(b);
  }
  SUBCASE("curve that is not integral") {
    ParamCurve gamma(m, "t", {"t", "t", "t + 1", "2", "0", "0", "0"});
    auto rep = is_noncharacteristic(gamma, none, -1.0, 1.0, system, hat, check);
    CHECK_FALSE(rep.integral);
    CHECK(rep.integral_residual > 0.5);
    CHECK_FALSE(rep.ok());
  }
}
