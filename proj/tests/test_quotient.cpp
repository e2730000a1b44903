#include "doctest.h"
#include "support.hpp"

#include "darboux/error.hpp"
#include "darboux/quotient/quotient.hpp"

using namespace darboux;
using testing_support::P;

namespace {

std::vector<DifferentialForm> forms(const ChartPtr& c, std::initializer_list<const char*> texts) {
  std::vector<DifferentialForm> out;
  for (const char* t : texts) out.push_back(parse_form(t, c));
  return out;
}

VectorField field(const ChartPtr& c, std::initializer_list<const char*> comps) {
  std::vector<Expr> e;
  for (const char* t : comps) e.push_back(P(t));
  return VectorField(c, std::move(e));
}

ChartPtr m1() { return make_chart("M1", {"y", "w", "w_y", "w_yy"}, {{Constraint::Kind::Positive, P("w_y")}}); }
ChartPtr m2() { return make_chart("M2", {"x", "v", "v_x", "v_xx", "v_xxx"}, {{Constraint::Kind::Positive, P("v_x")}}); }
ChartPtr base() {
  return make_chart("M", {"x", "y", "u", "u_x", "u_y", "u_xx", "u_yy"},
                    {{Constraint::Kind::Nonzero, P("u - x")}, {Constraint::Kind::Nonzero, P("u_x")}, {Constraint::Kind::Nonzero, P("u_y")}});
}

const char* kTheta = "d(u) - u_x*d(x) - u_y*d(y)";
const char* kThetaX = "d(u_x) - u_xx*d(x) - u_x*u_y/(u - x)*d(y)";
const char* kThetaY = "d(u_y) - u_x*u_y/(u - x)*d(x) - u_yy*d(y)";

PfaffianSystem k1(const ChartPtr& c) { return PfaffianSystem(c, forms(c, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"})); }
PfaffianSystem k2(const ChartPtr& c) {
  return PfaffianSystem(c, forms(c, {"d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"}));
}
GroupAction g1(const ChartPtr& c) { return GroupAction(c, {field(c, {"0", "w", "w_y", "w_yy"}), field(c, {"0", "-1", "0", "0"})}); }
GroupAction g2(const ChartPtr& c) {
  return GroupAction(c, {field(c, {"0", "v", "v_x", "v_xx", "v_xxx"}), field(c, {"0", "1", "0", "0", "0"})});
}

std::vector<Expr> q_components(const char* u_sign = "-") {
  std::string u = std::string("x ") + u_sign + " (v + w)/v_x";
  return {P("x"), P("y"), parse(u), P("(v + w)*v_xx/v_x^2"), P("-w_y/v_x"),
          P("v_xx/v_x + (v + w)*v_xxx/v_x^2 - 2*(v + w)*v_xx^2/v_x^3"), P("-w_yy/v_x")};
}

QuotientRepresentation example1(const char* u_sign = "-") {
  auto a = m1();
  auto b = m2();
  return QuotientRepresentation(k1(a), k2(b), g1(a), g2(b), base(), q_components(u_sign));
}

ChartPtr jet3(const char* name, const char* t, const char* f) {
  std::string s(f);
  std::string ts(t);
  return make_chart(name, {ts, s, s + "_" + ts, s + "_" + ts + ts, s + "_" + ts + ts + ts},
                    {{Constraint::Kind::Positive, parse(s + "_" + ts)}});
}

// Prolonged sl(2) action on the dependent variable of J^3(R, R).
GroupAction sl2(const ChartPtr& c, int sign) {
  const std::string w = c->coord_names()[1];
  const std::string w1 = c->coord_names()[2], w2 = c->coord_names()[3], w3 = c->coord_names()[4];
  const std::string s = sign > 0 ? "" : "-";
  auto F = [&](std::initializer_list<std::string> comps) {
    std::vector<Expr> e;
    for (const auto& t : comps) e.push_back(parse(t));
    return VectorField(c, e);
  };
  return GroupAction(c, {F({"0", s + "1", "0", "0", "0"}), F({"0", w, w1, w2, w3}),
                         F({"0", s + w + "^2", s + "2*" + w + "*" + w1, s + "(2*" + w1 + "^2 + 2*" + w + "*" + w2 + ")",
                            s + "(6*" + w1 + "*" + w2 + " + 2*" + w + "*" + w3 + ")"})});
}

}  // namespace

TEST_CASE("structure constants and solvability") {
  auto a = m1();
  auto act = g1(a);
  CHECK(act.dimension() == 2);
  CHECK(act.closure_residual() < 1e-10);
  CHECK(act.structure()[0][1][1] == doctest::Approx(-1.0));
  CHECK(act.structure()[0][1][0] == doctest::Approx(0.0));
  CHECK(act.structure()[1][0][1] == doctest::Approx(1.0));
  CHECK(act.jacobi_residual() < 1e-10);
  CHECK(is_solvable(act));
  CHECK(same_structure(act.structure(), g2(m2()).structure()));

  SUBCASE("abelian translations") {
    auto c = make_chart("M1", {"t", "w", "v", "v_t", "v_tt"});
    GroupAction r3(c, {field(c, {"0", "1", "0", "0", "0"}), field(c, {"0", "0", "1", "0", "0"}), field(c, {"0", "0", "t", "1", "0"})});
    CHECK(is_solvable(r3));
    for (const auto& plane : r3.structure()) {
      for (const auto& row : plane) {
        for (double v : row) CHECK(v == 0.0);
      }
    }
  }
  SUBCASE("sl(2) is not solvable") {
    auto c = jet3("M1", "y", "w");
    auto act3 = sl2(c, 1);
    CHECK(act3.jacobi_residual() < 1e-10);
    CHECK_FALSE(is_solvable(act3));
    CHECK(same_structure(act3.structure(), sl2(jet3("M2", "x", "v"), -1).structure()));
  }
  SUBCASE("non-closing generators are rejected") {
    auto c = make_chart("R2", {"x", "y"});
    CHECK_THROWS_AS(GroupAction(c, {field(c, {"1", "0"}), field(c, {"0", "x^2"})}), Error);
  }
  SUBCASE("solvability from constants alone") {
    StructureConstants heis(3, std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0)));
    heis[0][1][2] = 1;
    heis[1][0][2] = -1;
    CHECK(is_solvable(heis));
  }
}

TEST_CASE("sum systems") {
  auto a = m1();
  auto b = m2();
  auto s = sum_system(k1(a), k2(b));
  CHECK(s.chart()->dim() == 9);
  CHECK(s.rank() == 5);
  auto only = sum_system(k1(a), PfaffianSystem::zero(b));
  CHECK(only.rank() == 2);
  CHECK(only.same_span(PfaffianSystem(only.chart(), forms(only.chart(), {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)"}))));
  CHECK_THROWS_AS(sum_system(k1(a), k1(a)), ChartMismatch);

  auto c = make_chart("A", {"z", "w", "w_z", "w_zz"});
  auto d = make_chart("B", {"x", "y", "v", "v_x", "v_y", "v_xx", "v_xy", "v_yy"});
  PfaffianSystem kz(c, forms(c, {"d(w) - w_z*d(z)", "d(w_z) - w_zz*d(z)"}));
  PfaffianSystem kxy(d, forms(d, {"d(v) - v_x*d(x) - v_y*d(y)", "d(v_x) - v_xx*d(x) - v_xy*d(y)", "d(v_y) - v_xy*d(x) - v_yy*d(y)"}));
  auto s3 = sum_system(kz, kxy);
  CHECK(s3.chart()->dim() == 12);
  CHECK(s3.rank() == 5);
}

TEST_CASE("symmetry and transversality") {
  auto a = m1();
  CHECK(verify_symmetry(g1(a), k1(a)));
  auto c = jet3("M1", "y", "w");
  PfaffianSystem contact(c, forms(c, {"d(w) - w_y*d(y)", "d(w_y) - w_yy*d(y)", "d(w_yy) - w_yyy*d(y)"}));
  CHECK(verify_symmetry(sl2(c, 1), contact));

  auto e = make_chart("E", {"y", "w", "w_y"});
  PfaffianSystem one(e, forms(e, {"d(w) - w_y*d(y)"}));
  CHECK(verify_symmetry(GroupAction(e, {field(e, {"1", "0", "0"})}), one));
  CHECK_FALSE(verify_symmetry(GroupAction(e, {field(e, {"w", "0", "0"})}), one));

  auto rep = example1();
  CHECK(verify_transversality(rep.diagonal(), rep.sum()));
  CHECK(verify_transversality(g1(a), PfaffianSystem::cotangent(a)));
  // ann(K2') is 3-dimensional on the 5-dimensional jet space, so a 3-dimensional
  // algebra cannot meet it trivially.
  auto x = jet3("M2", "x", "v");
  PfaffianSystem k2x(x, forms(x, {"d(v) - v_x*d(x)", "d(v_x) - v_xx*d(x)", "d(v_xx) - v_xxx*d(x)"}));
  auto derived = derived_system(k2x);
  CHECK(derived.rank() == 2);
  CHECK_FALSE(verify_transversality(sl2(x, -1), derived));
  CHECK(verify_transversality(sl2(x, -1), k2x));
}

TEST_CASE("quotient representation of the first example") {
  auto rep = example1();
  CHECK(rep.product()->dim() == 9);
  CHECK(rep.group_dimension() == 2);
  CHECK(same_structure(rep.diagonal().structure(), rep.g1().structure()));
  CHECK(infinity_system(rep.k1()).rank() == 0);
  CHECK(infinity_system(rep.k2()).rank() == 0);
  auto m = rep.base();
  PfaffianSystem system(m, forms(m, {kTheta, kThetaX, kThetaY}));

  auto check = verify_quotient_map(rep, system);
  CHECK(check.pullback);
  CHECK(check.rank);
  CHECK(check.rank_sum == 5);
  CHECK(check.invariance);
  CHECK(check.invariance_residual < 1e-12);
  CHECK(check.ok());

  SUBCASE("flipped sign in u breaks the pullback") {
    auto bad = example1("+");
    auto c = verify_quotient_map(bad, system);
    CHECK_FALSE(c.pullback);
    CHECK(c.pullback_witness.size() == 9);
    CHECK(c.invariance);
    CHECK_FALSE(c.ok());
  }

  PfaffianSystem hat(m, forms(m, {kTheta, kThetaX, kThetaY, "d(x)", "u_x*d(u_xx/u_x + 1/(u - x))"}));
  PfaffianSystem chk(m, forms(m, {kTheta, kThetaX, kThetaY, "d(y)", "u_y*d(u_yy/u_y)"}));
  CHECK(verify_singular_correspondence(rep, hat, chk));
  CHECK_FALSE(verify_singular_correspondence(rep, chk, hat));

  auto push = verify_annihilator_pushforward(rep.q(), rep.hat_w(), hat);
  CHECK(push.ok);
  CHECK(push.points == 10);
  CHECK(push.expected_rank == 2);
  auto push2 = verify_annihilator_pushforward(rep.q(), rep.check_w(), chk);
  CHECK(push2.ok);
  CHECK_FALSE(verify_annihilator_pushforward(rep.q(), rep.check_w(), hat).ok);

  SUBCASE("rank identity through the annihilator of the diagonal action") {
    auto diag = rep.diagonal();
    auto sum = rep.sum();
    // dim ann(Γ) ∩ (K1 + K2) = rank(K1 + K2) − r when Γ is transverse to ann(K1 + K2).
    CHECK(sum.rank() - static_cast<int>(diag.dimension()) == system.rank());
  }
}

TEST_CASE("identity quotient") {
  auto a = make_chart("A", {"x", "u"});
  auto b = make_chart("B", {"y", "v"});
  PfaffianSystem ka(a, forms(a, {"d(u) - u*d(x)"}));
  PfaffianSystem kb(b, forms(b, {"d(v)"}));
  GroupAction none_a(a, {});
  GroupAction none_b(b, {});
  auto m = make_chart("M", {"x", "u", "y", "v"});
  QuotientRepresentation rep(ka, kb, none_a, none_b, m, {P("x"), P("u"), P("y"), P("v")});
  PfaffianSystem hat(m, forms(m, {"d(u) - u*d(x)", "d(y)", "d(v)"}));
  auto push = verify_annihilator_pushforward(rep.q(), rep.hat_w(), hat);
  CHECK(push.ok);
  CHECK(push.expected_rank == 1);
  CHECK(verify_quotient_map(rep, PfaffianSystem(m, forms(m, {"d(u) - u*d(x)", "d(v)"}))).ok());
  CHECK_THROWS_AS(QuotientRepresentation(ka, kb, GroupAction(a, {VectorField::coordinate(a, 0)}), none_b, m,
                                         {P("x"), P("u"), P("y"), P("v")}),
                  Error);
}
