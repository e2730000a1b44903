#include "darboux/examples/registry.hpp"

#include <algorithm>
#include <cmath>

#include "darboux/error.hpp"
#include "darboux/symcore/parse.hpp"

namespace darboux {

namespace {

using nlohmann::json;

const json& required(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing '" + key + "'");
  return j.at(key);
}

std::vector<std::string> strings(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw InputError(where + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<Expr> exprs(const json& j, const std::string& where) {
  std::vector<Expr> out;
  for (const auto& s : strings(j, where)) out.push_back(parse(s));
  return out;
}

ChartPtr build_chart(const std::string& name, const json& j) {
  std::vector<Constraint> constraints;
  if (j.contains("constraints")) {
    for (const auto& c : j.at("constraints")) {
      std::string kind = required(c, "kind", "chart " + name).get<std::string>();
      Constraint k;
      if (kind == "positive") {
        k.kind = Constraint::Kind::Positive;
      } else if (kind == "nonzero") {
        k.kind = Constraint::Kind::Nonzero;
      } else {
        throw InputError("chart " + name + ": unknown constraint kind '" + kind + "'");
      }
      k.expr = parse(required(c, "expr", "chart " + name).get<std::string>());
      constraints.push_back(std::move(k));
    }
  }
  auto chart = std::make_shared<Chart>(name, strings(required(j, "coordinates", "chart " + name), "chart " + name),
                                       std::move(constraints));
  if (j.contains("ranges")) {
    for (const auto& [coord, r] : j.at("ranges").items()) {
      chart->set_range(intern(coord), r.at(0).get<double>(), r.at(1).get<double>());
    }
  }
  return chart;
}

struct Context {
  std::map<std::string, ChartPtr> charts;
  const json* systems = nullptr;

  ChartPtr chart(const std::string& name) const {
    auto it = charts.find(name);
    if (it == charts.end()) throw InputError("unknown chart '" + name + "'");
    return it->second;
  }

  std::vector<DifferentialForm> forms(const std::string& name, std::vector<std::string> seen = {}) const {
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) throw InputError("system '" + name + "' extends itself");
    seen.push_back(name);
    if (!systems->contains(name)) throw InputError("unknown system '" + name + "'");
    const json& s = systems->at(name);
    ChartPtr c = chart(required(s, "chart", "system " + name).get<std::string>());
    std::vector<DifferentialForm> out;
    if (s.contains("extends")) {
      auto base = forms(s.at("extends").get<std::string>(), seen);
      if (!base.empty() && base.front().chart() != c) throw InputError("system '" + name + "' extends a system on another chart");
      out = std::move(base);
    }
    for (const auto& f : strings(required(s, "forms", "system " + name), "system " + name)) out.push_back(parse_form(f, c));
    return out;
  }

  PfaffianSystem system(const std::string& name) const {
    const json& s = systems->at(name);
    return PfaffianSystem(chart(s.at("chart").get<std::string>()), forms(name));
  }

  std::vector<DifferentialForm> parse_forms(const json& j, const ChartPtr& c, const std::string& where) const {
    std::vector<DifferentialForm> out;
    for (const auto& f : strings(j, where)) out.push_back(parse_form(f, c));
    return out;
  }
};

GroupAction build_action(const json& j, const ChartPtr& chart, const std::string& where) {
  std::vector<VectorField> gens;
  for (const auto& g : j) {
    auto comps = exprs(g, where);
    if (comps.size() != chart->dim()) throw InputError(where + ": generator has " + std::to_string(comps.size()) +
                                                       " components for a " + std::to_string(chart->dim()) +
                                                       "-dimensional chart");
    gens.emplace_back(chart, std::move(comps));
  }
  return GroupAction(chart, std::move(gens));
}

SmoothMap build_map(const json& j, const ChartPtr& source, const ChartPtr& target, const std::string& where) {
  auto comps = exprs(j, where);
  if (comps.size() != target->dim()) throw InputError(where + ": expected " + std::to_string(target->dim()) + " components");
  return SmoothMap(source, target, std::move(comps));
}

CauchyTemplate build_cauchy(const json& c, const Context& ctx, const QuotientRepresentation& rep) {
  CauchyTemplate t;
  auto params = strings(required(c, "parameters", "cauchy"), "cauchy.parameters");
  t.data = exprs(required(c, "data", "cauchy"), "cauchy.data");
  if (t.data.size() != rep.base()->dim()) throw InputError("cauchy.data: expected " + std::to_string(rep.base()->dim()) + " components");
  for (const auto& r : required(c, "ranges", "cauchy")) t.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
  if (t.ranges.size() != params.size()) throw InputError("cauchy.ranges: one range per parameter expected");
  auto chart = std::make_shared<Chart>("S", params);
  for (std::size_t i = 0; i < params.size(); ++i) chart->set_range(chart->coord(i), t.ranges[i].first, t.ranges[i].second);
  t.parameters = chart;
  if (c.contains("t0")) t.base_point = c.at("t0").get<std::vector<double>>();
  if (c.contains("functions")) {
    for (const auto& [name, f] : c.at("functions").items()) {
      FunctionSlot slot{name, strings(required(f, "params", "function " + name), "function " + name), std::nullopt};
      if (f.contains("body") && !f.at("body").is_null()) slot.body = f.at("body").get<std::string>();
      t.functions.push_back(std::move(slot));
    }
  }
  t.fiber = strings(required(c, "fiber", "cauchy"), "cauchy.fiber");
  t.fiber_point = exprs(required(c, "fiber_point", "cauchy"), "cauchy.fiber_point");
  if (t.fiber.size() != t.fiber_point.size()) throw InputError("cauchy.fiber_point: one value per fiber coordinate expected");
  for (const auto& f : t.fiber) rep.product()->index(f);
  if (c.contains("parametrization")) {
    const json& p = c.at("parametrization");
    std::vector<Expr> comps;
    if (p.is_object()) {
      for (const auto& name : rep.product()->coord_names()) {
        if (!p.contains(name)) throw InputError("cauchy.parametrization: missing '" + name + "'");
        comps.push_back(parse(p.at(name).get<std::string>()));
      }
    } else {
      comps = exprs(p, "cauchy.parametrization");
    }
    if (comps.size() != rep.product()->dim()) throw InputError("cauchy.parametrization: one component per product coordinate expected");
    t.parametrization = std::move(comps);
  }
  if (c.contains("fiber1")) t.fiber1 = strings(c.at("fiber1"), "cauchy.fiber1");
  if (c.contains("fiber2")) t.fiber2 = strings(c.at("fiber2"), "cauchy.fiber2");
  t.n1 = c.value("n1", 1);
  t.n2 = c.value("n2", 1);
  t.route = c.value("route", std::string("quotient"));
  if (t.route != "quotient" && t.route != "decomposable" && t.route != "second-method") {
    throw InputError("cauchy.route: unknown route '" + t.route + "'");
  }
  if (c.contains("grid")) {
    auto g = c.at("grid").get<std::vector<int>>();
    if (g.size() != 2 || g[0] < 2 || g[1] < 2) throw InputError("cauchy.grid: expected two counts of at least 2");
    t.grid1 = g[0];
    t.grid2 = g[1];
  }
  if (c.contains("pde")) {
    const json& p = c.at("pde");
    ScalarPDE pde{parse(required(p, "residual", "cauchy.pde").get<std::string>())};
    pde.dependent = p.value("dependent", pde.dependent);
    if (p.contains("independents")) pde.independents = strings(p.at("independents"), "cauchy.pde.independents");
    t.pde = std::move(pde);
  }
  if (c.contains("oracle")) {
    const json& o = c.at("oracle");
    Oracle oracle;
    std::string kind = o.value("kind", std::string("graph"));
    if (kind == "graph") {
      oracle.kind = Oracle::Kind::Graph;
    } else if (kind == "parametric") {
      oracle.kind = Oracle::Kind::Parametric;
    } else {
      throw InputError("cauchy.oracle: unknown kind '" + kind + "'");
    }
    oracle.variables = strings(required(o, "variables", "cauchy.oracle"), "cauchy.oracle.variables");
    for (const auto& [name, e] : required(o, "components", "cauchy.oracle").items()) {
      rep.base()->index(name);
      oracle.components.emplace_back(name, parse(e.get<std::string>()));
    }
    if (oracle.kind == Oracle::Kind::Graph) {
      for (const auto& v : oracle.variables) rep.base()->index(v);
    }
    t.oracle = std::move(oracle);
  }
  (void)ctx;
  return t;
}

IntegratorSettings build_integrator(const json& j) {
  IntegratorSettings s;
  if (j.contains("method")) s.method = parse_method(j.at("method").get<std::string>());
  s.rk.rtol = j.value("rtol", s.rk.rtol);
  s.rk.atol = j.value("atol", s.rk.atol);
  s.rk.max_steps = j.value("max_steps", s.rk.max_steps);
  s.padding = j.value("padding", s.padding);
  s.seed = j.value("seed", s.seed);
  s.fd_step = j.value("fd_step", s.fd_step);
  return s;
}

RegistryEntry build(const json& doc) {
  if (!doc.is_object()) throw InputError("problem document must be a JSON object");
  Context ctx;
  for (const auto& [name, c] : required(doc, "charts", "problem").items()) ctx.charts[name] = build_chart(name, c);
  const json& systems = required(doc, "systems", "problem");
  ctx.systems = &systems;

  RegistryEntry e(ctx.system("I"));
  e.name = doc.value("name", std::string("problem"));
  e.description = doc.value("description", std::string());
  e.charts = ctx.charts;
  e.document = doc;
  if (systems.contains("hat")) e.hat = ctx.system("hat");
  if (systems.contains("check")) e.check = ctx.system("check");
  if (e.hat.has_value() != e.check.has_value()) throw InputError("systems: 'hat' and 'check' go together");

  if (doc.contains("coframe")) {
    const json& c = doc.at("coframe");
    Coframe cf;
    std::string kind = c.value("kind", std::string("hyperbolic"));
    if (kind == "hyperbolic") {
      cf.kind = Coframe::Kind::Hyperbolic;
    } else if (kind == "decomposable") {
      cf.kind = Coframe::Kind::Decomposable;
    } else {
      throw InputError("coframe: unknown kind '" + kind + "'");
    }
    ChartPtr m = e.chart();
    cf.theta = c.contains("theta") ? ctx.parse_forms(c.at("theta"), m, "coframe.theta")
                                   : ctx.forms(c.value("system", std::string("I")));
    cf.hat_omega = ctx.parse_forms(required(c, "hat_omega", "coframe"), m, "coframe.hat_omega");
    cf.hat_pi = ctx.parse_forms(required(c, "hat_pi", "coframe"), m, "coframe.hat_pi");
    cf.check_omega = ctx.parse_forms(required(c, "check_omega", "coframe"), m, "coframe.check_omega");
    cf.check_pi = ctx.parse_forms(required(c, "check_pi", "coframe"), m, "coframe.check_pi");
    e.coframe = std::move(cf);
  }
  if (doc.contains("intermediate_integrals")) {
    const json& ii = doc.at("intermediate_integrals");
    if (ii.contains("hat")) e.hat_integrals = exprs(ii.at("hat"), "intermediate_integrals.hat");
    if (ii.contains("check")) e.check_integrals = exprs(ii.at("check"), "intermediate_integrals.check");
  }

  if (doc.contains("quotient")) {
    const json& q = doc.at("quotient");
    ChartPtr m1 = ctx.chart(q.value("M1", std::string("M1")));
    ChartPtr m2 = ctx.chart(q.value("M2", std::string("M2")));
    PfaffianSystem k1 = ctx.system(q.value("K1", std::string("K1")));
    PfaffianSystem k2 = ctx.system(q.value("K2", std::string("K2")));
    if (k1.chart() != m1 || k2.chart() != m2) throw InputError("quotient: K1 and K2 must live on M1 and M2");
    GroupAction g1 = build_action(required(q, "G1", "quotient"), m1, "quotient.G1");
    GroupAction g2 = build_action(required(q, "G2", "quotient"), m2, "quotient.G2");
    e.rep = std::make_shared<QuotientRepresentation>(k1, k2, g1, g2, e.chart(), exprs(required(q, "q", "quotient"), "quotient.q"));
    if (e.rep->q().components().size() != e.chart()->dim()) throw InputError("quotient.q: one component per coordinate of M expected");
    if (q.contains("structure_constants")) e.structure = q.at("structure_constants").get<StructureConstants>();
    if (q.contains("factor_quotients")) {
      const json& f = q.at("factor_quotients");
      ChartPtr b1 = ctx.chart(required(f, "B1", "factor_quotients").get<std::string>());
      ChartPtr b2 = ctx.chart(required(f, "B2", "factor_quotients").get<std::string>());
      e.rep->factor_quotients = FactorQuotients{
          build_map(required(f, "p1", "factor_quotients"), e.chart(), b1, "factor_quotients.p1"),
          build_map(required(f, "p2", "factor_quotients"), e.chart(), b2, "factor_quotients.p2"),
          build_map(required(f, "q1", "factor_quotients"), m1, b1, "factor_quotients.q1"),
          build_map(required(f, "q2", "factor_quotients"), m2, b2, "factor_quotients.q2")};
    }
  }
  if (doc.contains("cauchy")) {
    if (!e.rep) throw InputError("cauchy: a quotient section is required");
    e.cauchy = build_cauchy(doc.at("cauchy"), ctx, *e.rep);
  }
  if (doc.contains("integrator")) e.integrator = build_integrator(doc.at("integrator"));
  if (doc.contains("output")) {
    e.csv_path = doc.at("output").value("csv", std::string());
    e.report_path = doc.at("output").value("report", std::string());
  }
  return e;
}

template <class F>
EntryCheck run_check(const std::string& name, F f) {
  EntryCheck c{name, false, {}};
  try {
    c.detail = f(c.ok);
  } catch (const std::exception& ex) {
    c.ok = false;
    c.detail = ex.what();
  }
  return c;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + std::to_string(x);
  return "(" + s + ")";
}

/// max relative |a − b| over probes of the chart where both sides evaluate.
double map_gap(const ChartPtr& chart, const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::vector<Expr> all = a;
  all.insert(all.end(), b.begin(), b.end());
  RankOptions o;
  o.points = 10;
  ProbeSet probes(chart, all, o);
  double worst = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      double x = evaluate(a[k], probes[p]), y = evaluate(b[k], probes[p]);
      worst = std::max(worst, std::fabs(x - y) / std::max(1.0, std::fabs(x) + std::fabs(y)));
    }
  }
  return worst;
}

}  // namespace

bool EntryReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const EntryCheck& c) { return c.ok; });
}

RegistryEntry load_problem(const nlohmann::json& document) {
  try {
    return build(document);
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("problem document: ") + ex.what());
  } catch (const ParseError& ex) {
    throw InputError(std::string("problem document: ") + ex.what());
  } catch (const ChartMismatch& ex) {
    throw InputError(std::string("problem document: ") + ex.what());
  }
}

EntryReport check_entry(const RegistryEntry& e) {
  EntryReport r;
  auto flag = [&](const std::string& name, const PfaffianSystem& s) {
    r.checks.push_back(run_check("derived flag " + name, [&](bool& ok) {
      auto ranks = derived_flag(s).ranks();
      r.flags.emplace_back(name, ranks);
      ok = !ranks.empty() && ranks.back() == 0;
      return ok ? std::string() : name + " has a non-trivial integrable subsystem";
    }));
  };
  if (e.rep) {
    flag("K1", e.rep->k1());
    flag("K2", e.rep->k2());
  }
  flag("I", e.system);

  if (e.hat && e.check) {
    r.checks.push_back(run_check("Darboux integrable", [&](bool& ok) {
      r.darboux = is_darboux_integrable(e.system, *e.hat, *e.check);
      ok = r.darboux->integrable && r.darboux->rank_infinity_intersection == 0;
      return "rank(hV + cV∞) = " + std::to_string(r.darboux->rank_hat_plus_check_infinity) +
             ", rank(hV∞ + cV) = " + std::to_string(r.darboux->rank_hat_infinity_plus_check) +
             ", rank(hV∞ ∩ cV∞) = " + std::to_string(r.darboux->rank_infinity_intersection) + ", dim = " +
             std::to_string(r.darboux->dim);
    }));
    auto integrals = [&](const std::string& name, const std::vector<Expr>& fs, const PfaffianSystem& s) {
      if (fs.empty()) return;
      r.checks.push_back(run_check("intermediate integrals " + name, [&](bool& ok) {
        ok = true;
        std::string bad;
        for (const auto& f : fs) {
          if (!verify_first_integral(f, s)) {
            ok = false;
            bad += (bad.empty() ? "" : "; ") + to_string(f);
          }
        }
        return bad.empty() ? std::string() : "not first integrals: " + bad;
      }));
    };
    integrals("hat", e.hat_integrals, *e.hat);
    integrals("check", e.check_integrals, *e.check);
  }
  if (e.coframe) {
    r.checks.push_back(run_check("structure equations", [&](bool& ok) {
      auto s = classify_structure(e.system, *e.coframe);
      ok = s.classification != StructureReport::Classification::Neither;
      if (ok && e.hat && s.hat) ok = s.hat->same_span(*e.hat) && s.check->same_span(*e.check);
      return to_string(s.classification) + (s.diagnostic.empty() ? "" : ": " + s.diagnostic);
    }));
  }

  if (e.rep) {
    const auto& rep = *e.rep;
    r.group_dimension = rep.group_dimension();
    r.solvable = is_solvable(rep.g1());
    QuotientCheck qc;
    bool have = false;
    std::string failure;
    try {
      qc = verify_quotient_map(rep, e.system);
      have = true;
    } catch (const std::exception& ex) {
      failure = ex.what();
    }
    r.checks.push_back({"quotient pullback", have && qc.pullback,
                        have ? (qc.pullback ? "" : "witness " + join(qc.pullback_witness)) : failure});
    r.checks.push_back({"quotient rank", have && qc.rank,
                        have ? "rank I = " + std::to_string(qc.rank_base) + ", rank(K1 + K2) = " +
                                   std::to_string(qc.rank_sum) + ", dim G = " + std::to_string(qc.group_dimension)
                             : failure});
    r.checks.push_back({"quotient invariance", have && qc.invariance,
                        have ? "residual " + std::to_string(qc.invariance_residual) +
                                   (qc.invariance ? "" : " at " + join(qc.invariance_witness))
                             : failure});
    if (e.structure) {
      r.checks.push_back(run_check("structure constants", [&](bool& ok) {
        ok = same_structure(*e.structure, rep.g1().structure(), 1e-9) &&
             same_structure(*e.structure, rep.g2().structure(), 1e-9);
        return std::string();
      }));
    }
    r.checks.push_back(run_check("symmetry", [&](bool& ok) {
      ok = verify_symmetry(rep.g1(), rep.k1()) && verify_symmetry(rep.g2(), rep.k2());
      return std::string();
    }));
    if (e.hat && e.check) {
      r.checks.push_back(run_check("singular correspondence", [&](bool& ok) {
        ok = verify_singular_correspondence(rep, *e.hat, *e.check);
        return std::string();
      }));
    }
    if (rep.factor_quotients) {
      r.checks.push_back(run_check("factor quotients", [&](bool& ok) {
        const auto& f = *rep.factor_quotients;
        auto pulled = [&](const SmoothMap& p) { return compose(p, rep.q()).components(); };
        auto projected = [&](const SmoothMap& qi, const ChartPtr& m) {
          return compose(qi, SmoothMap::projection(rep.product(), m)).components();
        };
        double gap = std::max(map_gap(rep.product(), pulled(f.p1), projected(f.q1, rep.m1())),
                              map_gap(rep.product(), pulled(f.p2), projected(f.q2, rep.m2())));
        std::vector<Expr> inv, zero;
        for (const auto& x : rep.g1().generators()) {
          for (const auto& c : f.q1.components()) inv.push_back(x.apply(c));
        }
        double inv1 = inv.empty() ? 0.0 : map_gap(rep.m1(), inv, std::vector<Expr>(inv.size(), Expr(0)));
        inv.clear();
        for (const auto& x : rep.g2().generators()) {
          for (const auto& c : f.q2.components()) inv.push_back(x.apply(c));
        }
        double inv2 = inv.empty() ? 0.0 : map_gap(rep.m2(), inv, std::vector<Expr>(inv.size(), Expr(0)));
        ok = gap < 1e-9 && inv1 < 1e-9 && inv2 < 1e-9;
        return "p∘q − q∘π " + std::to_string(gap) + ", invariance " + std::to_string(std::max(inv1, inv2));
      }));
    }
  }
  return r;
}

RegistryEntry load_example(const std::string& name) {
  RegistryEntry e = load_problem(example_document(name));
  EntryReport r = check_entry(e);
  for (const auto& c : r.checks) {
    if (!c.ok) throw Error("example '" + name + "' failed check '" + c.name + "'" + (c.detail.empty() ? "" : ": " + c.detail));
  }
  return e;
}

nlohmann::json to_json(const RegistryEntry& entry) { return entry.document; }

CauchyProblem RegistryEntry::problem(const std::map<std::string, std::string>& overrides) const {
  if (!cauchy || !rep) throw InputError(name + ": no Cauchy data");
  const CauchyTemplate& t = *cauchy;
  for (const auto& [fn, body] : overrides) {
    bool known = std::any_of(t.functions.begin(), t.functions.end(), [&](const FunctionSlot& s) { return s.name == fn; });
    if (!known) throw InputError(name + ": unknown function '" + fn + "'");
  }
  CauchyProblem p(system, rep, SmoothMap(t.parameters, chart(), t.data));
  p.hat = hat;
  p.check = check;
  p.ranges = t.ranges;
  p.base_point = t.base_point;
  p.fiber = t.fiber;
  p.fiber_point = t.fiber_point;
  p.parametrization = t.parametrization;
  p.fiber1 = t.fiber1;
  p.fiber2 = t.fiber2;
  p.n1 = t.n1;
  p.n2 = t.n2;
  p.pde = t.pde;
  p.method = integrator.method;
  p.rk = integrator.rk;
  p.padding = integrator.padding;
  p.seed = integrator.seed;
  for (const auto& slot : t.functions) {
    auto it = overrides.find(slot.name);
    std::optional<std::string> body = it != overrides.end() ? std::optional<std::string>(it->second) : slot.body;
    if (!body) throw InputError(name + ": function '" + slot.name + "' is not bound");
    std::vector<std::string_view> params(slot.params.begin(), slot.params.end());
    try {
      p.functions.bind_text(slot.name, params, *body);
    } catch (const ParseError& ex) {
      throw InputError("function '" + slot.name + "': " + ex.what());
    }
  }
  return p;
}

SolutionSurface solve_route(const CauchyProblem& problem, const std::string& route) {
  if (route == "quotient") return solve(problem);
  if (route == "decomposable") return solve_decomposable(problem);
  if (route == "second-method") return solve_second_method(problem);
  throw InputError("unknown route '" + route + "'");
}

double oracle_error(const Oracle& oracle, const SolutionSurface& surface, const Binding& functions, int n1, int n2) {
  SurfaceGrid grid = sample_grid(surface, n1, n2);
  const Chart& m = *surface.chart();
  std::vector<SymbolId> names;
  for (const auto& v : oracle.variables) names.push_back(intern(v));
  std::vector<std::size_t> var_index, comp_index;
  if (oracle.kind == Oracle::Kind::Graph) {
    for (const auto& v : oracle.variables) var_index.push_back(m.index(v));
  }
  for (const auto& [name, e] : oracle.components) comp_index.push_back(m.index(name));
  Evaluator ev(functions);
  double worst = 0.0;
  std::size_t k = 0;
  for (const auto& t1 : grid.t1) {
    for (const auto& t2 : grid.t2) {
      const auto& point = grid.values[k++];
      std::vector<double> vals;
      if (oracle.kind == Oracle::Kind::Graph) {
        for (std::size_t i : var_index) vals.push_back(point[i]);
      } else {
        vals = t1;
        vals.insert(vals.end(), t2.begin(), t2.end());
      }
      if (vals.size() != names.size()) throw InputError("oracle: expected " + std::to_string(names.size()) + " variables");
      for (std::size_t c = 0; c < oracle.components.size(); ++c) {
        double expected = ev(oracle.components[c].second, names, vals);
        worst = std::max(worst, std::fabs(expected - point[comp_index[c]]));
      }
    }
  }
  return worst;
}

}  // namespace darboux
