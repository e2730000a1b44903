#include "darboux/geometry/form.hpp"

#include <algorithm>
#include <sstream>

#include "darboux/error.hpp"
#include "darboux/symcore/calculus.hpp"
#include "darboux/symcore/detail/parser.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

namespace {

// Sorts `index` in place; returns the permutation sign, or 0 on a repeated index.
int canonicalize(MultiIndex& index) {
  int sign = 1;
  for (std::size_t i = 1; i < index.size(); ++i) {
    for (std::size_t j = i; j > 0 && index[j - 1] > index[j]; --j) {
      std::swap(index[j - 1], index[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < index.size(); ++i) {
    if (index[i] == index[i - 1]) return 0;
  }
  return sign;
}

}  // namespace

DifferentialForm::DifferentialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree < 0 || static_cast<std::size_t>(degree) > chart_->dim()) {
    throw Error("form degree " + std::to_string(degree) + " invalid on chart " + chart_->name());
  }
}

DifferentialForm DifferentialForm::scalar(ChartPtr chart, const Expr& f) {
  DifferentialForm a(std::move(chart), 0);
  a.add_term({}, f);
  return a;
}

DifferentialForm DifferentialForm::differential(ChartPtr chart, std::size_t i) {
  DifferentialForm a(std::move(chart), 1);
  a.add_term({static_cast<int>(i)}, Expr(1));
  return a;
}

DifferentialForm DifferentialForm::exact(ChartPtr chart, const Expr& f) {
  DifferentialForm a(chart, 1);
  for (std::size_t i = 0; i < chart->dim(); ++i) {
    if (depends_on(f, chart->coord(i))) a.add_term({static_cast<int>(i)}, differentiate(f, chart->coord(i)));
  }
  return a;
}

DifferentialForm DifferentialForm::one_form(ChartPtr chart, const std::vector<Expr>& coeffs) {
  if (coeffs.size() != chart->dim()) throw ChartMismatch("one_form: coefficient count differs from chart dimension");
  DifferentialForm a(chart, 1);
  for (std::size_t i = 0; i < coeffs.size(); ++i) a.add_term({static_cast<int>(i)}, coeffs[i]);
  return a;
}

Expr DifferentialForm::coefficient(const MultiIndex& index) const {
  auto it = terms_.find(index);
  return it == terms_.end() ? Expr(0) : it->second;
}

std::vector<Expr> DifferentialForm::components() const {
  if (degree_ != 1) throw Error("components() requires a 1-form");
  std::vector<Expr> out(chart_->dim(), Expr(0));
  for (const auto& [idx, c] : terms_) out[idx[0]] = c;
  return out;
}

Expr DifferentialForm::as_scalar() const {
  if (degree_ != 0) throw Error("as_scalar() requires a 0-form");
  return coefficient({});
}

void DifferentialForm::add_term(MultiIndex index, const Expr& coeff) {
  if (static_cast<int>(index.size()) != degree_) throw Error("term degree does not match form degree");
  for (int i : index) {
    if (i < 0 || static_cast<std::size_t>(i) >= chart_->dim()) throw ChartMismatch("differential index outside chart");
  }
  if (coeff.is_zero()) return;
  int sign = canonicalize(index);
  if (sign == 0) return;
  Expr c = sign > 0 ? coeff : -coeff;
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    terms_.emplace(std::move(index), c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) terms_.erase(it);
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& other) {
  require_same_chart(*chart_, *other.chart_, "form sum");
  if (other.degree_ != degree_) {
    if (other.is_zero()) return *this;
    if (is_zero()) return *this = other;
    throw Error("cannot add forms of degree " + std::to_string(degree_) + " and " + std::to_string(other.degree_));
  }
  for (const auto& [idx, c] : other.terms_) add_term(idx, c);
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& other) { return *this += -other; }

DifferentialForm operator-(const DifferentialForm& a) {
  DifferentialForm r(a.chart_, a.degree_);
  for (const auto& [idx, c] : a.terms_) r.terms_.emplace(idx, -c);
  return r;
}

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
  DifferentialForm r(a.chart_, a.degree_);
  if (f.is_zero()) return r;
  for (const auto& [idx, c] : a.terms_) r.add_term(idx, f * c);
  return r;
}

DifferentialForm DifferentialForm::simplified() const {
  DifferentialForm r(chart_, degree_);
  for (const auto& [idx, c] : terms_) {
    Expr s = simplify(c);
    if (!s.is_zero()) r.terms_.emplace(idx, s);
  }
  return r;
}

std::string to_string(const DifferentialForm& a) {
  if (a.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, c] : a.terms()) {
    if (!first) out << " + ";
    first = false;
    std::string basis;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) basis += " /\\ ";
      basis += "d(" + symbol_name(a.chart()->coord(idx[k])) + ")";
    }
    if (idx.empty()) {
      out << to_string(c);
    } else if (c.is_one()) {
      out << basis;
    } else {
      out << "(" << to_string(c) << ")*" << basis;
    }
  }
  return out.str();
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(*a.chart(), *b.chart(), "wedge");
  int deg = a.degree() + b.degree();
  if (static_cast<std::size_t>(deg) > a.chart()->dim()) return DifferentialForm(a.chart(), 0);
  DifferentialForm r(a.chart(), deg);
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      MultiIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      r.add_term(std::move(idx), ca * cb);
    }
  }
  return r;
}

DifferentialForm exterior_derivative(const DifferentialForm& a) {
  const ChartPtr& chart = a.chart();
  if (static_cast<std::size_t>(a.degree()) >= chart->dim()) return DifferentialForm(chart, 0);
  DifferentialForm r(chart, a.degree() + 1);
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t i = 0; i < chart->dim(); ++i) {
      if (std::find(idx.begin(), idx.end(), static_cast<int>(i)) != idx.end()) continue;
      if (!depends_on(c, chart->coord(i))) continue;
      MultiIndex full{static_cast<int>(i)};
      full.insert(full.end(), idx.begin(), idx.end());
      r.add_term(std::move(full), differentiate(c, chart->coord(i)));
    }
  }
  return r;
}

VectorField::VectorField(ChartPtr chart, std::vector<Expr> components) : chart_(std::move(chart)), comps_(std::move(components)) {
  if (comps_.size() != chart_->dim()) throw ChartMismatch("vector field component count differs from chart dimension");
}

VectorField VectorField::coordinate(ChartPtr chart, std::size_t i) {
  std::vector<Expr> c(chart->dim(), Expr(0));
  c.at(i) = Expr(1);
  return VectorField(std::move(chart), std::move(c));
}

Expr VectorField::apply(const Expr& f) const {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (comps_[i].is_zero() || !depends_on(f, chart_->coord(i))) continue;
    terms.push_back(comps_[i] * differentiate(f, chart_->coord(i)));
  }
  return add(std::move(terms));
}

VectorField VectorField::simplified() const {
  std::vector<Expr> c;
  for (const auto& e : comps_) c.push_back(simplify(e));
  return VectorField(chart_, std::move(c));
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(*a.chart(), *b.chart(), "vector field sum");
  std::vector<Expr> c;
  for (std::size_t i = 0; i < a.comps_.size(); ++i) c.push_back(a.comps_[i] + b.comps_[i]);
  return VectorField(a.chart_, std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) { return a + Expr(-1) * b; }

VectorField operator*(const Expr& f, const VectorField& a) {
  std::vector<Expr> c;
  for (const auto& e : a.comps_) c.push_back(f * e);
  return VectorField(a.chart_, std::move(c));
}

std::string to_string(const VectorField& x) {
  std::string out;
  for (std::size_t i = 0; i < x.components().size(); ++i) {
    const Expr& c = x[i];
    if (c.is_zero()) continue;
    if (!out.empty()) out += " + ";
    std::string d = "D_" + symbol_name(x.chart()->coord(i));
    out += c.is_one() ? d : "(" + to_string(c) + ")*" + d;
  }
  return out.empty() ? "0" : out;
}

VectorField bracket(const VectorField& a, const VectorField& b) {
  require_same_chart(*a.chart(), *b.chart(), "bracket");
  std::vector<Expr> c;
  for (std::size_t i = 0; i < a.components().size(); ++i) c.push_back(a.apply(b[i]) - b.apply(a[i]));
  return VectorField(a.chart(), std::move(c));
}

DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(*x.chart(), *a.chart(), "interior product");
  if (a.degree() == 0) return DifferentialForm(a.chart(), 0);
  DifferentialForm r(a.chart(), a.degree() - 1);
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Expr& xj = x[idx[j]];
      if (xj.is_zero()) continue;
      MultiIndex rest;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k != j) rest.push_back(idx[k]);
      }
      Expr term = xj * c;
      r.add_term(std::move(rest), j % 2 == 0 ? term : -term);
    }
  }
  return r;
}

DifferentialForm lie_derivative(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(*x.chart(), *a.chart(), "Lie derivative");
  if (a.degree() == 0) return DifferentialForm::scalar(a.chart(), x.apply(a.as_scalar()));
  DifferentialForm r = interior_product(x, exterior_derivative(a));
  r += exterior_derivative(interior_product(x, a));
  return r;
}

Expr evaluate_pair(const DifferentialForm& omega, const VectorField& x, const VectorField& y) {
  if (omega.degree() != 2) throw Error("evaluate_pair requires a 2-form");
  std::vector<Expr> terms;
  for (const auto& [idx, c] : omega.terms()) {
    Expr m = x[idx[0]] * y[idx[1]] - x[idx[1]] * y[idx[0]];
    if (!m.is_zero()) terms.push_back(c * m);
  }
  return add(std::move(terms));
}

SmoothMap::SmoothMap(ChartPtr source, ChartPtr target, std::vector<Expr> components)
    : source_(std::move(source)), target_(std::move(target)), comps_(std::move(components)) {
  if (comps_.size() != target_->dim()) throw ChartMismatch("map needs one expression per target coordinate of " + target_->name());
}

SmoothMap SmoothMap::identity(ChartPtr chart) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < chart->dim(); ++i) c.push_back(chart->coord_expr(i));
  return SmoothMap(chart, chart, std::move(c));
}

SmoothMap SmoothMap::projection(ChartPtr product, ChartPtr factor) {
  std::vector<Expr> c;
  for (SymbolId s : factor->coords()) {
    product->index(s);
    c.push_back(var(s));
  }
  return SmoothMap(std::move(product), std::move(factor), std::move(c));
}

Expr SmoothMap::pull(const Expr& f) const {
  Substitution s;
  for (std::size_t i = 0; i < comps_.size(); ++i) s.variables[target_->coord(i)] = comps_[i];
  return substitute(f, s);
}

std::vector<std::vector<Expr>> SmoothMap::jacobian() const {
  std::vector<std::vector<Expr>> j;
  for (const auto& c : comps_) {
    std::vector<Expr> row;
    for (SymbolId s : source_->coords()) row.push_back(differentiate(c, s));
    j.push_back(std::move(row));
  }
  return j;
}

ChartPtr SmoothMap::pulled_domain() const {
  auto chart = std::make_shared<Chart>(*source_);
  for (const auto& c : target_->constraints()) chart->add_constraint({c.kind, pull(c.expr)});
  return chart;
}

SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  require_same_chart(*outer.source(), *inner.target(), "compose");
  std::vector<Expr> c;
  for (const auto& e : outer.components()) c.push_back(inner.pull(e));
  return SmoothMap(inner.source(), outer.target(), std::move(c));
}

DifferentialForm pullback(const SmoothMap& phi, const DifferentialForm& a) {
  require_same_chart(*phi.target(), *a.chart(), "pullback");
  const ChartPtr& src = phi.source();
  std::vector<DifferentialForm> dphi;
  for (const auto& c : phi.components()) dphi.push_back(DifferentialForm::exact(src, c));
  DifferentialForm r(src, std::min<int>(a.degree(), static_cast<int>(src->dim())));
  if (static_cast<std::size_t>(a.degree()) > src->dim()) return r;
  for (const auto& [idx, c] : a.terms()) {
    DifferentialForm term = DifferentialForm::scalar(src, phi.pull(c));
    for (int i : idx) term = wedge(term, dphi[i]);
    r += term;
  }
  return r;
}

std::vector<Expr> pushforward(const SmoothMap& phi, const VectorField& x) {
  require_same_chart(*phi.source(), *x.chart(), "pushforward");
  std::vector<Expr> out;
  for (const auto& c : phi.components()) out.push_back(x.apply(c));
  return out;
}

namespace {

struct FormAlgebra {
  using Value = DifferentialForm;
  ChartPtr chart;

  Value scalar_form(const Expr& e) const { return DifferentialForm::scalar(chart, e); }
  Expr need_scalar(const Value& v, std::size_t pos, const char* what) const {
    if (v.degree() != 0) throw ParseError(std::string(what) + " requires a scalar operand", pos);
    return v.as_scalar();
  }

  Value number(const Number& n) { return scalar_form(Expr(n)); }
  Value variable(const std::string& name, std::size_t) { return scalar_form(var(name)); }
  Value add(const Value& a, const Value& b, std::size_t pos) {
    if (a.degree() != b.degree() && !a.is_zero() && !b.is_zero()) throw ParseError("degree mismatch in sum", pos);
    return a + b;
  }
  Value sub(const Value& a, const Value& b, std::size_t pos) { return add(a, -b, pos); }
  Value mul(const Value& a, const Value& b, std::size_t pos) {
    if (a.degree() == 0) return a.as_scalar() * b;
    if (b.degree() == 0) return b.as_scalar() * a;
    throw ParseError("product of forms must use /\\", pos);
  }
  Value div(const Value& a, const Value& b, std::size_t pos) {
    Expr den = need_scalar(b, pos, "division");
    return (Expr(1) / den) * a;
  }
  Value wedge(const Value& a, const Value& b, std::size_t) { return darboux::wedge(a, b); }
  Value pow(const Value& a, const Value& b, std::size_t pos) {
    return scalar_form(darboux::pow(need_scalar(a, pos, "power"), need_scalar(b, pos, "power")));
  }
  Value neg(const Value& a, std::size_t) { return -a; }
  Value builtin(Builtin b, const Expr& arg, std::size_t) { return scalar_form(function(b, arg)); }
  Value apply(const std::string& name, std::vector<int> orders, std::vector<Expr> args, std::size_t) {
    return scalar_form(darboux::apply(name, std::move(args), std::move(orders)));
  }
  Value integral(const Expr& lo, const Expr& hi, const Expr& body, const std::string& dummy, std::size_t) {
    return scalar_form(darboux::integral(lo, hi, body, intern(dummy)));
  }
  Value differential(const Value& v, std::size_t) { return exterior_derivative(v); }
  Expr scalar(const Value& v, std::size_t pos) { return need_scalar(v, pos, "this position"); }
};

}  // namespace

DifferentialForm parse_form(std::string_view text, ChartPtr chart) {
  FormAlgebra algebra{chart};
  detail::Parser<FormAlgebra> parser(text, algebra);
  return parser.parse_all();
}

}  // namespace darboux
