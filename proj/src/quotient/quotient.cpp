#include "darboux/quotient/quotient.hpp"

#include <cmath>

#include "darboux/error.hpp"

namespace darboux {

namespace {

std::vector<Expr> nonconstant(const std::vector<Expr>& in) {
  std::vector<Expr> out;
  for (const auto& e : in) {
    if (!e.is_number()) out.push_back(e);
  }
  return out;
}

std::vector<Expr> form_entries(const std::vector<DifferentialForm>& forms) {
  std::vector<Expr> out;
  for (const auto& f : forms) {
    for (const auto& [idx, c] : f.terms()) {
      if (!c.is_number()) out.push_back(c);
    }
  }
  return out;
}

double snap(double v) {
  double r = std::round(v);
  return std::fabs(v - r) < 1e-10 ? r : v;
}

Eigen::VectorXd field_values(const VectorField& x, Evaluator& ev) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.components().size()));
  for (std::size_t i = 0; i < x.components().size(); ++i) out(static_cast<Eigen::Index>(i)) = ev(x[i]);
  return out;
}

}  // namespace

GroupAction::GroupAction(ChartPtr chart, std::vector<VectorField> generators, RankOptions options)
    : chart_(std::move(chart)), gens_(std::move(generators)) {
  const std::size_t r = gens_.size();
  c_.assign(r, std::vector<std::vector<double>>(r, std::vector<double>(r, 0.0)));
  if (r == 0) return;
  for (const auto& g : gens_) require_same_chart(*chart_, *g.chart(), "group action");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<VectorField> brackets;
  std::vector<Expr> exprs;
  for (const auto& g : gens_) {
    for (const auto& e : nonconstant(g.components())) exprs.push_back(e);
  }
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      pairs.emplace_back(i, j);
      brackets.push_back(bracket(gens_[i], gens_[j]).simplified());
      for (const auto& e : nonconstant(brackets.back().components())) exprs.push_back(e);
    }
  }
  if (pairs.empty()) return;
  ProbeSet probes(chart_, exprs, options);
  const auto dim = static_cast<Eigen::Index>(chart_->dim());
  const auto np = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd a(np * dim, static_cast<Eigen::Index>(r));
  Eigen::MatrixXd b(np * dim, static_cast<Eigen::Index>(pairs.size()));
  for (Eigen::Index p = 0; p < np; ++p) {
    Evaluator ev(probes[static_cast<std::size_t>(p)]);
    for (std::size_t i = 0; i < r; ++i) a.block(p * dim, static_cast<Eigen::Index>(i), dim, 1) = field_values(gens_[i], ev);
    for (std::size_t k = 0; k < pairs.size(); ++k) b.block(p * dim, static_cast<Eigen::Index>(k), dim, 1) = field_values(brackets[k], ev);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> dec(a);
  if (dec.rank() < static_cast<Eigen::Index>(r)) throw Error("group generators are linearly dependent");
  Eigen::MatrixXd sol = dec.solve(b);
  Eigen::MatrixXd res = a * sol - b;
  for (Eigen::Index k = 0; k < res.cols(); ++k) {
    double scale = std::max(1.0, b.col(k).cwiseAbs().maxCoeff());
    closure_ = std::max(closure_, res.col(k).cwiseAbs().maxCoeff() / scale);
  }
  if (closure_ > 1e-8) throw Error("brackets of the group generators do not close (residual " + std::to_string(closure_) + ")");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [i, j] = pairs[k];
    for (std::size_t m = 0; m < r; ++m) {
      double v = snap(sol(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)));
      c_[i][j][m] = v;
      c_[j][i][m] = -v;
    }
  }
}

double GroupAction::jacobi_residual() const {
  const std::size_t r = c_.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t l = 0; l < r; ++l) {
          double s = 0.0;
          for (std::size_t m = 0; m < r; ++m) {
            s += c_[i][j][m] * c_[m][k][l] + c_[j][k][m] * c_[m][i][l] + c_[k][i][m] * c_[m][j][l];
          }
          worst = std::max(worst, std::fabs(s));
        }
      }
    }
  }
  return worst;
}

bool same_structure(const StructureConstants& a, const StructureConstants& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::fabs(a[i][j][k] - b[i][j][k]) > tol) return false;
      }
    }
  }
  return true;
}

bool is_solvable(const StructureConstants& c) {
  const auto r = static_cast<Eigen::Index>(c.size());
  if (r == 0) return true;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(r, r);
  while (basis.cols() > 0) {
    const Eigen::Index n = basis.cols();
    Eigen::MatrixXd br(r, std::max<Eigen::Index>(n * (n - 1) / 2, 1));
    br.setZero();
    Eigen::Index col = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a + 1; b < n; ++b) {
        for (Eigen::Index i = 0; i < r; ++i) {
          for (Eigen::Index j = 0; j < r; ++j) {
            double w = basis(i, a) * basis(j, b);
            if (w == 0.0) continue;
            for (Eigen::Index k = 0; k < r; ++k) br(k, col) += w * c[i][j][k];
          }
        }
        ++col;
      }
    }
    if (br.cwiseAbs().maxCoeff() < 1e-12) return true;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(br, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > 1e-9 * s(0)) ++rank;
    }
    if (rank >= n) return false;
    basis = svd.matrixU().leftCols(rank);
  }
  return true;
}

DifferentialForm lift_form(const DifferentialForm& a, const ChartPtr& product) {
  return pullback(SmoothMap::projection(product, a.chart()), a);
}

VectorField lift_field(const VectorField& x, const ChartPtr& product) {
  std::vector<Expr> comps(product->dim(), Expr(0));
  const ChartPtr& src = x.chart();
  for (std::size_t i = 0; i < src->dim(); ++i) comps[product->index(src->coord(i))] = x[i];
  return VectorField(product, std::move(comps));
}

PfaffianSystem sum_system(const PfaffianSystem& k1, const PfaffianSystem& k2) {
  return sum_system(k1, k2, Chart::product(*k1.chart(), *k2.chart()));
}

PfaffianSystem sum_system(const PfaffianSystem& k1, const PfaffianSystem& k2, const ChartPtr& product) {
  std::vector<DifferentialForm> gens;
  for (const auto& g : k1.generators()) gens.push_back(lift_form(g, product));
  for (const auto& g : k2.generators()) gens.push_back(lift_form(g, product));
  return PfaffianSystem(product, std::move(gens), k1.options());
}

bool verify_symmetry(const GroupAction& action, const PfaffianSystem& k) {
  require_same_chart(*action.chart(), *k.chart(), "symmetry check");
  std::vector<DifferentialForm> images;
  for (const auto& x : action.generators()) {
    for (const auto& theta : k.generators()) {
      auto l = lie_derivative(x, theta).simplified();
      if (!l.is_zero()) images.push_back(l);
    }
  }
  if (images.empty()) return true;
  if (k.generators().empty()) return false;
  return span_contains(k.chart(), k.generators(), images, k.options());
}

bool verify_transversality(const GroupAction& action, const PfaffianSystem& system) {
  require_same_chart(*action.chart(), *system.chart(), "transversality check");
  const auto& chart = system.chart();
  std::vector<VectorField> fields = action.generators();
  for (auto& f : system.annihilator()) fields.push_back(std::move(f));
  const int expected = static_cast<int>(action.dimension() + chart->dim()) - system.rank();
  if (fields.empty()) return expected == 0;
  RankReport rep = generic_rank(chart, fields, system.options());
  if (!rep.constant) throw RankError("generators plus annihilator do not have constant rank", rep.witness);
  return rep.rank == expected;
}

QuotientRepresentation::QuotientRepresentation(PfaffianSystem k1, PfaffianSystem k2, GroupAction g1, GroupAction g2,
                                               ChartPtr base, std::vector<Expr> q_components)
    : k1_(std::move(k1)),
      k2_(std::move(k2)),
      g1_(std::move(g1)),
      g2_(std::move(g2)),
      product_(Chart::product(*k1_.chart(), *k2_.chart())),
      q_(product_, std::move(base), std::move(q_components)) {
  require_same_chart(*g1_.chart(), *k1_.chart(), "first factor action");
  require_same_chart(*g2_.chart(), *k2_.chart(), "second factor action");
  if (g1_.dimension() != g2_.dimension()) throw Error("factor actions have different dimensions");
  if (!same_structure(g1_.structure(), g2_.structure(), 1e-9)) throw Error("factor actions have different structure constants");
  if (product_->dim() != q_.target()->dim() + g1_.dimension()) {
    throw Error("dim(M1 x M2) - dim G = " + std::to_string(product_->dim() - g1_.dimension()) + " but dim M = " +
                std::to_string(q_.target()->dim()));
  }
}

GroupAction QuotientRepresentation::diagonal() const {
  std::vector<VectorField> gens;
  for (std::size_t i = 0; i < g1_.dimension(); ++i) {
    gens.push_back(lift_field(g1_.generators()[i], product_) + lift_field(g2_.generators()[i], product_));
  }
  return GroupAction(product_, std::move(gens), k1_.options());
}

PfaffianSystem QuotientRepresentation::sum() const { return sum_system(k1_, k2_, product_); }

PfaffianSystem QuotientRepresentation::hat_w() const {
  std::vector<DifferentialForm> gens;
  for (const auto& g : k1_.generators()) gens.push_back(lift_form(g, product_));
  for (std::size_t i = 0; i < m2()->dim(); ++i) gens.push_back(DifferentialForm::differential(product_, product_->index(m2()->coord(i))));
  return PfaffianSystem(product_, std::move(gens), k1_.options());
}

PfaffianSystem QuotientRepresentation::check_w() const {
  std::vector<DifferentialForm> gens;
  for (std::size_t i = 0; i < m1()->dim(); ++i) gens.push_back(DifferentialForm::differential(product_, product_->index(m1()->coord(i))));
  for (const auto& g : k2_.generators()) gens.push_back(lift_form(g, product_));
  return PfaffianSystem(product_, std::move(gens), k1_.options());
}

QuotientCheck verify_quotient_map(const QuotientRepresentation& rep, const PfaffianSystem& system) {
  require_same_chart(*rep.base(), *system.chart(), "quotient check");
  QuotientCheck out;
  const SmoothMap& q = rep.q();
  ChartPtr domain = q.pulled_domain();
  PfaffianSystem sum = rep.sum();
  out.rank_base = system.rank();
  out.rank_sum = sum.rank();
  out.group_dimension = static_cast<int>(rep.group_dimension());
  out.rank = out.rank_base == out.rank_sum - out.group_dimension;

  std::vector<DifferentialForm> pulled;
  for (const auto& g : system.generators()) pulled.push_back(pullback(q, g));
  std::vector<Expr> exprs = form_entries(sum.generators());
  for (const auto& e : form_entries(pulled)) exprs.push_back(e);
  for (const auto& e : nonconstant(q.components())) exprs.push_back(e);
  ProbeSet probes(domain, exprs, system.options());
  ExprMatrix rows = coefficient_rows(sum.generators());
  ExprMatrix both = rows;
  for (auto& row : coefficient_rows(pulled)) both.push_back(std::move(row));
  RankReport base_rank = generic_rank(probes, rows, domain->dim());
  RankReport with = generic_rank(probes, both, domain->dim());
  out.pullback = true;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (with.per_probe[p] != base_rank.per_probe[p]) {
      out.pullback = false;
      out.pullback_witness = probes.coordinates(p);
      break;
    }
  }

  GroupAction diag = rep.diagonal();
  out.invariance = true;
  for (std::size_t p = 0; p < probes.size() && out.invariance; ++p) {
    Evaluator ev(probes[p]);
    for (const auto& x : diag.generators()) {
      for (const auto& comp : q.components()) {
        double sum_terms = 0.0, sum_abs = 0.0;
        for (std::size_t i = 0; i < domain->dim(); ++i) {
          if (x[i].is_zero()) continue;
          double t = ev(x[i]) * ev(differentiate(comp, domain->coord(i)));
          sum_terms += t;
          sum_abs += std::fabs(t);
        }
        double res = std::fabs(sum_terms) / std::max(1.0, sum_abs);
        out.invariance_residual = std::max(out.invariance_residual, res);
        if (res > 1e-9 && out.invariance) {
          out.invariance = false;
          out.invariance_witness = probes.coordinates(p);
        }
      }
    }
  }
  return out;
}

bool verify_singular_correspondence(const QuotientRepresentation& rep, const PfaffianSystem& hat, const PfaffianSystem& check) {
  const SmoothMap& q = rep.q();
  ChartPtr domain = q.pulled_domain();
  const int r = static_cast<int>(rep.group_dimension());
  auto inside = [&](const PfaffianSystem& v, const PfaffianSystem& w) {
    require_same_chart(*v.chart(), *rep.base(), "singular correspondence");
    if (v.rank() != w.rank() - r) return false;
    std::vector<DifferentialForm> pulled;
    for (const auto& g : v.generators()) {
      auto f = pullback(q, g);
      if (!f.is_zero()) pulled.push_back(f);
    }
    if (pulled.empty()) return true;
    return span_contains(domain, w.generators(), pulled, v.options());
  };
  return inside(hat, rep.hat_w()) && inside(check, rep.check_w());
}

PushforwardCheck verify_annihilator_pushforward(const SmoothMap& q, const PfaffianSystem& w, const PfaffianSystem& v, int points) {
  require_same_chart(*q.source(), *w.chart(), "annihilator pushforward");
  require_same_chart(*q.target(), *v.chart(), "annihilator pushforward");
  PushforwardCheck out;
  const ChartPtr& target = q.target();
  const auto tdim = static_cast<Eigen::Index>(target->dim());
  out.expected_rank = static_cast<int>(target->dim()) - v.rank();
  std::vector<VectorField> ann = w.annihilator();
  auto jac = q.jacobian();
  std::vector<Expr> exprs = nonconstant(q.components());
  for (const auto& row : jac) {
    for (const auto& e : nonconstant(row)) exprs.push_back(e);
  }
  for (const auto& x : ann) {
    for (const auto& e : nonconstant(x.components())) exprs.push_back(e);
  }
  RankOptions opt = w.options();
  opt.points = points;
  ProbeSet probes(q.pulled_domain(), exprs, opt);
  ExprMatrix vrows = coefficient_rows(v.generators());
  const std::size_t sdim = q.source()->dim();
  for (std::size_t p = 0; p < probes.size(); ++p) {
    Evaluator ev(probes[p]);
    Eigen::MatrixXd j(tdim, static_cast<Eigen::Index>(sdim));
    for (Eigen::Index a = 0; a < tdim; ++a) {
      for (std::size_t b = 0; b < sdim; ++b) j(a, static_cast<Eigen::Index>(b)) = ev(jac[static_cast<std::size_t>(a)][b]);
    }
    Eigen::MatrixXd fields(static_cast<Eigen::Index>(sdim), static_cast<Eigen::Index>(ann.size()));
    for (std::size_t k = 0; k < ann.size(); ++k) fields.col(static_cast<Eigen::Index>(k)) = field_values(ann[k], ev);
    Eigen::MatrixXd pushed = j * fields;
    int rank = pushed.cols() == 0 ? 0 : numeric_rank(pushed.transpose(), opt.threshold);
    out.pushed_rank.push_back(rank);

    Binding image = probes[p];
    std::vector<double> values;
    for (const auto& c : q.components()) values.push_back(ev(c));
    for (std::size_t i = 0; i < target->dim(); ++i) image.variables[target->coord(i)] = values[i];
    Eigen::MatrixXd vm = evaluate_matrix(vrows, target->dim(), image);
    for (Eigen::Index g = 0; g < vm.rows(); ++g) {
      double gn = vm.row(g).norm();
      if (gn == 0.0) continue;
      for (Eigen::Index k = 0; k < pushed.cols(); ++k) {
        double xn = pushed.col(k).norm();
        if (xn == 0.0) continue;
        out.annihilation = std::max(out.annihilation, std::fabs(vm.row(g).dot(pushed.col(k))) / (gn * xn));
      }
    }
    bool good = rank == out.expected_rank && out.annihilation < 1e-8;
    if (!good && out.ok) {
      out.ok = false;
      out.witness = probes.coordinates(p);
    }
    ++out.points;
  }
  return out;
}

}  // namespace darboux
