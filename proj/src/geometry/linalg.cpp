#include "darboux/geometry/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "darboux/error.hpp"
#include "darboux/symcore/probe.hpp"
#include "darboux/symcore/simplify.hpp"

namespace darboux {

namespace {

std::vector<MultiIndex> basis_indices(std::size_t n, int k) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < static_cast<int>(n); ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

std::vector<Expr> all_entries(const ExprMatrix& m) {
  std::vector<Expr> out;
  for (const auto& row : m) {
    for (const auto& e : row) {
      if (!e.is_number()) out.push_back(e);
    }
  }
  return out;
}

}  // namespace

ProbeSet::ProbeSet(ChartPtr chart, const std::vector<Expr>& exprs, const RankOptions& options)
    : chart_(std::move(chart)), threshold_(options.threshold) {
  std::mt19937_64 rng(options.seed);
  Binding functions;
  if (options.fixed) functions = *options.fixed;
  std::vector<Expr> checked = exprs;
  for (const auto& c : chart_->constraints()) checked.push_back(c.expr);
  bind_generic_functions(functions, checked, rng);
  ProbeOptions po = chart_->probe_options(options.seed, options.fixed);
  po.max_attempts = options.max_attempts;
  for (int i = 0; i < options.points; ++i) points_.push_back(draw_probe(exprs, po, rng, functions));
}

std::vector<double> ProbeSet::coordinates(std::size_t i) const {
  std::vector<double> out;
  for (SymbolId s : chart_->coords()) {
    auto it = points_[i].variables.find(s);
    out.push_back(it == points_[i].variables.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
  }
  return out;
}

Eigen::MatrixXd evaluate_matrix(const ExprMatrix& m, std::size_t cols, const Binding& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
  Evaluator ev(b);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Expr& e = m[i][j];
      if (!e.is_zero()) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ev(e);
    }
  }
  return out;
}

int numeric_rank(Eigen::MatrixXd m, double threshold) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double n = m.row(i).norm();
    if (n > 0) m.row(i) /= n;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold * s(0)) ++r;
  }
  return r;
}

Eigen::MatrixXd numeric_null_space(const Eigen::MatrixXd& m, double threshold) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(0) > 0 && s(i) > threshold * s(0)) ++r;
  }
  return svd.matrixV().rightCols(n - r);
}

std::size_t basis_size(const Chart& chart, int degree) { return basis_indices(chart.dim(), degree).size(); }

ExprMatrix coefficient_rows(const std::vector<DifferentialForm>& forms) {
  ExprMatrix rows;
  if (forms.empty()) return rows;
  const int k = forms.front().degree();
  auto basis = basis_indices(forms.front().chart()->dim(), k);
  std::map<MultiIndex, std::size_t> column;
  for (std::size_t i = 0; i < basis.size(); ++i) column[basis[i]] = i;
  for (const auto& f : forms) {
    std::vector<Expr> row(basis.size(), Expr(0));
    if (!f.is_zero() && f.degree() != k) throw Error("coefficient_rows: mixed form degrees");
    for (const auto& [idx, c] : f.terms()) row[column.at(idx)] = c;
    rows.push_back(std::move(row));
  }
  return rows;
}

ExprMatrix coefficient_rows(const std::vector<VectorField>& fields) {
  ExprMatrix rows;
  for (const auto& x : fields) rows.push_back(x.components());
  return rows;
}

RankReport generic_rank(const ProbeSet& probes, const ExprMatrix& rows, std::size_t cols) {
  RankReport rep;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    int r = numeric_rank(evaluate_matrix(rows, cols, probes[p]), probes.threshold());
    rep.per_probe.push_back(r);
    if (r > rep.rank) rep.rank = r;
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (rep.per_probe[p] != rep.rank) {
      rep.constant = false;
      rep.witness = probes.coordinates(p);
      break;
    }
  }
  return rep;
}

RankReport generic_rank(ChartPtr chart, const std::vector<DifferentialForm>& forms, const RankOptions& options) {
  if (forms.empty()) return {};
  ExprMatrix rows = coefficient_rows(forms);
  ProbeSet probes(chart, all_entries(rows), options);
  return generic_rank(probes, rows, basis_size(*chart, forms.front().degree()));
}

RankReport generic_rank(ChartPtr chart, const std::vector<VectorField>& fields, const RankOptions& options) {
  if (fields.empty()) return {};
  ExprMatrix rows = coefficient_rows(fields);
  ProbeSet probes(chart, all_entries(rows), options);
  return generic_rank(probes, rows, chart->dim());
}

bool span_contains(const ProbeSet& probes, const ExprMatrix& basis, const ExprMatrix& candidates, std::size_t cols) {
  ExprMatrix all = basis;
  all.insert(all.end(), candidates.begin(), candidates.end());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    int rb = numeric_rank(evaluate_matrix(basis, cols, probes[p]), probes.threshold());
    int ra = numeric_rank(evaluate_matrix(all, cols, probes[p]), probes.threshold());
    if (ra != rb) return false;
  }
  return true;
}

bool span_contains(ChartPtr chart, const std::vector<DifferentialForm>& basis, const std::vector<DifferentialForm>& candidates,
                   const RankOptions& options) {
  if (candidates.empty()) return true;
  int k = candidates.front().degree();
  std::vector<DifferentialForm> all = basis;
  all.insert(all.end(), candidates.begin(), candidates.end());
  ExprMatrix rows = coefficient_rows(all);
  ExprMatrix b(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(basis.size()));
  ExprMatrix c(rows.begin() + static_cast<std::ptrdiff_t>(basis.size()), rows.end());
  ProbeSet probes(chart, all_entries(rows), options);
  return span_contains(probes, b, c, basis_size(*chart, k));
}

ReducedMatrix row_reduce(const ExprMatrix& m, std::size_t cols, const ProbeSet& probes) {
  const std::size_t nr = m.size();
  const std::size_t np = probes.size();
  ExprMatrix r(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < cols; ++j) r[i].push_back(simplify(m[i][j]));
  }
  // Numeric shadows of the elimination at each probe, with a magnitude bound
  // for deciding whether an entry vanishes up to round-off.
  std::vector<Eigen::MatrixXd> num(np), mag(np);
  for (std::size_t p = 0; p < np; ++p) {
    num[p] = evaluate_matrix(r, cols, probes[p]);
    mag[p] = num[p].cwiseAbs();
  }
  const double tol = std::max(probes.threshold(), 1e-12) * 10.0;
  auto nonzero = [&](std::size_t i, std::size_t j, double& weakest) {
    if (r[i][j].is_zero()) return false;
    double best = 0.0;
    weakest = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < np; ++p) {
      auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      double rel = std::fabs(num[p](ii, jj)) / std::max(mag[p](ii, jj), 1e-300);
      best = std::max(best, rel);
      weakest = std::min(weakest, std::fabs(num[p](ii, jj)));
    }
    if (np == 0) return true;
    return best > tol;
  };

  std::vector<bool> used(nr, false), pivot_col(cols, false);
  std::vector<std::pair<std::size_t, std::size_t>> order;
  while (true) {
    std::size_t bi = nr, bj = cols;
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    double best_weak = -1.0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (used[i]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (pivot_col[j]) continue;
        double weak = 0.0;
        if (!nonzero(i, j, weak)) continue;
        std::size_t size = r[i][j].is_number() ? 0 : r[i][j].size();
        if (size < best_size || (size == best_size && weak > best_weak)) {
          bi = i;
          bj = j;
          best_size = size;
          best_weak = weak;
        }
      }
    }
    if (bi == nr) break;
    used[bi] = true;
    pivot_col[bj] = true;
    order.emplace_back(bi, bj);
    const Expr piv = r[bi][bj];
    const auto ei = static_cast<Eigen::Index>(bi), ej = static_cast<Eigen::Index>(bj);
    for (std::size_t k = 0; k < cols; ++k) {
      if (k == bj) continue;
      if (!r[bi][k].is_zero()) r[bi][k] = simplify(r[bi][k] / piv);
    }
    r[bi][bj] = Expr(1);
    for (std::size_t p = 0; p < np; ++p) {
      double pv = num[p](ei, ej);
      num[p].row(ei) /= pv;
      mag[p].row(ei) /= std::fabs(pv);
      num[p](ei, ej) = 1.0;
    }
    for (std::size_t i = 0; i < nr; ++i) {
      if (i == bi || r[i][bj].is_zero()) continue;
      const Expr f = r[i][bj];
      for (std::size_t k = 0; k < cols; ++k) {
        if (k == bj || r[bi][k].is_zero()) continue;
        r[i][k] = simplify(r[i][k] - f * r[bi][k]);
      }
      r[i][bj] = Expr(0);
      for (std::size_t p = 0; p < np; ++p) {
        const auto ii = static_cast<Eigen::Index>(i);
        double fv = num[p](ii, ej);
        num[p].row(ii) -= fv * num[p].row(ei);
        mag[p].row(ii) = mag[p].row(ii).cwiseMax(std::fabs(fv) * mag[p].row(ei));
        num[p](ii, ej) = 0.0;
      }
    }
  }
  ReducedMatrix out;
  out.cols = cols;
  for (auto [i, j] : order) {
    out.rows.push_back(r[i]);
    out.pivots.push_back(j);
  }
  return out;
}

ExprMatrix null_space(const ExprMatrix& m, std::size_t cols, const ProbeSet& probes) {
  ReducedMatrix red = row_reduce(m, cols, probes);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t j : red.pivots) is_pivot[j] = true;
  ExprMatrix basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Expr> v(cols, Expr(0));
    v[f] = Expr(1);
    for (std::size_t k = 0; k < red.rows.size(); ++k) v[red.pivots[k]] = simplify(-red.rows[k][f]);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<VectorField> annihilator(ChartPtr chart, const std::vector<DifferentialForm>& forms, const RankOptions& options) {
  std::vector<VectorField> out;
  if (forms.empty()) {
    for (std::size_t i = 0; i < chart->dim(); ++i) out.push_back(VectorField::coordinate(chart, i));
    return out;
  }
  for (const auto& f : forms) require_same_chart(*chart, *f.chart(), "annihilator");
  ExprMatrix rows = coefficient_rows(forms);
  ProbeSet probes(chart, all_entries(rows), options);
  RankReport rep = generic_rank(probes, rows, chart->dim());
  if (!rep.constant) throw RankError("rank of the system drops on the domain", rep.witness);
  ExprMatrix ns = null_space(rows, chart->dim(), probes);
  if (ns.size() != chart->dim() - static_cast<std::size_t>(rep.rank)) {
    throw RankError("symbolic elimination disagrees with the probed rank");
  }
  for (auto& v : ns) out.emplace_back(chart, std::move(v));
  return out;
}

}  // namespace darboux
