#include "darboux/symcore/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <unordered_map>

#include "darboux/symcore/calculus.hpp"

namespace darboux {

namespace {

// Laurent monomial in kernels, times at most one exponential.
struct Mono {
  std::vector<std::pair<Expr, int>> k;  // sorted by compare(), nonzero powers
  Expr e;                               // exponent of exp(); zero when absent
};

bool has_exp(const Mono& m) { return !m.e.is_zero(); }

int degree(const Mono& m) {
  int d = 0;
  for (const auto& [k, p] : m.k) d += p;
  return d;
}

// Graded lex order on kernel powers; exponential-free monomials rank above
// those carrying an exponential so that normalized factors lead without one.
int cmp_mono(const Mono& a, const Mono& b) {
  int da = degree(a);
  int db = degree(b);
  if (da != db) return da < db ? -1 : 1;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.k.size() || j < b.k.size()) {
    int c = 0;
    if (i == a.k.size()) {
      c = 1;
    } else if (j == b.k.size()) {
      c = -1;
    } else {
      c = compare(a.k[i].first, b.k[j].first);
    }
    if (c == 0) {
      if (a.k[i].second != b.k[j].second) return a.k[i].second < b.k[j].second ? -1 : 1;
      ++i;
      ++j;
    } else if (c < 0) {
      return a.k[i].second > 0 ? 1 : -1;
    } else {
      return b.k[j].second > 0 ? -1 : 1;
    }
  }
  bool ae = has_exp(a);
  bool be = has_exp(b);
  if (ae != be) return ae ? -1 : 1;
  return ae ? compare(a.e, b.e) : 0;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const { return cmp_mono(a, b) < 0; }
};

using Poly = std::map<Mono, Number, MonoLess>;

int cmp_number(const Number& a, const Number& b) {
  if (a.value() != b.value()) return a.value() < b.value() ? -1 : 1;
  if (a.is_exact() != b.is_exact()) return a.is_exact() ? -1 : 1;
  return 0;
}

int cmp_poly(const Poly& a, const Poly& b) {
  auto ia = a.rbegin();
  auto ib = b.rbegin();
  for (; ia != a.rend() && ib != b.rend(); ++ia, ++ib) {
    int c = cmp_mono(ia->first, ib->first);
    if (c != 0) return c;
    c = cmp_number(ia->second, ib->second);
    if (c != 0) return c;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

void add_term(Poly& p, const Mono& m, const Number& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = p.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
  }
}

bool has_float(const Poly& p) {
  return std::any_of(p.begin(), p.end(), [](const auto& t) { return !t.second.is_exact(); });
}

bool any_exp(const Poly& p) {
  return std::any_of(p.begin(), p.end(), [](const auto& t) { return has_exp(t.first); });
}

// Rational function: Laurent numerator over a product of normalized factors.
struct RF {
  Poly num;
  std::vector<std::pair<Poly, int>> den;  // sorted by cmp_poly
};

RF rf_const(const Number& n) {
  RF r;
  add_term(r.num, Mono{}, n);
  return r;
}

RF rf_kernel(const Expr& k) {
  RF r;
  Mono m;
  m.k.emplace_back(k, 1);
  r.num.emplace(std::move(m), Number(1));
  return r;
}

bool is_zero_rf(const RF& r) { return r.num.empty(); }

bool depends(const Mono& m, SymbolId t) {
  for (const auto& [k, p] : m.k) {
    if (depends_on(k, t)) return true;
  }
  return has_exp(m) && depends_on(m.e, t);
}

bool depends(const Poly& p, SymbolId t) {
  return std::any_of(p.begin(), p.end(), [&](const auto& term) { return depends(term.first, t); });
}

class Simplifier {
 public:
  Expr run(const Expr& e) {
    RF r = rf(e);
    cancel(r);
    merge_integrals(r.num);
    return to_expr(r);
  }

  RF rf(const Expr& e) {
    auto it = memo_.find(e.get());
    if (it != memo_.end()) return it->second.second;
    RF r = compute(e);
    memo_.emplace(e.get(), std::make_pair(e, r));
    return r;
  }

  Expr simplified(const Expr& e) { return run(e); }

 private:
  RF compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Number:
        return rf_const(e.number());
      case NodeKind::Variable:
        return rf_kernel(e);
      case NodeKind::Add: {
        RF acc;
        for (const auto& t : e.operands()) acc = rf_add(acc, rf(t));
        return acc;
      }
      case NodeKind::Mul: {
        RF acc = rf_const(Number(1));
        for (const auto& f : e.operands()) {
          acc = rf_mul(acc, rf(f));
          if (is_zero_rf(acc)) break;
        }
        return acc;
      }
      case NodeKind::Pow:
        return power(e);
      case NodeKind::Function:
        return function_rf(e);
      case NodeKind::Apply: {
        std::vector<Expr> args;
        for (const auto& a : e.operands()) args.push_back(simplified(a));
        return rf_kernel(apply(e.symbol(), std::move(args), std::vector<int>(e.orders().begin(), e.orders().end())));
      }
      case NodeKind::Integral:
        return integral_rf(e);
    }
    return rf_const(Number(0));
  }

  // ---- monomial and polynomial arithmetic ----

  Expr exp_sum(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return simplified(add({a, b}));
  }

  Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.k.size() || j < b.k.size()) {
      int c = 0;
      if (i == a.k.size()) {
        c = 1;
      } else if (j == b.k.size()) {
        c = -1;
      } else {
        c = compare(a.k[i].first, b.k[j].first);
      }
      if (c < 0) {
        r.k.push_back(a.k[i++]);
      } else if (c > 0) {
        r.k.push_back(b.k[j++]);
      } else {
        int p = a.k[i].second + b.k[j].second;
        if (p != 0) r.k.emplace_back(a.k[i].first, p);
        ++i;
        ++j;
      }
    }
    r.e = exp_sum(a.e, b.e);
    return r;
  }

  Mono mono_inverse(const Mono& a) {
    Mono r;
    for (const auto& [k, p] : a.k) r.k.emplace_back(k, -p);
    if (has_exp(a)) r.e = simplified(-a.e);
    return r;
  }

  Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a) {
      for (const auto& [mb, cb] : b) add_term(r, mono_mul(ma, mb), ca * cb);
    }
    return r;
  }

  Poly poly_scale(const Poly& a, const Mono& m, const Number& c) {
    Poly r;
    for (const auto& [ma, ca] : a) add_term(r, mono_mul(ma, m), ca * c);
    return r;
  }

  Poly poly_pow(const Poly& a, int n) {
    Poly r;
    r.emplace(Mono{}, Number(1));
    Poly base = a;
    while (n > 0) {
      if (n & 1) r = poly_mul(r, base);
      n >>= 1;
      if (n > 0) base = poly_mul(base, base);
    }
    return r;
  }

  static void poly_add_into(Poly& a, const Poly& b) {
    for (const auto& [m, c] : b) add_term(a, m, c);
  }

  // P = c * m * p with p exponential-led-free, content-free and monic.
  struct Normalized {
    Number c;
    Mono m;
    Poly p;
  };

  Normalized normalize(const Poly& P) {
    Normalized out;
    // Kernel content: minimum power of each kernel across terms.
    std::vector<std::pair<Expr, int>> content;
    bool first = true;
    for (const auto& [m, c] : P) {
      if (first) {
        content = m.k;
        first = false;
        continue;
      }
      std::vector<std::pair<Expr, int>> next;
      std::size_t i = 0;
      std::size_t j = 0;
      while (i < content.size() || j < m.k.size()) {
        int cmpv = 0;
        if (i == content.size()) {
          cmpv = 1;
        } else if (j == m.k.size()) {
          cmpv = -1;
        } else {
          cmpv = compare(content[i].first, m.k[j].first);
        }
        if (cmpv < 0) {
          if (content[i].second < 0) next.push_back(content[i]);
          ++i;
        } else if (cmpv > 0) {
          if (m.k[j].second < 0) next.push_back(m.k[j]);
          ++j;
        } else {
          int p = std::min(content[i].second, m.k[j].second);
          if (p != 0) next.emplace_back(content[i].first, p);
          ++i;
          ++j;
        }
      }
      content = std::move(next);
    }
    out.m.k = content;
    const Mono& lead = P.rbegin()->first;
    if (has_exp(lead)) out.m.e = lead.e;
    Mono shift = mono_inverse(out.m);
    Poly q;
    for (const auto& [m, c] : P) add_term(q, mono_mul(m, shift), c);
    out.c = q.rbegin()->second;
    Number inv = Number(1) / out.c;
    for (auto& [m, c] : q) c = c * inv;
    out.p = std::move(q);
    return out;
  }

  static bool is_one_poly(const Poly& p) {
    return p.size() == 1 && p.begin()->first.k.empty() && !has_exp(p.begin()->first) && p.begin()->second.is_one();
  }

  static std::vector<std::pair<Poly, int>> merge_den(const std::vector<std::pair<Poly, int>>& a,
                                                     const std::vector<std::pair<Poly, int>>& b, bool max_power) {
    std::vector<std::pair<Poly, int>> r;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
      int c = 0;
      if (i == a.size()) {
        c = 1;
      } else if (j == b.size()) {
        c = -1;
      } else {
        c = cmp_poly(a[i].first, b[j].first);
      }
      if (c < 0) {
        r.push_back(a[i++]);
      } else if (c > 0) {
        r.push_back(b[j++]);
      } else {
        int p = max_power ? std::max(a[i].second, b[j].second) : a[i].second + b[j].second;
        r.emplace_back(a[i].first, p);
        ++i;
        ++j;
      }
    }
    return r;
  }

  // Product of the factors of `lcm` in excess of those in `part`.
  Poly cofactor(const std::vector<std::pair<Poly, int>>& lcm, const std::vector<std::pair<Poly, int>>& part) {
    Poly r;
    r.emplace(Mono{}, Number(1));
    for (const auto& [D, p] : lcm) {
      int have = 0;
      for (const auto& [E, q] : part) {
        if (cmp_poly(D, E) == 0) have = q;
      }
      if (p > have) r = poly_mul(r, poly_pow(D, p - have));
    }
    return r;
  }

  RF rf_add(const RF& a, const RF& b) {
    if (is_zero_rf(a)) return b;
    if (is_zero_rf(b)) return a;
    RF r;
    if (a.den.empty() && b.den.empty()) {
      r.num = a.num;
      poly_add_into(r.num, b.num);
      return r;
    }
    r.den = merge_den(a.den, b.den, true);
    r.num = poly_mul(a.num, cofactor(r.den, a.den));
    poly_add_into(r.num, poly_mul(b.num, cofactor(r.den, b.den)));
    if (r.num.empty()) return RF{};
    cancel(r);
    return r;
  }

  RF rf_mul(const RF& a, const RF& b) {
    if (is_zero_rf(a) || is_zero_rf(b)) return RF{};
    RF r;
    r.num = poly_mul(a.num, b.num);
    if (r.num.empty()) return RF{};
    r.den = merge_den(a.den, b.den, false);
    if (!r.den.empty()) cancel(r);
    return r;
  }

  RF rf_inv(const RF& a) {
    if (is_zero_rf(a)) return rf_kernel(pow(Expr(0), Expr(-1)));
    Normalized n = normalize(a.num);
    RF r;
    Poly top;
    top.emplace(Mono{}, Number(1));
    for (const auto& [D, p] : a.den) top = poly_mul(top, poly_pow(D, p));
    r.num = poly_scale(top, mono_inverse(n.m), Number(1) / n.c);
    if (!is_one_poly(n.p)) r.den.emplace_back(std::move(n.p), 1);
    cancel(r);
    return r;
  }

  RF rf_pow(const RF& a, std::int64_t n) {
    if (n == 0) return rf_const(Number(1));
    if (n < 0) return rf_pow(rf_inv(a), -n);
    RF r = rf_const(Number(1));
    RF base = a;
    while (n > 0) {
      if (n & 1) r = rf_mul(r, base);
      n >>= 1;
      if (n > 0) base = rf_mul(base, base);
    }
    return r;
  }

  RF rf_exp(const Expr& E) {
    if (E.is_zero()) return rf_const(Number(1));
    if (E.is_number() && !E.number().is_exact()) return rf_const(Number(std::exp(E.number().value())));
    RF r;
    Mono m;
    m.e = E;
    r.num.emplace(std::move(m), Number(1));
    return r;
  }

  // ---- exact division used to cancel denominator factors ----

  static std::optional<Mono> mono_divide(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.k.size() || j < b.k.size()) {
      int c = 0;
      if (i == a.k.size()) {
        c = 1;
      } else if (j == b.k.size()) {
        c = -1;
      } else {
        c = compare(a.k[i].first, b.k[j].first);
      }
      if (c < 0) {
        r.k.push_back(a.k[i++]);
      } else if (c > 0) {
        return std::nullopt;
      } else {
        int p = a.k[i].second - b.k[j].second;
        if (p < 0) return std::nullopt;
        if (p > 0) r.k.emplace_back(a.k[i].first, p);
        ++i;
        ++j;
      }
    }
    return r;
  }

  std::optional<Poly> try_divide(const Poly& N, const Poly& D) {
    if (N.size() > 400 || any_exp(N) || any_exp(D) || has_float(N) || has_float(D)) return std::nullopt;
    // Shift N to non-negative powers; D is content-free already.
    Mono shift;
    for (const auto& [m, c] : N) {
      for (const auto& [k, p] : m.k) {
        if (p >= 0) continue;
        auto it = std::find_if(shift.k.begin(), shift.k.end(), [&](const auto& s) { return s.first == k; });
        if (it == shift.k.end()) {
          shift.k.emplace_back(k, -p);
        } else {
          it->second = std::max(it->second, -p);
        }
      }
    }
    std::sort(shift.k.begin(), shift.k.end(), [](const auto& x, const auto& y) { return compare(x.first, y.first) < 0; });
    Poly R = shift.k.empty() ? N : poly_scale(N, shift, Number(1));
    Poly Q;
    const auto& [lm, lc] = *D.rbegin();
    for (int guard = 0; guard < 20000; ++guard) {
      if (R.empty()) {
        if (shift.k.empty()) return Q;
        return poly_scale(Q, mono_inverse(shift), Number(1));
      }
      const auto& [rm, rc] = *R.rbegin();
      auto t = mono_divide(rm, lm);
      if (!t) return std::nullopt;
      Number coef = rc / lc;
      Mono tm = *t;
      add_term(Q, tm, coef);
      for (const auto& [dm, dc] : D) add_term(R, mono_mul(dm, tm), -(dc * coef));
    }
    return std::nullopt;
  }

  void cancel(RF& r) {
    if (r.num.empty()) {
      r.den.clear();
      return;
    }
    std::vector<std::pair<Poly, int>> kept;
    for (auto& [D, p] : r.den) {
      while (p > 0) {
        auto q = try_divide(r.num, D);
        if (!q) break;
        r.num = std::move(*q);
        --p;
      }
      if (p > 0) kept.emplace_back(std::move(D), p);
    }
    r.den = std::move(kept);
  }

  // ---- node kinds ----

  RF power(const Expr& e) {
    Expr x = simplified(e.exponent());
    if (x.is_number() && x.number().is_integer()) {
      std::int64_t n = x.number().numerator();
      RF b = rf(e.base());
      bool monomial = b.den.empty() && b.num.size() == 1;
      if (monomial || std::llabs(n) <= 16) return rf_pow(b, n);
      return rf_kernel(pow(simplified(e.base()), x));
    }
    Expr b = simplified(e.base());
    if (b.is_number() && x.is_number() && (!b.number().is_exact() || !x.number().is_exact())) {
      double v = std::pow(b.number().value(), x.number().value());
      if (std::isfinite(v)) return rf_const(Number(v));
    }
    if (b.is_one()) return rf_const(Number(1));
    if (b.kind() == NodeKind::Function && b.builtin() == Builtin::Exp) {
      return rf_exp(simplified(b.operands()[0] * x));
    }
    if (x.is_number() && x.number().is_exact()) {
      const Number& r = x.number();
      Expr root = pow(b, Expr(Number::rational(1, r.denominator())));
      return rf_pow(rf_kernel(root), r.numerator());
    }
    return rf_kernel(pow(b, x));
  }

  RF function_rf(const Expr& e) {
    const Expr& arg = e.operands()[0];
    switch (e.builtin()) {
      case Builtin::Exp: {
        Expr E = simplified(arg);
        if (E.is_number()) {
          if (!E.number().is_exact()) return rf_const(Number(std::exp(E.number().value())));
          return rf_exp(E);
        }
        std::vector<Expr> terms;
        if (E.kind() == NodeKind::Add) {
          terms.assign(E.operands().begin(), E.operands().end());
        } else {
          terms.push_back(E);
        }
        RF acc = rf_const(Number(1));
        std::vector<Expr> rest;
        bool split = false;
        for (const auto& t : terms) {
          if (t.kind() == NodeKind::Function && t.builtin() == Builtin::Log) {
            acc = rf_mul(acc, rf(t.operands()[0]));
            split = true;
          } else if (t.kind() == NodeKind::Mul && t.operands().size() == 2 && t.operands()[0].is_number() &&
                     t.operands()[0].number().is_integer() && t.operands()[1].kind() == NodeKind::Function &&
                     t.operands()[1].builtin() == Builtin::Log) {
            acc = rf_mul(acc, rf_pow(rf(t.operands()[1].operands()[0]), t.operands()[0].number().numerator()));
            split = true;
          } else {
            rest.push_back(t);
          }
        }
        if (!split) return rf_exp(E);
        return rf_mul(acc, rf_exp(simplified(add(std::move(rest)))));
      }
      case Builtin::Log: {
        Expr a = simplified(arg);
        if (a.kind() == NodeKind::Function && a.builtin() == Builtin::Exp) return rf(a.operands()[0]);
        if (a.is_one()) return rf_const(Number(0));
        if (a.is_number() && !a.number().is_exact() && a.number().value() > 0) {
          return rf_const(Number(std::log(a.number().value())));
        }
        return rf_kernel(log(a));
      }
      case Builtin::Sin:
      case Builtin::Cos: {
        Expr a = simplified(arg);
        if (a.is_number() && !a.number().is_exact()) {
          double v = a.number().value();
          return rf_const(Number(e.builtin() == Builtin::Sin ? std::sin(v) : std::cos(v)));
        }
        return rf_kernel(function(e.builtin(), a));
      }
      case Builtin::Sqrt:
        return rf(pow(arg, Expr(Number::rational(1, 2))));
    }
    return rf_kernel(e);
  }

  // ---- definite integrals ----

  std::optional<Expr> closed_integral(const Mono& dep, const std::vector<std::pair<Poly, int>>& dep_den, SymbolId t,
                                      const Expr& lo, const Expr& hi) {
    Expr tv = var(t);
    auto definite = [&](const Expr& F) { return substitute(F, t, hi) - substitute(F, t, lo); };
    if (dep_den.empty()) {
      if (!has_exp(dep)) {
        if (dep.k.empty()) return hi - lo;
        if (dep.k.size() != 1) return std::nullopt;
        const auto& [k, p] = dep.k.front();
        if (k == tv) {
          if (p == -1) return log(hi / lo);
          return definite(pow(tv, Expr(p + 1)) / Expr(p + 1));
        }
        if (k.kind() == NodeKind::Apply && p == 1) {
          auto args = k.operands();
          for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] != tv || k.orders()[i] < 1) continue;
            bool others = true;
            for (std::size_t j = 0; j < args.size(); ++j) {
              if (j != i && depends_on(args[j], t)) others = false;
            }
            if (!others) continue;
            std::vector<int> ord(k.orders().begin(), k.orders().end());
            --ord[i];
            return definite(apply(k.symbol(), std::vector<Expr>(args.begin(), args.end()), std::move(ord)));
          }
        }
        return std::nullopt;
      }
      int p = 0;
      if (dep.k.size() > 1) return std::nullopt;
      if (dep.k.size() == 1) {
        if (dep.k.front().first != tv) return std::nullopt;
        p = dep.k.front().second;
        if (p < 0 || p > 8) return std::nullopt;
      }
      Expr a = simplified(differentiate(dep.e, t));
      if (a.is_zero() || depends_on(a, t)) return std::nullopt;
      Expr sum;
      Number fact(1);
      for (int k = 0; k <= p; ++k) {
        // (-1)^k p!/(p-k)! t^(p-k) / a^(k+1)
        Expr term = Expr(k % 2 == 0 ? fact : -fact) * pow(tv, Expr(p - k)) / pow(a, Expr(k + 1));
        sum = sum + term;
        fact = fact * Number(p - k);
      }
      return definite(exp(dep.e) * sum);
    }
    if (dep_den.size() == 1 && dep_den.front().second == 1 && dep.k.empty() && !has_exp(dep)) {
      Expr D = poly_expr(dep_den.front().first);
      Expr a = simplified(differentiate(D, t));
      if (a.is_zero() || depends_on(a, t)) return std::nullopt;
      return log(substitute(D, t, hi) / substitute(D, t, lo)) / a;
    }
    return std::nullopt;
  }

  // c when the integrand is a single one-argument f(t + c) with c free of t.
  std::optional<Expr> translation(const Mono& dep, const std::vector<std::pair<Poly, int>>& dep_den, SymbolId t) {
    if (!dep_den.empty() || has_exp(dep) || dep.k.size() != 1 || dep.k.front().second != 1) return std::nullopt;
    const Expr& k = dep.k.front().first;
    if (k.kind() != NodeKind::Apply || k.operands().size() != 1) return std::nullopt;
    const Expr& arg = k.operands()[0];
    if (arg == var(t)) return std::nullopt;
    Expr c = simplified(arg - var(t));
    if (depends_on(c, t)) return std::nullopt;
    return c;
  }

  // Split m into factors free of t and factors depending on t.
  std::pair<Mono, Mono> split(const Mono& m, SymbolId t) {
    Mono indep;
    Mono dep;
    for (const auto& kp : m.k) (depends_on(kp.first, t) ? dep : indep).k.push_back(kp);
    if (has_exp(m)) {
      if (m.e.kind() == NodeKind::Add) {
        std::vector<Expr> a;
        std::vector<Expr> b;
        for (const auto& term : m.e.operands()) (depends_on(term, t) ? b : a).push_back(term);
        indep.e = a.empty() ? Expr(0) : simplified(add(std::move(a)));
        dep.e = b.empty() ? Expr(0) : simplified(add(std::move(b)));
      } else if (depends_on(m.e, t)) {
        dep.e = m.e;
      } else {
        indep.e = m.e;
      }
    }
    return {indep, dep};
  }

  RF integral_rf(const Expr& e) {
    Expr lo = simplified(e.lower());
    Expr hi = simplified(e.upper());
    if (lo == hi) return RF{};
    SymbolId t = e.symbol();
    RF body = rf(e.body());
    cancel(body);
    if (is_zero_rf(body)) return RF{};
    std::vector<std::pair<Poly, int>> dep_den;
    std::vector<std::pair<Poly, int>> indep_den;
    for (const auto& f : body.den) (depends(f.first, t) ? dep_den : indep_den).push_back(f);
    std::map<Mono, Poly, MonoLess> groups;
    for (const auto& [m, c] : body.num) {
      auto [indep, dep] = split(m, t);
      add_term(groups[dep], indep, c);
    }
    RF total;
    for (const auto& [dep, indep] : groups) {
      if (indep.empty()) continue;
      RF factor;
      factor.num = indep;
      RF piece;
      if (auto closed = closed_integral(dep, dep_den, t, lo, hi)) {
        piece = rf(*closed);
      } else {
        RF integrand;
        integrand.num.emplace(dep, Number(1));
        integrand.den = dep_den;
        Expr body_expr = to_expr(integrand);
        Expr a = lo;
        Expr b = hi;
        if (auto c = translation(dep, dep_den, t)) {
          a = simplified(lo + *c);
          b = simplified(hi + *c);
          body_expr = apply(dep.k.front().first.symbol(), {var(t)},
                            std::vector<int>(dep.k.front().first.orders().begin(), dep.k.front().first.orders().end()));
        }
        piece = rf_kernel(integral(a, b, body_expr, t));
      }
      total = rf_add(total, rf_mul(factor, piece));
    }
    if (!indep_den.empty()) {
      RF scale = rf_const(Number(1));
      scale.den = indep_den;
      total = rf_mul(total, scale);
    }
    return total;
  }

  // ---- adjacent integrals ----

  static bool is_integral_kernel(const std::pair<Expr, int>& kp) {
    return kp.second == 1 && kp.first.kind() == NodeKind::Integral;
  }

  bool same_integrand(const Expr& a, const Expr& b) {
    if (a.symbol() == b.symbol()) return a.body() == b.body();
    return simplified(substitute(b.body(), b.symbol(), var(a.symbol()))) == a.body();
  }

  // Mono without its integral kernel at position i.
  static Mono without(const Mono& m, std::size_t i) {
    Mono r = m;
    r.k.erase(r.k.begin() + static_cast<std::ptrdiff_t>(i));
    return r;
  }

  // c m ∫_a^b f + c m ∫_b^d f and c m ∫_a^b f − c m ∫_a^d f (or with a shared upper
  // limit) collapse into a single integral.
  void merge_integrals(Poly& p) {
    for (int round = 0; round < 16; ++round) {
      bool changed = false;
      for (auto it1 = p.begin(); it1 != p.end() && !changed; ++it1) {
        for (std::size_t i1 = 0; i1 < it1->first.k.size() && !changed; ++i1) {
          if (!is_integral_kernel(it1->first.k[i1])) continue;
          const Expr& I1 = it1->first.k[i1].first;
          Mono rest = without(it1->first, i1);
          for (auto it2 = std::next(it1); it2 != p.end() && !changed; ++it2) {
            for (std::size_t i2 = 0; i2 < it2->first.k.size(); ++i2) {
              if (!is_integral_kernel(it2->first.k[i2])) continue;
              const Expr& I2 = it2->first.k[i2].first;
              if (cmp_mono(rest, without(it2->first, i2)) != 0) continue;
              const Number& c1 = it1->second;
              const Number& c2 = it2->second;
              bool same = cmp_number(c1, c2) == 0;
              bool opposite = cmp_number(c1, -c2) == 0;
              if (!same && !opposite) continue;
              // In the opposite case, P is the term with positive coefficient.
              bool flip = opposite && !same && c1.value() < 0;
              const Expr& P = flip ? I2 : I1;
              const Expr& N = flip ? I1 : I2;
              std::optional<std::pair<Expr, Expr>> limits;
              if (same && I1.upper() == I2.lower()) limits.emplace(I1.lower(), I2.upper());
              if (same && !limits && I2.upper() == I1.lower()) limits.emplace(I2.lower(), I1.upper());
              if (opposite && !same && P.lower() == N.lower()) limits.emplace(N.upper(), P.upper());
              if (opposite && !same && !limits && P.upper() == N.upper()) limits.emplace(P.lower(), N.lower());
              if (!limits || !same_integrand(I1, I2)) continue;
              Number c = flip ? c2 : c1;
              Expr merged = integral(limits->first, limits->second, I1.body(), I1.symbol());
              RF piece = integral_rf(merged);
              p.erase(it2);
              p.erase(it1);
              if (piece.den.empty()) {
                poly_add_into(p, poly_scale(piece.num, rest, c));
              } else {
                Poly back;
                add_term(back, rest, c);
                Mono k;
                k.k.emplace_back(merged, 1);
                poly_add_into(p, poly_scale(back, k, Number(1)));
              }
              changed = true;
              break;
            }
          }
        }
      }
      if (!changed) return;
    }
  }

  // ---- back to expressions ----

  Expr mono_expr(const Mono& m, const Number& c) {
    std::vector<Expr> f;
    f.emplace_back(c);
    for (const auto& [k, p] : m.k) {
      if (k.kind() == NodeKind::Pow && k.exponent().is_number() && k.exponent().number().is_exact() &&
          std::llabs(p) >= k.exponent().number().denominator()) {
        refold_ = true;
      }
      f.push_back(pow(k, Expr(p)));
    }
    if (has_exp(m)) f.push_back(exp(m.e));
    return mul(std::move(f));
  }

  Expr poly_expr(const Poly& p) {
    std::vector<Expr> terms;
    for (auto it = p.rbegin(); it != p.rend(); ++it) terms.push_back(mono_expr(it->first, it->second));
    return add(std::move(terms));
  }

  Expr to_expr(const RF& r) {
    std::vector<Expr> f;
    f.push_back(poly_expr(r.num));
    for (const auto& [D, p] : r.den) f.push_back(pow(poly_expr(D), Expr(-p)));
    return mul(std::move(f));
  }


 public:
  /// Set when output folded a root power into an integer power.
  bool refold_ = false;

 private:
  std::unordered_map<const Node*, std::pair<Expr, RF>> memo_;
};

}  // namespace

Expr simplify(const Expr& e) {
  Simplifier s;
  Expr out = s.run(e);
  // Root powers can fold to integer powers on output; iterate to the fixed point.
  bool again = s.refold_;
  for (int i = 0; i < 4 && again; ++i) {
    Simplifier next;
    out = next.run(out);
    again = next.refold_;
  }
  return out;
}

}  // namespace darboux
