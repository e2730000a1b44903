#include "darboux/symcore/expr.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

#include "darboux/error.hpp"

namespace darboux {

struct Node {
  NodeKind kind = NodeKind::Number;
  Number num;
  SymbolId sym = 0;
  Builtin fn = Builtin::Exp;
  std::vector<Expr> ops;
  std::vector<int> ord;
  std::size_t hash = 0;
  std::size_t size = 1;
};

namespace {

constexpr std::size_t kFnvOffset = 1469598103934665603ULL;
constexpr std::size_t kFnvPrime = 1099511628211ULL;

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::size_t fnv(std::string_view s) {
  std::size_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

struct SymbolTable {
  std::shared_mutex mutex;
  std::deque<std::string> names;
  std::vector<std::size_t> hashes;
  std::unordered_map<std::string, SymbolId> ids;
  std::size_t fresh_counter = 0;
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

std::size_t number_hash(const Number& n) {
  if (n.is_exact()) {
    return mix(std::hash<std::int64_t>{}(n.numerator()), std::hash<std::int64_t>{}(n.denominator()));
  }
  double v = n.value();
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  return mix(0x51ed27ULL, bits);
}

bool same_number(const Number& a, const Number& b) {
  return a.is_exact() == b.is_exact() && a.value() == b.value();
}

void finalize(Node& n) {
  std::size_t h = mix(kFnvOffset, static_cast<std::size_t>(n.kind));
  std::size_t size = 1;
  switch (n.kind) {
    case NodeKind::Number:
      h = mix(h, number_hash(n.num));
      break;
    case NodeKind::Variable:
      h = mix(h, symbol_hash(n.sym));
      break;
    case NodeKind::Function:
      h = mix(h, static_cast<std::size_t>(n.fn));
      break;
    case NodeKind::Apply:
      h = mix(h, symbol_hash(n.sym));
      for (int o : n.ord) h = mix(h, static_cast<std::size_t>(o));
      break;
    case NodeKind::Integral:
      h = mix(h, symbol_hash(n.sym));
      break;
    default:
      break;
  }
  for (const auto& c : n.ops) {
    h = mix(h, c.hash());
    size += c.size();
  }
  n.hash = h;
  n.size = size;
}

const Expr& zero_expr() {
  static const Expr z(Number(0));
  return z;
}

bool is_negative_number(const Expr& e) { return e.is_number() && e.number().is_negative(); }

}  // namespace

Expr make_node(Node&& n) {
  finalize(n);
  return Expr(std::make_shared<const Node>(std::move(n)));
}

SymbolId intern(std::string_view name) {
  auto& t = table();
  {
    std::shared_lock lock(t.mutex);
    auto it = t.ids.find(std::string(name));
    if (it != t.ids.end()) return it->second;
  }
  std::unique_lock lock(t.mutex);
  auto it = t.ids.find(std::string(name));
  if (it != t.ids.end()) return it->second;
  auto id = static_cast<SymbolId>(t.names.size());
  t.names.emplace_back(name);
  t.hashes.push_back(fnv(name));
  t.ids.emplace(std::string(name), id);
  return id;
}

const std::string& symbol_name(SymbolId id) {
  auto& t = table();
  std::shared_lock lock(t.mutex);
  return t.names.at(id);
}

std::size_t symbol_hash(SymbolId id) {
  auto& t = table();
  std::shared_lock lock(t.mutex);
  return t.hashes.at(id);
}

SymbolId fresh_symbol(std::string_view stem) {
  auto& t = table();
  while (true) {
    std::string name;
    {
      std::unique_lock lock(t.mutex);
      name = std::string(stem) + "__" + std::to_string(++t.fresh_counter);
      if (t.ids.count(name)) continue;
    }
    return intern(name);
  }
}

std::string_view builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Exp: return "exp";
    case Builtin::Log: return "log";
    case Builtin::Sin: return "sin";
    case Builtin::Cos: return "cos";
    case Builtin::Sqrt: return "sqrt";
  }
  return "?";
}

Expr::Expr() : Expr(zero_expr()) {}

Expr::Expr(Number n) {
  Node node;
  node.kind = NodeKind::Number;
  node.num = n;
  finalize(node);
  node_ = std::make_shared<const Node>(std::move(node));
}

NodeKind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return is_number() && node_->num.is_zero(); }
bool Expr::is_one() const { return is_number() && node_->num.is_one(); }
const Number& Expr::number() const { return node_->num; }
SymbolId Expr::symbol() const { return node_->sym; }
Builtin Expr::builtin() const { return node_->fn; }
std::span<const Expr> Expr::operands() const { return node_->ops; }
std::span<const int> Expr::orders() const { return node_->ord; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }

namespace {

int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::Number: return 0;
    case NodeKind::Variable: return 1;
    case NodeKind::Apply: return 2;
    case NodeKind::Function: return 3;
    case NodeKind::Pow: return 4;
    case NodeKind::Mul: return 5;
    case NodeKind::Add: return 6;
    case NodeKind::Integral: return 7;
  }
  return 8;
}

int cmp_names(SymbolId a, SymbolId b) {
  if (a == b) return 0;
  int c = symbol_name(a).compare(symbol_name(b));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  int ka = kind_rank(a.kind());
  int kb = kind_rank(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case NodeKind::Number: {
      const Number& x = a.number();
      const Number& y = b.number();
      if (x.value() != y.value()) return x.value() < y.value() ? -1 : 1;
      if (x.is_exact() != y.is_exact()) return x.is_exact() ? -1 : 1;
      return 0;
    }
    case NodeKind::Variable:
      return cmp_names(a.symbol(), b.symbol());
    case NodeKind::Apply: {
      int c = cmp_names(a.symbol(), b.symbol());
      if (c != 0) return c;
      auto oa = a.orders();
      auto ob = b.orders();
      if (oa.size() != ob.size()) return oa.size() < ob.size() ? -1 : 1;
      for (std::size_t i = 0; i < oa.size(); ++i) {
        if (oa[i] != ob[i]) return oa[i] < ob[i] ? -1 : 1;
      }
      break;
    }
    case NodeKind::Function:
      if (a.builtin() != b.builtin()) return a.builtin() < b.builtin() ? -1 : 1;
      break;
    case NodeKind::Integral: {
      int c = cmp_names(a.symbol(), b.symbol());
      if (c != 0) return c;
      break;
    }
    default:
      break;
  }
  auto xa = a.operands();
  auto xb = b.operands();
  std::size_t n = std::min(xa.size(), xb.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(xa[i], xb[i]);
    if (c != 0) return c;
  }
  if (xa.size() != xb.size()) return xa.size() < xb.size() ? -1 : 1;
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  if (a.is_number()) return same_number(a.number(), b.number());
  return compare(a, b) == 0;
}

Expr var(SymbolId id) {
  Node n;
  n.kind = NodeKind::Variable;
  n.sym = id;
  return make_node(std::move(n));
}

Expr var(std::string_view name) { return var(intern(name)); }

Expr add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  Number constant(0);
  bool has_constant = false;
  for (auto& t : terms) {
    if (t.kind() == NodeKind::Add) {
      for (const auto& s : t.operands()) {
        if (s.is_number()) {
          constant += s.number();
          has_constant = true;
        } else {
          flat.push_back(s);
        }
      }
    } else if (t.is_number()) {
      constant += t.number();
      has_constant = true;
    } else {
      flat.push_back(std::move(t));
    }
  }
  // A float zero from folding is kept so that inexactness is not silently dropped.
  if (has_constant && !(constant.is_zero() && (constant.is_exact() || !flat.empty()))) {
    flat.emplace_back(constant);
  }
  if (flat.empty()) return Expr(0);
  if (flat.size() == 1) return flat.front();
  Node n;
  n.kind = NodeKind::Add;
  n.ops = std::move(flat);
  return make_node(std::move(n));
}

Expr mul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  flat.reserve(factors.size());
  Number constant(1);
  for (auto& f : factors) {
    if (f.kind() == NodeKind::Mul) {
      for (const auto& s : f.operands()) {
        if (s.is_number()) {
          constant *= s.number();
        } else {
          flat.push_back(s);
        }
      }
    } else if (f.is_number()) {
      constant *= f.number();
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (constant.is_zero()) return Expr(constant);
  if (flat.empty()) return Expr(constant);
  if (!constant.is_one() || !constant.is_exact()) flat.insert(flat.begin(), Expr(constant));
  if (flat.size() == 1) return flat.front();
  Node n;
  n.kind = NodeKind::Mul;
  n.ops = std::move(flat);
  return make_node(std::move(n));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_number()) {
    const Number& e = exponent.number();
    if (e.is_zero() && e.is_exact()) return Expr(1);
    if (e.is_one() && e.is_exact()) return base;
    if (base.is_number()) {
      const Number& b = base.number();
      if (e.is_integer() && !(b.is_zero() && e.is_negative())) return Expr(b.pow(e.numerator()));
      if (b.is_one() && b.is_exact()) return Expr(1);
    }
    if (e.is_integer() && base.kind() == NodeKind::Pow && base.exponent().is_number()) {
      const Number& inner = base.exponent().number();
      if (inner.is_exact()) return pow(base.base(), Expr(inner * e));
    }
  }
  Node n;
  n.kind = NodeKind::Pow;
  n.ops = {base, exponent};
  return make_node(std::move(n));
}

Expr function(Builtin b, const Expr& arg) {
  if (arg.is_number() && arg.number().is_exact()) {
    const Number& v = arg.number();
    switch (b) {
      case Builtin::Exp:
        if (v.is_zero()) return Expr(1);
        break;
      case Builtin::Log:
        if (v.is_one()) return Expr(0);
        break;
      case Builtin::Sin:
        if (v.is_zero()) return Expr(0);
        break;
      case Builtin::Cos:
        if (v.is_zero()) return Expr(1);
        break;
      case Builtin::Sqrt:
        if (v.is_zero() || v.is_one()) return arg;
        break;
    }
  }
  Node n;
  n.kind = NodeKind::Function;
  n.fn = b;
  n.ops = {arg};
  return make_node(std::move(n));
}

Expr exp(const Expr& e) { return function(Builtin::Exp, e); }
Expr log(const Expr& e) { return function(Builtin::Log, e); }
Expr sin(const Expr& e) { return function(Builtin::Sin, e); }
Expr cos(const Expr& e) { return function(Builtin::Cos, e); }
Expr sqrt(const Expr& e) { return function(Builtin::Sqrt, e); }

Expr apply(SymbolId fn, std::vector<Expr> args, std::vector<int> orders) {
  if (orders.empty()) orders.assign(args.size(), 0);
  if (orders.size() != args.size()) {
    throw Error("derivative multi-index of " + symbol_name(fn) + " does not match its arity");
  }
  Node n;
  n.kind = NodeKind::Apply;
  n.sym = fn;
  n.ops = std::move(args);
  n.ord = std::move(orders);
  return make_node(std::move(n));
}

Expr apply(std::string_view fn, std::vector<Expr> args, std::vector<int> orders) {
  return apply(intern(fn), std::move(args), std::move(orders));
}

Expr integral(const Expr& lower, const Expr& upper, const Expr& body, SymbolId dummy) {
  if (lower == upper) return Expr(0);
  if (body.is_zero()) return Expr(0);
  Node n;
  n.kind = NodeKind::Integral;
  n.sym = dummy;
  n.ops = {lower, upper, body};
  return make_node(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, Expr(-1))}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }

namespace {

// Precedence levels: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom.
void print(const Expr& e, std::string& out, int parent);

bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Variable:
    case NodeKind::Apply:
    case NodeKind::Function:
    case NodeKind::Integral:
      return true;
    case NodeKind::Number: {
      const Number& n = e.number();
      return !n.is_negative() && (n.is_integer() || !n.is_exact());
    }
    default:
      return false;
  }
}

bool starts_negative(const Expr& e) {
  if (is_negative_number(e)) return true;
  return e.kind() == NodeKind::Mul && is_negative_number(e.operands()[0]);
}

Expr negate_term(const Expr& e) {
  if (e.is_number()) return Expr(-e.number());
  std::vector<Expr> f(e.operands().begin(), e.operands().end());
  f[0] = Expr(-f[0].number());
  return mul(std::move(f));
}

bool is_reciprocal(const Expr& e) {
  return e.kind() == NodeKind::Pow && e.exponent().is_number() && e.exponent().number().is_integer() &&
         e.exponent().number().is_negative();
}

void print_denominator(const Expr& p, std::string& out) {
  std::int64_t k = -p.exponent().number().numerator();
  if (k == 1) {
    print(p.base(), out, 4);
  } else {
    print(pow(p.base(), Expr(Number(k))), out, 4);
  }
}

void print_mul(const Expr& e, std::string& out) {
  auto ops = e.operands();
  std::size_t start = 0;
  std::string lead;
  if (ops[0].is_number()) {
    const Number& c = ops[0].number();
    if (c.is_exact() && c.value() == -1.0) {
      lead = "-";
    } else {
      lead = c.to_string();
    }
    start = 1;
  }
  std::vector<Expr> num;
  std::vector<Expr> den;
  for (std::size_t i = start; i < ops.size(); ++i) {
    (is_reciprocal(ops[i]) ? den : num).push_back(ops[i]);
  }
  out += lead;
  bool need_star = !lead.empty() && lead != "-";
  if (num.empty()) {
    if (lead.empty() || lead == "-") out += "1";
  } else {
    for (const auto& f : num) {
      if (need_star) out += "*";
      print(f, out, 2);
      need_star = true;
    }
  }
  for (const auto& d : den) {
    out += "/";
    print_denominator(d, out);
  }
}

void print_exponent(const Expr& x, std::string& out) {
  if (is_atom(x)) {
    print(x, out, 5);
  } else {
    out += "(";
    print(x, out, 0);
    out += ")";
  }
}

void print(const Expr& e, std::string& out, int parent) {
  int prec = 5;
  switch (e.kind()) {
    case NodeKind::Number:
      prec = e.number().is_negative() ? 3 : (e.number().is_integer() || !e.number().is_exact() ? 5 : 2);
      break;
    case NodeKind::Add: prec = 1; break;
    case NodeKind::Mul: prec = starts_negative(e) ? 1 : 2; break;
    case NodeKind::Pow: prec = is_reciprocal(e) ? 2 : 4; break;
    default: prec = 5; break;
  }
  bool paren = prec < parent;
  if (paren) out += "(";
  switch (e.kind()) {
    case NodeKind::Number:
      out += e.number().to_string();
      break;
    case NodeKind::Variable:
      out += symbol_name(e.symbol());
      break;
    case NodeKind::Add: {
      bool first = true;
      for (const auto& t : e.operands()) {
        if (first) {
          print(t, out, 1);
        } else if (starts_negative(t)) {
          out += " - ";
          print(negate_term(t), out, 2);
        } else {
          out += " + ";
          print(t, out, 2);
        }
        first = false;
      }
      break;
    }
    case NodeKind::Mul:
      print_mul(e, out);
      break;
    case NodeKind::Pow:
      if (is_reciprocal(e)) {
        out += "1/";
        print_denominator(e, out);
      } else {
        print(e.base(), out, is_atom(e.base()) ? 5 : 6);
        out += "^";
        print_exponent(e.exponent(), out);
      }
      break;
    case NodeKind::Function:
      out += builtin_name(e.builtin());
      out += "(";
      print(e.operands()[0], out, 0);
      out += ")";
      break;
    case NodeKind::Apply: {
      out += symbol_name(e.symbol());
      auto ord = e.orders();
      bool any = std::any_of(ord.begin(), ord.end(), [](int o) { return o != 0; });
      if (any) {
        if (ord.size() == 1 && ord[0] <= 3) {
          out.append(static_cast<std::size_t>(ord[0]), '\'');
        } else {
          out += "'[";
          for (std::size_t i = 0; i < ord.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(ord[i]);
          }
          out += "]";
        }
      }
      out += "(";
      bool first = true;
      for (const auto& a : e.operands()) {
        if (!first) out += ", ";
        print(a, out, 0);
        first = false;
      }
      out += ")";
      break;
    }
    case NodeKind::Integral:
      out += "int(";
      print(e.lower(), out, 0);
      out += ", ";
      print(e.upper(), out, 0);
      out += ", ";
      print(e.body(), out, 0);
      out += ", ";
      out += symbol_name(e.symbol());
      out += ")";
      break;
  }
  if (paren) out += ")";
}

void collect_free(const Expr& e, std::vector<SymbolId>& bound, std::unordered_set<SymbolId>& seen,
                  std::vector<SymbolId>& out) {
  switch (e.kind()) {
    case NodeKind::Variable:
      if (std::find(bound.begin(), bound.end(), e.symbol()) == bound.end() && seen.insert(e.symbol()).second) {
        out.push_back(e.symbol());
      }
      return;
    case NodeKind::Integral:
      collect_free(e.lower(), bound, seen, out);
      collect_free(e.upper(), bound, seen, out);
      bound.push_back(e.symbol());
      collect_free(e.body(), bound, seen, out);
      bound.pop_back();
      return;
    default:
      for (const auto& c : e.operands()) collect_free(c, bound, seen, out);
  }
}

void collect_functions(const Expr& e, std::vector<std::pair<SymbolId, std::size_t>>& out) {
  if (e.kind() == NodeKind::Apply) {
    std::pair<SymbolId, std::size_t> key{e.symbol(), e.operands().size()};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  for (const auto& c : e.operands()) collect_functions(c, out);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out, 0);
  return out;
}

std::vector<SymbolId> free_variables(const Expr& e) {
  std::vector<SymbolId> bound;
  std::unordered_set<SymbolId> seen;
  std::vector<SymbolId> out;
  collect_free(e, bound, seen, out);
  return out;
}

bool depends_on(const Expr& e, SymbolId v) {
  switch (e.kind()) {
    case NodeKind::Number:
      return false;
    case NodeKind::Variable:
      return e.symbol() == v;
    case NodeKind::Integral:
      if (depends_on(e.lower(), v) || depends_on(e.upper(), v)) return true;
      return e.symbol() != v && depends_on(e.body(), v);
    default:
      for (const auto& c : e.operands()) {
        if (depends_on(c, v)) return true;
      }
      return false;
  }
}

std::vector<std::pair<SymbolId, std::size_t>> function_symbols(const Expr& e) {
  std::vector<std::pair<SymbolId, std::size_t>> out;
  collect_functions(e, out);
  return out;
}

}  // namespace darboux
