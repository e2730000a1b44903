#include "darboux/geometry/chart.hpp"

#include <cmath>
#include <unordered_set>

#include "darboux/error.hpp"

namespace darboux {

Chart::Chart(std::string name, const std::vector<std::string>& coordinates, std::vector<Constraint> constraints)
    : name_(std::move(name)), constraints_(std::move(constraints)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : coordinates) {
    if (!seen.insert(c).second) throw ChartMismatch("duplicate coordinate '" + c + "' in chart " + name_);
    coords_.push_back(intern(c));
  }
  ranges_.assign(coords_.size(), {-2.0, 2.0});
}

std::vector<std::string> Chart::coord_names() const {
  std::vector<std::string> out;
  for (SymbolId s : coords_) out.push_back(symbol_name(s));
  return out;
}

bool Chart::has(SymbolId s) const {
  for (SymbolId c : coords_) {
    if (c == s) return true;
  }
  return false;
}

std::size_t Chart::index(SymbolId s) const {
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i] == s) return i;
  }
  throw ChartMismatch("coordinate '" + symbol_name(s) + "' is not on chart " + name_);
}

void Chart::set_range(SymbolId s, double lo, double hi) { ranges_.at(index(s)) = {lo, hi}; }

std::pair<double, double> Chart::range(SymbolId s) const { return ranges_.at(index(s)); }

bool Chart::admissible(const Binding& b) const {
  for (const auto& c : constraints_) {
    double v = 0.0;
    try {
      v = evaluate(c.expr, b);
    } catch (const EvalError&) {
      return false;
    }
    if (c.kind == Constraint::Kind::Positive && !(v > 1e-6)) return false;
    if (c.kind == Constraint::Kind::Nonzero && !(std::fabs(v) > 1e-6)) return false;
  }
  return true;
}

ProbeOptions Chart::probe_options(std::uint64_t seed, const Binding* fixed) const {
  ProbeOptions o;
  o.seed = seed;
  o.fixed = fixed;
  // Coordinates and constraints are copied so the sampler outlives the chart reference.
  auto coords = coords_;
  auto ranges = ranges_;
  Chart self = *this;
  o.sampler = [coords, ranges, self](Binding& b, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      b.variables[coords[i]] = random_rational(rng, ranges[i].first, ranges[i].second);
    }
    return self.admissible(b);
  };
  return o;
}

ChartPtr Chart::product(const Chart& a, const Chart& b, std::string name) {
  std::vector<std::string> coords = a.coord_names();
  for (const auto& n : b.coord_names()) coords.push_back(n);
  std::vector<Constraint> cons = a.constraints();
  for (const auto& c : b.constraints()) cons.push_back(c);
  if (name.empty()) name = a.name() + "x" + b.name();
  auto p = std::make_shared<Chart>(name, coords, cons);
  for (std::size_t i = 0; i < a.dim(); ++i) p->ranges_[i] = a.ranges_[i];
  for (std::size_t i = 0; i < b.dim(); ++i) p->ranges_[a.dim() + i] = b.ranges_[i];
  return p;
}

ChartPtr make_chart(std::string name, const std::vector<std::string>& coordinates, std::vector<Constraint> constraints) {
  return std::make_shared<Chart>(std::move(name), coordinates, std::move(constraints));
}

void require_same_chart(const Chart& a, const Chart& b, const char* what) {
  if (!a.same_coordinates(b)) throw ChartMismatch(std::string(what) + ": charts " + a.name() + " and " + b.name() + " differ");
}

}  // namespace darboux
