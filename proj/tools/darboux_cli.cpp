#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "darboux/error.hpp"
#include "darboux/examples/registry.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace darboux;

namespace {

/// Failure inside a named pipeline stage; exit code 1.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + " stage failed: " + what), stage(stage) {}
  std::string stage;
};

template <class F>
auto stage(const std::string& name, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json load_document(const std::string& input) {
  if (fs::exists(input)) {
    std::ifstream in(input);
    if (!in) throw InputError("cannot read '" + input + "'");
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw InputError(input + ": " + e.what());
    }
  }
  auto names = example_names();
  if (std::find(names.begin(), names.end(), input) == names.end()) {
    throw InputError("'" + input + "' is neither a file nor a registry entry");
  }
  return example_document(input);
}

RegistryEntry load(const std::string& input) { return load_problem(load_document(input)); }

struct FunctionOptions {
  std::map<std::string, std::string> named;
  std::vector<std::string> generic;

  void attach(CLI::App* app) {
    for (const char* name : {"f", "g", "a", "b", "k"}) {
      app->add_option(std::string("--") + name, named[name], std::string("body of ") + name);
    }
    app->add_option("--fn", generic, "function body as name=expression");
  }

  std::map<std::string, std::string> overrides() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : named) {
      if (!v.empty()) out[k] = v;
    }
    for (const auto& g : generic) {
      auto eq = g.find('=');
      if (eq == std::string::npos || eq == 0) throw InputError("--fn expects name=expression, got '" + g + "'");
      out[g.substr(0, eq)] = g.substr(eq + 1);
    }
    return out;
  }
};

std::pair<int, int> parse_grid(const std::string& text) {
  int a = 0, b = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> a >> sep >> b) || (sep != 'x' && sep != 'X') || a < 2 || b < 2 || !in.eof()) {
    throw InputError("--grid expects N1xN2 with counts of at least 2, got '" + text + "'");
  }
  return {a, b};
}

std::string join(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

int cmd_check(const std::string& input) {
  RegistryEntry e = load(input);
  EntryReport r = stage("check", [&] { return check_entry(e); });
  std::cout << "entry: " << e.name << "\n";
  std::cout << "derived flags:\n";
  for (const auto& [name, ranks] : r.flags) std::cout << "  " << name << ": " << join(ranks) << "\n";
  if (r.darboux) {
    std::cout << "Darboux integrable: " << (r.darboux->integrable ? "yes" : "no") << "\n";
  }
  std::cout << "group dimension: " << r.group_dimension << "\n";
  std::cout << "solvable: " << (r.solvable ? "yes" : "no") << "\n";
  std::cout << "checks:\n";
  for (const auto& c : r.checks) {
    std::cout << "  " << (c.ok ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << "\n";
  }
  if (!r.ok()) {
    for (const auto& c : r.checks) {
      if (!c.ok) {
        std::cerr << "check failed: " << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
        return 1;
      }
    }
    std::cerr << "check failed\n";
    return 1;
  }
  return 0;
}

struct Stored {
  SurfaceGrid grid;
  std::vector<std::string> names;
  std::size_t dim1 = 1;
  int n1 = 0, n2 = 0;
};

std::size_t distinct(const std::vector<std::vector<double>>& rows, std::size_t col) {
  std::set<double> s;
  for (const auto& r : rows) s.insert(r[col]);
  return s.size();
}

json report_json(const RegistryEntry& e, const SolutionSurface& grid_surface, const CauchyProblem& p,
                 const Stored& st, double fd_step, const std::string& method, const std::string& route,
                 const std::string& refusal) {
  SolutionReport r = verify_solution(grid_surface, p, {st.n1, st.n2, fd_step});
  json out;
  out["entry"] = e.name;
  out["method"] = method;
  out["route"] = route;
  out["refusal"] = refusal;
  out["grid"] = {st.n1, st.n2};
  out["branch1_parameters"] = std::vector<std::string>(st.names.begin(), st.names.begin() + st.dim1);
  out["branch2_parameters"] = std::vector<std::string>(st.names.begin() + st.dim1, st.names.end());
  json res;
  json pull = json::object();
  for (std::size_t i = 0; i < r.generators.size(); ++i) pull[r.generators[i]] = r.pullback[i];
  res["pullback"] = pull;
  res["pullback_max"] = r.pullback_max;
  res["diagonal"] = r.diagonal ? json(*r.diagonal) : json(nullptr);
  res["pde"] = r.pde ? json(*r.pde) : json(nullptr);
  if (e.cauchy && e.cauchy->oracle) {
    res["oracle"] = oracle_error(*e.cauchy->oracle, grid_surface, p.functions, st.n1, st.n2);
  }
  out["residuals"] = res;
  out["grid_points"] = r.grid_points;
  out["domain_violations"] = r.domain_violations;
  out["fd_step"] = r.fd_step;
  return out;
}

void print_report(const json& r) {
  std::cout << "method: " << r["method"].get<std::string>() << "\n";
  std::cout << "route: " << r["route"].get<std::string>() << "\n";
  if (!r["refusal"].get<std::string>().empty()) std::cout << "quadrature refused: " << r["refusal"].get<std::string>() << "\n";
  const json& res = r["residuals"];
  std::cout << "pullback max: " << number(res["pullback_max"].get<double>()) << "\n";
  if (!res["diagonal"].is_null()) std::cout << "diagonal: " << number(res["diagonal"].get<double>()) << "\n";
  if (!res["pde"].is_null()) std::cout << "pde residual: " << number(res["pde"].get<double>()) << "\n";
  if (res.contains("oracle")) std::cout << "oracle error: " << number(res["oracle"].get<double>()) << "\n";
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

std::string sibling_report(const std::string& csv) { return fs::path(csv).replace_extension(".json").string(); }

struct SolveOptions {
  std::string input, grid, method, via, out, report;
  double fd_step = 0.0;
  FunctionOptions functions;
};

int cmd_solve(const SolveOptions& o) {
  RegistryEntry e = load(o.input);
  if (!e.cauchy) throw InputError(e.name + ": no cauchy section");
  CauchyProblem p = e.problem(o.functions.overrides());
  if (!o.method.empty()) p.method = parse_method(o.method);
  std::string route = o.via.empty() ? e.cauchy->route : o.via;
  if (route != "quotient" && route != "decomposable" && route != "second-method") {
    throw InputError("--via expects quotient, decomposable or second-method, got '" + route + "'");
  }
  Stored st;
  st.n1 = e.cauchy->grid1;
  st.n2 = e.cauchy->grid2;
  if (!o.grid.empty()) std::tie(st.n1, st.n2) = parse_grid(o.grid);
  double fd = o.fd_step > 0 ? o.fd_step : e.integrator.fd_step;
  std::string csv = o.out.empty() ? e.csv_path : o.out;
  std::string report = !o.report.empty() ? o.report : o.out.empty() ? e.report_path : sibling_report(csv);

  SolutionSurface s = stage("solve", [&] { return solve_route(p, route); });
  st.grid = stage("sample", [&] { return sample_grid(s, st.n1, st.n2); });
  st.names = s.parameter_names();
  st.dim1 = s.branch1().dim();
  json r = stage("verify", [&] {
    SolutionSurface g = surface_from_grid(st.grid, s.rep_ptr(), st.names, st.dim1);
    return report_json(e, g, p, st, fd, s.method(), s.route(), s.refusal);
  });
  r["csv"] = csv;
  stage("write", [&] {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write '" + csv + "'");
    std::vector<std::string> header = st.names;
    for (const auto& c : s.chart()->coord_names()) header.push_back(c);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    std::size_t n2 = st.grid.t2.size();
    for (std::size_t k = 0; k < st.grid.values.size(); ++k) {
      std::vector<double> row = st.grid.t1[k / n2];
      row.insert(row.end(), st.grid.t2[k % n2].begin(), st.grid.t2[k % n2].end());
      row.insert(row.end(), st.grid.values[k].begin(), st.grid.values[k].end());
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << number(row[i]);
      out << "\n";
    }
    write_json(r, report);
    return 0;
  });
  print_report(r);
  std::cout << "wrote " << csv << " and " << report << "\n";
  return 0;
}

Stored read_csv(const std::string& path, const ChartPtr& chart, const std::string& report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto coords = chart->coord_names();
  if (header.size() <= coords.size() + 1) throw InputError(path + ": column mismatch with chart " + chart->name());
  std::size_t k = header.size() - coords.size();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (header[k + i] != coords[i]) {
      throw InputError(path + ": column mismatch, expected '" + coords[i] + "' but found '" + header[k + i] + "'");
    }
  }
  Stored st;
  st.names.assign(header.begin(), header.begin() + k);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError(path + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != header.size()) throw InputError(path + ": row " + std::to_string(rows.size() + 1) + " has the wrong width");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no rows");

  if (fs::exists(report)) {
    std::ifstream rin(report);
    try {
      json r = json::parse(rin);
      st.dim1 = r.at("branch1_parameters").size();
    } catch (const json::exception& e) {
      throw InputError(report + ": " + e.what());
    }
  } else if (k == 2) {
    st.dim1 = 1;
  } else {
    throw InputError(path + ": branch split unknown without the report '" + report + "'");
  }
  if (st.dim1 == 0 || st.dim1 >= k) throw InputError(report + ": branch split does not match the CSV columns");

  auto part = [](const std::vector<double>& r, std::size_t a, std::size_t b) {
    return std::vector<double>(r.begin() + a, r.begin() + b);
  };
  std::size_t n2 = 0;
  while (n2 < rows.size() && part(rows[n2], 0, st.dim1) == part(rows[0], 0, st.dim1)) ++n2;
  if (rows.size() % n2 != 0) throw InputError(path + ": rows do not form a tensor grid");
  for (std::size_t i = 0; i < rows.size(); i += n2) st.grid.t1.push_back(part(rows[i], 0, st.dim1));
  for (std::size_t j = 0; j < n2; ++j) st.grid.t2.push_back(part(rows[j], st.dim1, k));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (part(rows[r], 0, st.dim1) != st.grid.t1[r / n2] || part(rows[r], st.dim1, k) != st.grid.t2[r % n2]) {
      throw InputError(path + ": rows do not form a tensor grid with the last parameters varying fastest");
    }
    st.grid.values.push_back(part(rows[r], k, header.size()));
  }
  st.n1 = static_cast<int>(distinct(st.grid.t1, 0));
  st.n2 = static_cast<int>(distinct(st.grid.t2, 0));
  return st;
}

struct VerifyCmd {
  std::string input, csv, report, out;
  double fd_step = 0.0;
  FunctionOptions functions;
};

int cmd_verify(const VerifyCmd& o) {
  RegistryEntry e = load(o.input);
  if (!e.cauchy) throw InputError(e.name + ": no cauchy section");
  CauchyProblem p = e.problem(o.functions.overrides());
  std::string stored_report = o.report.empty() ? sibling_report(o.csv) : o.report;
  Stored st = read_csv(o.csv, e.rep->base(), stored_report);
  std::string method = "unknown", route = "unknown", refusal;
  double fd = o.fd_step > 0 ? o.fd_step : e.integrator.fd_step;
  if (fs::exists(stored_report)) {
    std::ifstream in(stored_report);
    json prior = json::parse(in, nullptr, false);
    if (prior.is_object()) {
      method = prior.value("method", method);
      route = prior.value("route", route);
      refusal = prior.value("refusal", refusal);
      if (o.fd_step <= 0 && prior.contains("fd_step")) fd = prior["fd_step"].get<double>();
    }
  }
  json r = stage("verify", [&] {
    SolutionSurface g = surface_from_grid(st.grid, e.rep, st.names, st.dim1);
    return report_json(e, g, p, st, fd, method, route, refusal);
  });
  r["csv"] = o.csv;
  if (!o.out.empty()) stage("write", [&] {
    write_json(r, o.out);
    return 0;
  });
  print_report(r);
  return 0;
}

int cmd_export(const std::string& input, const std::string& out) {
  RegistryEntry e = load(input);
  json doc = to_json(e);
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    stage("write", [&] {
      write_json(doc, out);
      return 0;
    });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cauchy problems for Darboux integrable systems"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads for grid evaluation (0: all cores)");

  std::string check_input;
  auto* check = app.add_subcommand("check", "verify the structure of a problem");
  check->add_option("input", check_input, "registry name or problem file")->required();

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "solve the Cauchy problem and write a grid");
  solve->add_option("input", so.input, "registry name or problem file")->required();
  solve->add_option("--grid", so.grid, "grid points per parameter, N1xN2");
  solve->add_option("--method", so.method, "auto, quadrature or rk45");
  solve->add_option("--via", so.via, "quotient, decomposable or second-method");
  solve->add_option("--out", so.out, "CSV output path");
  solve->add_option("--report", so.report, "JSON report path");
  solve->add_option("--fd-step", so.fd_step, "finite-difference step of the PDE residual");
  so.functions.attach(solve);

  VerifyCmd vo;
  auto* verify = app.add_subcommand("verify", "recompute residuals of a stored grid");
  verify->add_option("input", vo.input, "registry name or problem file")->required();
  verify->add_option("csv", vo.csv, "grid written by solve")->required();
  verify->add_option("--report", vo.report, "report written with the grid");
  verify->add_option("--out", vo.out, "JSON report path");
  verify->add_option("--fd-step", vo.fd_step, "finite-difference step of the PDE residual");
  vo.functions.attach(verify);

  std::string export_input, export_out;
  auto* exp = app.add_subcommand("export", "print the problem document of an entry");
  exp->add_option("input", export_input, "registry name or problem file")->required();
  exp->add_option("--out", export_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  set_worker_threads(threads);
  try {
    if (*check) return cmd_check(check_input);
    if (*solve) return cmd_solve(so);
    if (*verify) return cmd_verify(vo);
    if (*exp) return cmd_export(export_input, export_out);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
