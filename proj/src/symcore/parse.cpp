#include "darboux/symcore/parse.hpp"

#include <algorithm>
#include <cctype>

#include "darboux/symcore/detail/parser.hpp"

namespace darboux {

namespace {

std::size_t find_identifier(std::string_view text, std::string_view name) {
  std::size_t at = 0;
  while ((at = text.find(name, at)) != std::string_view::npos) {
    auto word = [&](std::size_t i) {
      return i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_');
    };
    bool left_ok = at == 0 || !word(at - 1);
    if (left_ok && !word(at + name.size())) return at;
    ++at;
  }
  return 0;
}

}  // namespace

Expr parse(std::string_view text, const ParseOptions& options) {
  detail::ScalarAlgebra algebra;
  algebra.strict = options.strict;
  algebra.functions = &options.functions;
  detail::Parser<detail::ScalarAlgebra> parser(text, algebra);
  Expr e = parser.parse_all();
  if (options.strict) {
    for (SymbolId v : free_variables(e)) {
      const std::string& name = symbol_name(v);
      if (std::find(options.variables.begin(), options.variables.end(), name) == options.variables.end()) {
        throw ParseError("unknown identifier '" + name + "'", find_identifier(text, name));
      }
    }
  }
  return e;
}

}  // namespace darboux
