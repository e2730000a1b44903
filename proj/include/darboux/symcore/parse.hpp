#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "darboux/symcore/expr.hpp"

namespace darboux {

struct ParseOptions {
  /// Reject identifiers not listed below.
  bool strict = false;
  std::vector<std::string> variables;
  std::vector<std::string> functions;
};

/// Parse a scalar expression. Throws ParseError with the offending position.
Expr parse(std::string_view text, const ParseOptions& options = {});

}  // namespace darboux
