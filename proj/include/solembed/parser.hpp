#pragma once

#include <string_view>
#include <vector>

#include "solembed/ast.hpp"
#include "solembed/source.hpp"

namespace solembed {

struct ParseResult {
  AstNode root;
  std::vector<Diagnostic> diagnostics;

  bool has_errors() const;
};

/// Recursive-descent parser for the Solidity 0.4/0.5 surface syntax.
///
/// Never throws on malformed input. Errors are reported as diagnostics and the
/// parser resynchronizes at the next `;` or matching `}`; an unparseable
/// statement is kept as an `UnknownStatement` leaf.
ParseResult parse(std::string_view text);
ParseResult parse(const SourceUnit& unit);

}  // namespace solembed
