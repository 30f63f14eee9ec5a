#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "solembed/source.hpp"

namespace solembed {

enum class TokenKind {
  Keyword,
  Identifier,
  NumberLiteral,
  StringLiteral,
  HexLiteral,
  AddressLiteral,
  Punctuator,
  Operator,
};

std::string_view to_string(TokenKind kind);

struct LexToken {
  TokenKind kind = TokenKind::Identifier;
  std::string lexeme;
  int line = 1;
  int col = 1;
  /// Position just past the last byte of the lexeme.
  int end_line = 1;
  int end_col = 1;

  Span span() const { return {{line, col}, {end_line, end_col}}; }
  bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }

  bool operator==(const LexToken&) const = default;
};

struct LexResult {
  std::vector<LexToken> tokens;
  std::vector<Diagnostic> diagnostics;
};

/// Splits Solidity source into tokens. Comments and whitespace are dropped.
/// Unterminated strings and block comments produce an error diagnostic and
/// lexing resumes on the following line.
LexResult tokenize(std::string_view text);

bool is_keyword(std::string_view word);

/// Elementary type names: bool, address, string, uintN, bytesN, ...
bool is_elementary_type(std::string_view word);

}  // namespace solembed
