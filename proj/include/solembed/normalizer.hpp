#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solembed/ast.hpp"
#include "solembed/source.hpp"

namespace solembed {

enum class Granularity { Contract, Function, Statement };

inline constexpr std::array<Granularity, 3> kGranularities = {
    Granularity::Contract, Granularity::Function, Granularity::Statement};

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view text);

using TokenStream = std::vector<std::string>;

struct Fragment {
  std::string fragment_id;
  std::string source_id;
  Granularity granularity = Granularity::Contract;
  Span span;
  std::optional<std::string> parent_id;
  TokenStream stream;

  bool operator==(const Fragment&) const = default;
};

/// One fragment per contract, function/modifier and statement node, in
/// pre-order. Each stream is the raw pre-order serialization of the fragment's
/// subtree: the kind name of every node followed, for leaves, by the lexeme.
///
/// Statement parents point at the enclosing function, function parents at the
/// enclosing contract.
std::vector<Fragment> serialize_fragments(const AstNode& root, std::string_view source_id);

/// Replaces literal values by their class (NUM, STR, HEX, ADDR) and drops the
/// stop tokens `;` and `,`. Identifiers are kept verbatim. Idempotent.
TokenStream normalize(const TokenStream& stream);

/// serialize_fragments followed by normalize on every stream.
std::vector<Fragment> extract_fragments(const AstNode& root, std::string_view source_id);

/// Digest of the space-joined stream; the key of the exact-duplicate index.
Digest stream_digest(const TokenStream& stream);

std::string join(const TokenStream& stream);

}  // namespace solembed
