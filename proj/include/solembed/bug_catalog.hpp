#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solembed/corpus_store.hpp"

namespace solembed {

struct BugCatalog {
  std::vector<std::string> categories;
  std::vector<BugRecord> records;
};

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Normalized streams of the top-level statements in a Solidity snippet. The
/// snippet is parsed as the body of a function.
std::vector<TokenStream> snippet_statement_streams(std::string_view snippet);

/// Reads a bug database:
///
///   {"categories": [...],
///    "bugs": [{"bug_id", "category", "description", "provenance",
///              "statements": ["<solidity statement>", ...]}]}
///
/// `categories` is optional and defaults to default_bug_categories().
BugCatalog parse_bug_catalog(std::string_view json_text);
BugCatalog load_bug_catalog(const std::filesystem::path& path);

}  // namespace solembed
