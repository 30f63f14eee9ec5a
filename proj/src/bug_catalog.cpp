#include "solembed/bug_catalog.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "solembed/parser.hpp"

namespace solembed {

std::vector<TokenStream> snippet_statement_streams(std::string_view snippet) {
  std::string wrapped = "contract __B { function __f() {\n";
  wrapped += snippet;
  wrapped += "\n} }";
  auto parsed = parse(wrapped);
  for (const auto& d : parsed.diagnostics) {
    if (d.severity == Severity::Error) {
      throw CatalogError("statement does not parse: " + d.message);
    }
  }
  std::vector<TokenStream> out;
  const Span* outer = nullptr;
  auto fragments = extract_fragments(parsed.root, "bug");
  for (const auto& f : fragments) {
    if (f.granularity != Granularity::Statement) continue;
    if (outer && outer->encloses(f.span)) continue;  // nested in a statement already taken
    outer = &f.span;
    out.push_back(f.stream);
  }
  return out;
}

BugCatalog parse_bug_catalog(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed bug catalog: ") + e.what());
  }
  BugCatalog catalog;
  try {
    catalog.categories = doc.contains("categories")
                             ? doc.at("categories").get<std::vector<std::string>>()
                             : default_bug_categories();
    for (const auto& entry : doc.at("bugs")) {
      BugRecord rec;
      rec.bug_id = entry.at("bug_id").get<std::string>();
      rec.category = entry.at("category").get<std::string>();
      rec.description = entry.value("description", "");
      rec.provenance = entry.value("provenance", "");
      for (const auto& s : entry.at("statements")) {
        try {
          auto streams = snippet_statement_streams(s.get<std::string>());
          rec.statement_streams.insert(rec.statement_streams.end(), streams.begin(), streams.end());
        } catch (const CatalogError& e) {
          throw CatalogError("bug '" + rec.bug_id + "': " + e.what());
        }
      }
      if (rec.statement_streams.empty()) throw CatalogError("bug '" + rec.bug_id + "': no statements");
      catalog.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw CatalogError(std::string("invalid bug catalog entry: ") + e.what());
  }
  return catalog;
}

BugCatalog load_bug_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot read bug catalog " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_bug_catalog(text.str());
}

}  // namespace solembed
