#include <gtest/gtest.h>

#include <set>

#include "solembed/bug_catalog.hpp"
#include "synthetic.hpp"

namespace solembed {
namespace {

TEST(SnippetStreams, OneStreamPerTopLevelStatement) {
  auto s = snippet_statement_streams("x = 1; if (a) { y = \"s\"; }");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].front(), "ExpressionStatement");
  EXPECT_EQ(s[1].front(), "IfStatement");
  // Nested statements belong to their enclosing statement only.
  EXPECT_NE(std::find(s[1].begin(), s[1].end(), "STR"), s[1].end());
}

TEST(SnippetStreams, LiteralsNormalized) {
  EXPECT_EQ(snippet_statement_streams("require(msg.sender.call.value(1 ether)());"),
            snippet_statement_streams("require ( msg . sender . call . value ( 7 ether ) ( ) ) ;"));
}

TEST(SnippetStreams, ParseErrorThrows) {
  EXPECT_THROW(snippet_statement_streams("x = = 1;"), CatalogError);
}

TEST(Catalog, ShippedDatabase) {
  auto c = load_bug_catalog(testing::data_dir() / "bugs.json");
  EXPECT_EQ(c.categories.size(), 10u);
  EXPECT_GE(c.records.size(), 10u);
  std::set<std::string> ids, categories;
  for (const auto& r : c.records) {
    EXPECT_TRUE(ids.insert(r.bug_id).second) << r.bug_id;
    EXPECT_FALSE(r.statement_streams.empty());
    EXPECT_NE(std::find(c.categories.begin(), c.categories.end(), r.category), c.categories.end());
    categories.insert(r.category);
  }
  EXPECT_EQ(categories.size(), 10u);
}

TEST(Catalog, CategoriesDefault) {
  auto c = parse_bug_catalog(R"({"bugs": [{"bug_id": "x", "category": "reentrancy",
      "statements": ["a.call.value(1)();"]}]})");
  EXPECT_EQ(c.categories, default_bug_categories());
  ASSERT_EQ(c.records.size(), 1u);
  EXPECT_EQ(c.records[0].description, "");
}

TEST(Catalog, Errors) {
  EXPECT_THROW(parse_bug_catalog("not json"), CatalogError);
  EXPECT_THROW(parse_bug_catalog(R"({"bugs": [{"category": "reentrancy", "statements": ["x;"]}]})"),
               CatalogError);
  EXPECT_THROW(parse_bug_catalog(R"({"bugs": [{"bug_id": "x", "category": "r", "statements": []}]})"),
               CatalogError);
  EXPECT_THROW(parse_bug_catalog(R"({"bugs": [{"bug_id": "x", "category": "r", "statements": ["x = = 1;"]}]})"),
               CatalogError);
  EXPECT_THROW(load_bug_catalog("/nonexistent/bugs.json"), CatalogError);
}

}  // namespace
}  // namespace solembed
