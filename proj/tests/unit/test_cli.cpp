#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "solembed/cli.hpp"
#include "synthetic.hpp"

namespace solembed {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

class CliStore : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir;
    testing::ContractGenerator gen(90);
    for (int i = 0; i < 12; ++i) {
      testing::write_source((*dir_) / "corpus", "c" + std::to_string(i) + ".sol", testing::render(gen.next(), i));
    }
    auto r = run({"train", ((*dir_) / "corpus").string(), "--store", store(), "--bugs",
                  (testing::data_dir() / "bugs.json").string(), "--dim", "32", "--epochs", "3"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::string store() { return ((*dir_) / "store").string(); }
  static std::string corpus_file(int i) { return ((*dir_) / "corpus" / ("c" + std::to_string(i) + ".sol")).string(); }

  static testing::TempDir* dir_;
};

testing::TempDir* CliStore::dir_ = nullptr;

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"clones", "--store", "x", "--unknown"}).code, kExitUsage);
  EXPECT_EQ(run({"clones", "--store", "x", "--threshold", "1.5"}).code, kExitUsage);
  EXPECT_EQ(run({"clones", "--store", "x", "--threshold", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"bugs", "--store", "x", "--threshold", "-1"}).code, kExitUsage);
  EXPECT_EQ(run({"clones", "--store", "x", "--granularity", "module"}).code, kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("validate"), std::string::npos);
}

TEST(Cli, MissingStoreIsFailure) {
  auto r = run({"stats", "--store", "/nonexistent/solembed"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, DumpStreams) {
  testing::TempDir dir;
  testing::write_source(dir.path(), "a.sol", "contract A { function f() public { x = 1; y = 2; } }");
  auto r = run({"dump", (dir / "a.sol").string(), "--emit-stream", "statement"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out,
            "ExpressionStatement Assignment IdentifierExpr x Operator = LiteralExpr NUM\n"
            "ExpressionStatement Assignment IdentifierExpr y Operator = LiteralExpr NUM\n");
  auto ast = run({"dump", (dir / "a.sol").string(), "--emit-ast"});
  EXPECT_NE(ast.out.find("ContractDefinition@1:1"), std::string::npos);
  EXPECT_EQ(run({"dump", (dir / "a.sol").string()}).code, kExitUsage);
}

TEST(Cli, Bench) {
  auto r = run({"bench", "--rows", "500", "--dim", "16", "--repeats", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "method,rows,dim,millis");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_TRUE(line.find(",500,16,") != std::string::npos) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(CliStore, Stats) {
  auto r = run({"stats", "--store", store()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["counts"]["contract"], 12);
  EXPECT_EQ(j["dim"], 32);
  auto manifest = nlohmann::json::parse(testing::read_text(std::filesystem::path(store()) / "manifest.json"));
  EXPECT_EQ(j["counts"], manifest["counts"]);
  EXPECT_EQ(j["corpus_version"], manifest["version"]);
}

TEST_F(CliStore, ValidateEmptyFile) {
  testing::TempDir dir;
  testing::write_source(dir.path(), "empty.sol", "");
  auto r = run({"validate", (dir / "empty.sol").string(), "--store", store()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["diagnostics"].empty());
  EXPECT_TRUE(j["bug_hits"].empty());
  for (const auto& g : {"contract", "function", "statement"}) EXPECT_TRUE(j["clone_hits"][g].empty());
}

TEST_F(CliStore, ValidateMemberFindsItself) {
  auto r = run({"validate", corpus_file(3), "--store", store()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  const auto& hits = j["clone_hits"]["contract"];
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0]["score"], 1.0);
  auto stats = nlohmann::json::parse(run({"clones", "--store", store(), "--threshold", "1"}).out);
  EXPECT_EQ(j["corpus_version"], stats["corpus_version"]);
}

TEST_F(CliStore, OutputIsDeterministic) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"validate", corpus_file(5), "--store", store(), "--top-k", "3"},
           {"clones", "--store", store(), "--granularity", "statement", "--threshold", "0.9"},
           {"bugs", "--store", store()},
           {"stats", "--store", store()}}) {
    auto a = run(args);
    auto b = run(args);
    ASSERT_EQ(a.code, kExitOk) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
}

TEST_F(CliStore, ClonesAndBugsReports) {
  auto c = run({"clones", "--store", store(), "--granularity", "function", "--threshold", "0.95"});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  auto j = nlohmann::json::parse(c.out);
  EXPECT_EQ(j["granularity"], "function");
  EXPECT_EQ(j["clone_threshold"], 0.95);
  EXPECT_TRUE(j.contains("clone_ratio"));
  EXPECT_TRUE(j.contains("clusters"));

  auto b = run({"bugs", "--store", store(), "--threshold", "0.99"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  auto bj = nlohmann::json::parse(b.out);
  EXPECT_EQ(bj["bug_threshold"], 0.99);
  EXPECT_TRUE(bj["hits"].is_array());
}

TEST_F(CliStore, IngestIntoCopy) {
  testing::TempDir dir;
  std::filesystem::copy(store(), dir / "store");
  testing::ContractGenerator gen(91);
  testing::write_source(dir / "new", "n.sol", testing::render(gen.next(), 1));
  auto r = run({"ingest", (dir / "new").string(), "--store", (dir / "store").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["added"], 1);
  auto stats = nlohmann::json::parse(run({"stats", "--store", (dir / "store").string()}).out);
  EXPECT_EQ(stats["counts"]["contract"], 13);
  EXPECT_EQ(stats["corpus_version"], j["new_version"]);
}

}  // namespace
}  // namespace solembed
