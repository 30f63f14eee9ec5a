#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "solembed/corpus_store.hpp"

namespace solembed::testing {

enum class LiteralKind { Number, String, Hex, Address };

/// One token of a contract template; literal slots are filled at render time.
struct Piece {
  std::string text;
  std::optional<LiteralKind> literal;
};

struct ContractTemplate {
  std::string name;
  std::vector<Piece> pieces;
  std::size_t statements = 0;
  std::size_t functions = 0;
};

/// Layout of a rendering. The canonical layout puts one statement per line;
/// a noisy layout uses random whitespace and inserts comments between tokens.
struct Layout {
  bool noisy = false;
  std::uint64_t seed = 0;
};

/// Splits `pattern` on spaces. `#N`, `#S`, `#H` and `#A` become literal slots.
std::vector<Piece> pieces(const std::string& pattern);

/// Seeded random contracts in the 0.4/0.5 syntax the parser accepts. The
/// statement templates avoid every pattern in data/bugs.json.
class ContractGenerator {
 public:
  explicit ContractGenerator(std::uint64_t seed) : rng_(seed) {}

  ContractTemplate next(std::size_t functions = 3, std::size_t statements_per_function = 4);

  /// A template with `statement` spliced in as the first statement of the
  /// first function.
  ContractTemplate with_statement(const std::string& statement_pattern);

 private:
  std::string identifier();
  std::string statement(const std::vector<std::string>& state, const std::string& map,
                        const std::vector<std::string>& params, const std::string& event);

  std::mt19937_64 rng_;
  std::uint64_t counter_ = 0;
};

/// Fills literal slots from `literal_seed` and lays tokens out per `layout`.
std::string render(const ContractTemplate& t, std::uint64_t literal_seed, const Layout& layout = {});

/// Writes `text` to `dir/name`, creating `dir`.
void write_source(const std::filesystem::path& dir, const std::string& name, const std::string& text);

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Absolute path of the shipped data directory.
std::filesystem::path data_dir();

/// Absolute path of tests/fixtures.
std::filesystem::path fixtures_dir();

std::string read_text(const std::filesystem::path& path);

/// Parses and embeds `text` with `table`, ready for CorpusStore::add_contracts.
ContractInput contract_input(const std::string& path, const std::string& text, const EmbeddingTable& table);

/// A table trained on the contract streams of `texts` plus `extra` streams.
std::shared_ptr<const EmbeddingTable> train_on(const std::vector<std::string>& texts, int dim = 16,
                                               int epochs = 2, std::vector<TokenStream> extra = {});

}  // namespace solembed::testing
