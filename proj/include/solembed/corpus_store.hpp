#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "solembed/embedding.hpp"
#include "solembed/normalizer.hpp"
#include "solembed/similarity.hpp"
#include "solembed/source.hpp"

namespace solembed {

/// Stored metadata for one fragment; its row in the matrix of its granularity
/// is its position in the per-granularity fragment list.
struct FragmentRecord {
  std::string fragment_id;
  std::string source_id;
  Granularity granularity = Granularity::Contract;
  Span span;
  std::optional<std::string> parent_id;
  Digest digest{};
  bool degenerate = false;

  bool operator==(const FragmentRecord&) const = default;
};

struct SourceRecord {
  std::string source_id;
  std::string path;
  Digest content_hash{};
  std::string text;

  bool operator==(const SourceRecord&) const = default;
};

/// Row-per-fragment vectors with precomputed Euclidean row norms.
struct CodeEmbeddingMatrix {
  RowMatrix rows;
  Vector norms;
  std::vector<std::string> row_ids;
  std::uint64_t version = 0;
};

struct BugRecord {
  std::string bug_id;
  std::string category;
  std::vector<TokenStream> statement_streams;
  std::string description;
  std::string provenance;

  bool operator==(const BugRecord&) const = default;
};

struct BugRow {
  std::string bug_id;
  std::size_t statement_index = 0;

  bool operator==(const BugRow&) const = default;
};

struct BugEmbeddingMatrix {
  RowMatrix rows;
  Vector norms;
  std::vector<BugRow> row_index;
  std::uint64_t version = 0;
};

/// Normalized-stream digest to the fragments carrying that stream.
using ExactIndex = std::map<Digest, std::vector<std::string>>;

/// The vulnerability categories of the shipped sample bug database.
const std::vector<std::string>& default_bug_categories();

struct GranularityTable {
  std::vector<FragmentRecord> fragments;
  CodeEmbeddingMatrix matrix;
};

/// An immutable, versioned view of the corpus. Readers hold one through a
/// shared_ptr and never observe later writes.
struct Snapshot {
  std::uint64_t version = 0;
  std::shared_ptr<const EmbeddingTable> table;
  std::vector<std::string> categories;
  std::array<GranularityTable, 3> tables;
  ExactIndex exact_index;
  std::unordered_map<std::string, std::pair<Granularity, std::size_t>> fragment_rows;
  std::vector<std::shared_ptr<const SourceRecord>> sources;
  std::unordered_set<std::string> source_hashes;  // hex content hashes
  std::vector<BugRecord> bugs;
  BugEmbeddingMatrix bug_matrix;

  int dim() const { return table ? table->dim() : 0; }
  const GranularityTable& at(Granularity g) const { return tables[static_cast<std::size_t>(g)]; }
  const FragmentRecord* find_fragment(std::string_view fragment_id) const;
  const BugRecord* find_bug(std::string_view bug_id) const;
  bool contains_source(const Digest& content_hash) const;
  std::size_t fragment_count() const;
};

/// Structural equality of two snapshots, including bit-exact matrices.
bool snapshots_equal(const Snapshot& a, const Snapshot& b);

struct ContractInput {
  SourceUnit unit;
  std::vector<Fragment> fragments;
  std::vector<FragmentEmbedding> vectors;
};

struct SnapshotDelta {
  std::array<std::size_t, 3> added_rows{};
  std::size_t added_sources = 0;
  std::size_t skipped_duplicates = 0;
  std::uint64_t version = 0;
  bool changed = false;
};

struct BugRejected : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Single-writer, multi-reader corpus. Every mutation builds a new snapshot
/// and publishes it atomically with version + 1; a batch that changes nothing
/// publishes nothing.
class CorpusStore {
 public:
  CorpusStore(std::shared_ptr<const EmbeddingTable> table,
              std::vector<std::string> categories = default_bug_categories());
  explicit CorpusStore(std::shared_ptr<const Snapshot> snapshot);

  std::shared_ptr<const Snapshot> snapshot() const;
  std::uint64_t version() const { return snapshot()->version; }
  std::shared_ptr<const EmbeddingTable> table() const { return snapshot()->table; }

  /// Appends one row per fragment. Re-adding a source with a known content
  /// hash is a no-op. Throws DimensionMismatch if any vector has the wrong size.
  SnapshotDelta add_contract(const SourceUnit& unit, const std::vector<Fragment>& fragments,
                             const std::vector<FragmentEmbedding>& vectors);

  /// add_contract for several sources with a single version bump.
  SnapshotDelta add_contracts(std::span<const ContractInput> batch);

  /// Embeds every statement stream with the store's table and appends one
  /// bug-matrix row per statement. Throws BugRejected for an invalid record
  /// (unknown category, duplicate id, no statements, or an all-OOV statement).
  SnapshotDelta add_bug(const BugRecord& record);
  SnapshotDelta add_bugs(std::span<const BugRecord> records);

  /// Publishes a wholesale replacement (e.g. after retraining). Its version
  /// must exceed the current one.
  void replace(std::shared_ptr<const Snapshot> next);

 private:
  void publish(std::shared_ptr<const Snapshot> next);

  mutable std::mutex publish_mutex_;
  std::shared_ptr<const Snapshot> current_;
  std::mutex writer_;
};

// --- persistence -------------------------------------------------------------

inline constexpr int kSnapshotFormatVersion = 1;

struct SnapshotError : std::runtime_error {
  SnapshotError(std::string file, const std::string& message)
      : std::runtime_error(file + ": " + message), file(std::move(file)) {}
  std::string file;
};

/// Writes manifest.json, embeddings.txt, fragments.jsonl, matrix_<g>.txt,
/// bugs.json and sources.jsonl into `dir` (created if needed).
void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir);

/// Throws SnapshotError naming the missing or malformed file.
std::shared_ptr<const Snapshot> load_snapshot(const std::filesystem::path& dir);

}  // namespace solembed
