#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solembed/corpus_store.hpp"
#include "solembed/matrix_cache.hpp"
#include "solembed/similarity.hpp"
#include "solembed/source.hpp"

namespace solembed {

struct ClonePair {
  std::string fragment_a;  // fragment_a < fragment_b
  std::string fragment_b;
  double score = 0.0;
  bool exact = false;

  bool operator==(const ClonePair&) const = default;
};

struct CloneReport {
  std::vector<ClonePair> pairs;
  std::vector<std::vector<std::string>> clusters;
  double clone_ratio = 0.0;
  Granularity granularity = Granularity::Contract;
  double clone_threshold = 0.95;
  std::uint64_t corpus_version = 0;
  std::size_t fragments = 0;
  std::size_t degenerate_fragments = 0;
};

struct BugHit {
  std::string fragment_id;
  Span span;
  std::string bug_id;
  std::string category;
  double score = 0.0;
  std::size_t statement_index = 0;
  std::optional<std::string> function_id;
  std::optional<std::string> contract_id;

  bool operator==(const BugHit&) const = default;
};

struct BugScan {
  std::vector<BugHit> hits;
  double bug_threshold = 0.90;
  std::uint64_t corpus_version = 0;
};

/// A corpus fragment matched by a fragment of a submitted contract.
struct CloneHit {
  std::string fragment_id;
  Span span;
  std::string match_id;
  std::string match_source_id;
  Span match_span;
  double score = 0.0;

  bool operator==(const CloneHit&) const = default;
};

struct ValidationReport {
  std::string source_id;
  std::vector<Diagnostic> diagnostics;
  std::array<std::vector<CloneHit>, 3> clone_hits;
  std::vector<BugHit> bug_hits;
  double oov_rate = 0.0;
  std::size_t token_count = 0;
  std::size_t oov_count = 0;
  std::size_t degenerate_fragments = 0;
  std::uint64_t corpus_version = 0;
  Thresholds thresholds;
  std::size_t top_k = 5;
};

/// Exact duplicates come from the ExactIndex, everything else from a self
/// batch query. Degenerate fragments never pair.
CloneReport detect_corpus_clones(const Snapshot& snapshot, MatrixCache& cache, Granularity g,
                                 double clone_threshold);

/// Bug rows against the statement matrix; one hit per (fragment, bug) at the
/// best-scoring bug statement.
BugScan detect_corpus_bugs(const Snapshot& snapshot, MatrixCache& cache, double bug_threshold);

/// Top-k clone hits per fragment and granularity plus bug hits for one
/// submitted source. Never throws on bad input: non-text sources produce a
/// report holding a single diagnostic.
ValidationReport validate_contract(std::string_view source_text, const Snapshot& snapshot,
                                   MatrixCache& cache, const Thresholds& thresholds,
                                   std::size_t top_k = 5);

}  // namespace solembed
