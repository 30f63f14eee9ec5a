#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solembed/bug_catalog.hpp"
#include "solembed/corpus_store.hpp"
#include "solembed/embedding.hpp"

namespace solembed {

/// One enumerated source. `text` is empty when the provider could not read it,
/// in which case `error` says why.
struct SourceEntry {
  std::string path;
  std::optional<std::string> text;
  std::string error;
};

class SourceProvider {
 public:
  virtual ~SourceProvider() = default;
  virtual std::vector<SourceEntry> enumerate() const = 0;
};

/// Files under `root` (recursively) whose name matches `glob`, sorted by path.
class FilesystemProvider : public SourceProvider {
 public:
  explicit FilesystemProvider(std::filesystem::path root, std::string glob = "*.sol");
  std::vector<SourceEntry> enumerate() const override;

 private:
  std::filesystem::path root_;
  std::string glob_;
};

/// Placeholder for fetching verified sources from a chain explorer. Every
/// requested address comes back as a read failure.
class RemoteChainProvider : public SourceProvider {
 public:
  RemoteChainProvider(std::string endpoint, std::vector<std::string> addresses);
  std::vector<SourceEntry> enumerate() const override;

 private:
  std::string endpoint_;
  std::vector<std::string> addresses_;
};

struct FailedSource {
  std::string path;
  Diagnostic diagnostic;
};

struct IngestDelta {
  std::size_t added = 0;
  std::size_t skipped_duplicates = 0;
  std::vector<FailedSource> failed;
  std::uint64_t new_version = 0;
};

inline constexpr double kRetrainAdvisoryThreshold = 0.05;

struct ModelUpdate {
  IngestDelta delta;
  double oov_rate = 0.0;
  std::size_t token_count = 0;
  std::size_t oov_count = 0;
  bool retrain_advised = false;
};

/// Parses, embeds with the frozen table and adds every entry as one batch.
IngestDelta ingest(const SourceProvider& provider, CorpusStore& store);

/// ingest plus the OOV rate over the batch's contract streams.
ModelUpdate update_model(const SourceProvider& provider, CorpusStore& store,
                         double retrain_threshold = kRetrainAdvisoryThreshold);

/// Contract-level normalized streams of every parseable entry.
std::vector<TokenStream> training_streams(const SourceProvider& provider);

struct BuiltStore {
  std::unique_ptr<CorpusStore> store;
  IngestDelta delta;
};

/// Trains a table on the provider's contracts and the catalog's statements,
/// then ingests the sources and adds the catalog.
BuiltStore build_store(const SourceProvider& provider, const BugCatalog& catalog,
                       const Hyperparams& hp);

/// Retrains on every stored source and bug, re-embeds the whole corpus and
/// publishes the result as the next version.
void retrain_store(CorpusStore& store, const Hyperparams& hp);

}  // namespace solembed
