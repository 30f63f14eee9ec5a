#include "solembed/ingestion.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <variant>

#include "solembed/parser.hpp"

namespace solembed {
namespace fs = std::filesystem;

FilesystemProvider::FilesystemProvider(fs::path root, std::string glob)
    : root_(std::move(root)), glob_(std::move(glob)) {}

std::vector<SourceEntry> FilesystemProvider::enumerate() const {
  std::vector<SourceEntry> out;
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) {
    out.push_back({root_.string(), std::nullopt, "not a readable directory"});
    return out;
  }
  std::vector<fs::path> paths;
  for (auto it = fs::recursive_directory_iterator(root_, fs::directory_options::skip_permission_denied, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const auto name = it->path().filename().string();
    if (::fnmatch(glob_.c_str(), name.c_str(), 0) == 0) paths.push_back(it->path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.is_open() || in.bad()) {
      out.push_back({p.string(), std::nullopt, "cannot read file"});
    } else {
      out.push_back({p.string(), std::move(text), ""});
    }
  }
  return out;
}

RemoteChainProvider::RemoteChainProvider(std::string endpoint, std::vector<std::string> addresses)
    : endpoint_(std::move(endpoint)), addresses_(std::move(addresses)) {}

std::vector<SourceEntry> RemoteChainProvider::enumerate() const {
  std::vector<SourceEntry> out;
  for (const auto& a : addresses_) {
    out.push_back({endpoint_ + "/" + a, std::nullopt, "remote fetching is not implemented"});
  }
  return out;
}

namespace {

struct Parsed {
  SourceUnit unit;
  std::vector<Fragment> fragments;
};

bool has_contract(const AstNode& root) {
  return std::any_of(root.children.begin(), root.children.end(),
                     [](const AstNode& c) { return c.kind == NodeKind::ContractDefinition; });
}

// A source fails when it is unreadable, not text, or has parse errors from
// which no contract was recovered.
std::variant<Parsed, FailedSource> parse_entry(const SourceEntry& entry) {
  if (!entry.text) return FailedSource{entry.path, {Severity::Error, entry.error, 1, 1}};
  if (!is_text(*entry.text)) {
    return FailedSource{entry.path, {Severity::Error, "not UTF-8 text", 1, 1}};
  }
  auto unit = SourceUnit::from_text(entry.path, *entry.text);
  auto result = parse(unit);
  if (result.has_errors() && !has_contract(result.root)) {
    auto first = std::find_if(result.diagnostics.begin(), result.diagnostics.end(),
                              [](const Diagnostic& d) { return d.severity == Severity::Error; });
    return FailedSource{entry.path, *first};
  }
  auto fragments = extract_fragments(result.root, unit.id);
  return Parsed{std::move(unit), std::move(fragments)};
}

struct TokenTally {
  std::size_t tokens = 0;
  std::size_t oov = 0;
};

IngestDelta ingest_entries(const std::vector<SourceEntry>& entries, CorpusStore& store,
                           TokenTally* tally) {
  const auto table = store.table();
  IngestDelta delta;
  std::vector<ContractInput> batch;
  for (const auto& entry : entries) {
    auto parsed = parse_entry(entry);
    if (auto* failed = std::get_if<FailedSource>(&parsed)) {
      delta.failed.push_back(std::move(*failed));
      continue;
    }
    auto& p = std::get<Parsed>(parsed);
    ContractInput input{std::move(p.unit), std::move(p.fragments), {}};
    for (const auto& f : input.fragments) {
      input.vectors.push_back(embed_fragment(f, *table));
      if (tally && f.granularity == Granularity::Contract) {
        tally->tokens += input.vectors.back().token_count;
        tally->oov += input.vectors.back().oov_count;
      }
    }
    batch.push_back(std::move(input));
  }
  auto result = store.add_contracts(batch);
  delta.added = result.added_sources;
  delta.skipped_duplicates = result.skipped_duplicates;
  delta.new_version = result.version;
  return delta;
}

std::vector<TokenStream> contract_streams(const std::vector<SourceUnit>& units) {
  std::vector<TokenStream> out;
  for (const auto& u : units) {
    for (auto& f : extract_fragments(parse(u).root, u.id)) {
      if (f.granularity == Granularity::Contract) out.push_back(std::move(f.stream));
    }
  }
  return out;
}

std::vector<TokenStream> entry_streams(const std::vector<SourceEntry>& entries) {
  std::vector<TokenStream> out;
  for (const auto& entry : entries) {
    auto parsed = parse_entry(entry);
    auto* p = std::get_if<Parsed>(&parsed);
    if (!p) continue;
    for (auto& f : p->fragments) {
      if (f.granularity == Granularity::Contract) out.push_back(std::move(f.stream));
    }
  }
  return out;
}

}  // namespace

IngestDelta ingest(const SourceProvider& provider, CorpusStore& store) {
  return ingest_entries(provider.enumerate(), store, nullptr);
}

ModelUpdate update_model(const SourceProvider& provider, CorpusStore& store,
                         double retrain_threshold) {
  TokenTally tally;
  ModelUpdate update;
  update.delta = ingest_entries(provider.enumerate(), store, &tally);
  update.token_count = tally.tokens;
  update.oov_count = tally.oov;
  if (tally.tokens > 0) update.oov_rate = static_cast<double>(tally.oov) / static_cast<double>(tally.tokens);
  update.retrain_advised = update.oov_rate > retrain_threshold;
  return update;
}

std::vector<TokenStream> training_streams(const SourceProvider& provider) {
  return entry_streams(provider.enumerate());
}

BuiltStore build_store(const SourceProvider& provider, const BugCatalog& catalog,
                       const Hyperparams& hp) {
  hp.validate();
  const auto entries = provider.enumerate();
  auto streams = entry_streams(entries);
  for (const auto& rec : catalog.records) {
    streams.insert(streams.end(), rec.statement_streams.begin(), rec.statement_streams.end());
  }
  auto table = std::make_shared<const EmbeddingTable>(train_embeddings(streams, hp));
  BuiltStore built;
  built.store = std::make_unique<CorpusStore>(table, catalog.categories);
  built.delta = ingest_entries(entries, *built.store, nullptr);
  built.store->add_bugs(catalog.records);
  built.delta.new_version = built.store->version();
  return built;
}

void retrain_store(CorpusStore& store, const Hyperparams& hp) {
  hp.validate();
  const auto base = store.snapshot();
  std::vector<SourceUnit> units;
  for (const auto& s : base->sources) units.push_back(SourceUnit::from_text(s->path, s->text));
  auto streams = contract_streams(units);
  for (const auto& b : base->bugs) {
    streams.insert(streams.end(), b.statement_streams.begin(), b.statement_streams.end());
  }
  auto table = std::make_shared<const EmbeddingTable>(train_embeddings(streams, hp));

  CorpusStore fresh(table, base->categories);
  std::vector<ContractInput> batch;
  for (auto& u : units) {
    ContractInput input{u, extract_fragments(parse(u).root, u.id), {}};
    for (const auto& f : input.fragments) input.vectors.push_back(embed_fragment(f, *table));
    batch.push_back(std::move(input));
  }
  fresh.add_contracts(batch);
  fresh.add_bugs(base->bugs);

  auto next = std::make_shared<Snapshot>(*fresh.snapshot());
  next->version = base->version + 1;
  for (auto& t : next->tables) t.matrix.version = next->version;
  next->bug_matrix.version = next->version;
  store.replace(std::move(next));
}

}  // namespace solembed
