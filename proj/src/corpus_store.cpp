#include "solembed/corpus_store.hpp"

#include <algorithm>

#include "solembed/similarity.hpp"

namespace solembed {
namespace {

std::size_t index_of(Granularity g) { return static_cast<std::size_t>(g); }

void append_rows(RowMatrix& rows, Vector& norms, const RowMatrix& extra) {
  if (extra.rows() == 0) return;
  const Eigen::Index old_rows = rows.rows();
  RowMatrix grown(old_rows + extra.rows(), extra.cols());
  if (old_rows > 0) grown.topRows(old_rows) = rows;
  grown.bottomRows(extra.rows()) = extra;
  rows = std::move(grown);
  Vector extra_norms = row_norms(extra);
  Vector all(norms.size() + extra_norms.size());
  all << norms, extra_norms;
  norms = std::move(all);
}

std::string hash_key(const Digest& d) { return to_hex(d); }

}  // namespace

const std::vector<std::string>& default_bug_categories() {
  static const std::vector<std::string> kCategories = {
      "reentrancy",          "unchecked-send",           "integer-overflow",
      "tx-origin-auth",      "timestamp-dependence",     "unprotected-selfdestruct",
      "delegatecall-injection", "default-visibility",    "frozen-ether",
      "bad-randomness",
  };
  return kCategories;
}

const FragmentRecord* Snapshot::find_fragment(std::string_view fragment_id) const {
  auto it = fragment_rows.find(std::string(fragment_id));
  if (it == fragment_rows.end()) return nullptr;
  return &at(it->second.first).fragments[it->second.second];
}

const BugRecord* Snapshot::find_bug(std::string_view bug_id) const {
  for (const auto& b : bugs) {
    if (b.bug_id == bug_id) return &b;
  }
  return nullptr;
}

bool Snapshot::contains_source(const Digest& content_hash) const {
  return source_hashes.contains(hash_key(content_hash));
}

std::size_t Snapshot::fragment_count() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.fragments.size();
  return n;
}

bool snapshots_equal(const Snapshot& a, const Snapshot& b) {
  auto same_matrix = [](const RowMatrix& x, const RowMatrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::equal(x.data(), x.data() + x.size(), y.data());
  };
  auto same_vector = [](const Vector& x, const Vector& y) {
    return x.size() == y.size() && std::equal(x.data(), x.data() + x.size(), y.data());
  };
  if (a.version != b.version || a.categories != b.categories) return false;
  if ((a.table == nullptr) != (b.table == nullptr)) return false;
  if (a.table && !(*a.table == *b.table)) return false;
  for (std::size_t g = 0; g < a.tables.size(); ++g) {
    const auto& ta = a.tables[g];
    const auto& tb = b.tables[g];
    if (ta.fragments != tb.fragments || ta.matrix.row_ids != tb.matrix.row_ids ||
        ta.matrix.version != tb.matrix.version || !same_matrix(ta.matrix.rows, tb.matrix.rows) ||
        !same_vector(ta.matrix.norms, tb.matrix.norms)) {
      return false;
    }
  }
  if (a.exact_index != b.exact_index || a.source_hashes != b.source_hashes) return false;
  if (a.sources.size() != b.sources.size()) return false;
  for (std::size_t i = 0; i < a.sources.size(); ++i) {
    if (!(*a.sources[i] == *b.sources[i])) return false;
  }
  return a.bugs == b.bugs && a.bug_matrix.row_index == b.bug_matrix.row_index &&
         a.bug_matrix.version == b.bug_matrix.version &&
         same_matrix(a.bug_matrix.rows, b.bug_matrix.rows) &&
         same_vector(a.bug_matrix.norms, b.bug_matrix.norms);
}

CorpusStore::CorpusStore(std::shared_ptr<const EmbeddingTable> table,
                         std::vector<std::string> categories) {
  if (!table) throw std::invalid_argument("CorpusStore requires an embedding table");
  auto snap = std::make_shared<Snapshot>();
  snap->table = std::move(table);
  snap->categories = std::move(categories);
  for (auto& t : snap->tables) t.matrix.rows.resize(0, snap->table->dim());
  snap->bug_matrix.rows.resize(0, snap->table->dim());
  current_ = std::move(snap);
}

CorpusStore::CorpusStore(std::shared_ptr<const Snapshot> snapshot) : current_(std::move(snapshot)) {
  if (!current_ || !current_->table) throw std::invalid_argument("CorpusStore requires a snapshot");
}

std::shared_ptr<const Snapshot> CorpusStore::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return current_;
}

void CorpusStore::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(publish_mutex_);
  current_ = std::move(next);
}

void CorpusStore::replace(std::shared_ptr<const Snapshot> next) {
  std::lock_guard writer(writer_);
  if (!next || !next->table) throw std::invalid_argument("replace: empty snapshot");
  if (next->version <= snapshot()->version) {
    throw std::invalid_argument("replace: snapshot version must increase");
  }
  publish(std::move(next));
}

SnapshotDelta CorpusStore::add_contract(const SourceUnit& unit,
                                        const std::vector<Fragment>& fragments,
                                        const std::vector<FragmentEmbedding>& vectors) {
  ContractInput input{unit, fragments, vectors};
  return add_contracts(std::span<const ContractInput>(&input, 1));
}

SnapshotDelta CorpusStore::add_contracts(std::span<const ContractInput> batch) {
  std::lock_guard writer(writer_);
  auto base = snapshot();
  const int d = base->dim();
  SnapshotDelta delta;
  delta.version = base->version;

  // Validate before touching anything so a rejected batch leaves no trace.
  std::unordered_set<std::string> batch_hashes;
  std::vector<const ContractInput*> fresh;
  for (const auto& item : batch) {
    if (item.fragments.size() != item.vectors.size()) {
      throw std::invalid_argument("add_contract: fragment and vector counts differ");
    }
    for (const auto& v : item.vectors) {
      if (v.vector.size() != d) {
        throw DimensionMismatch("add_contract: vector dimension " + std::to_string(v.vector.size()) +
                                " does not match table dimension " + std::to_string(d));
      }
    }
    auto key = hash_key(item.unit.content_hash);
    if (base->source_hashes.contains(key) || !batch_hashes.insert(key).second) {
      ++delta.skipped_duplicates;
      continue;
    }
    fresh.push_back(&item);
  }
  if (fresh.empty()) return delta;

  auto next = std::make_shared<Snapshot>(*base);
  next->version = base->version + 1;
  std::array<std::vector<const FragmentEmbedding*>, 3> new_vectors;
  for (const auto* item : fresh) {
    auto record = std::make_shared<SourceRecord>();
    record->source_id = item->unit.id;
    record->path = item->unit.path;
    record->content_hash = item->unit.content_hash;
    record->text = item->unit.text;
    next->sources.push_back(std::move(record));
    next->source_hashes.insert(hash_key(item->unit.content_hash));
    for (std::size_t i = 0; i < item->fragments.size(); ++i) {
      const auto& f = item->fragments[i];
      auto g = index_of(f.granularity);
      auto& table = next->tables[g];
      FragmentRecord rec{f.fragment_id, f.source_id, f.granularity, f.span,
                         f.parent_id,   stream_digest(f.stream), item->vectors[i].is_degenerate};
      if (!next->fragment_rows.emplace(rec.fragment_id, std::pair{f.granularity, table.fragments.size()})
               .second) {
        throw std::invalid_argument("add_contract: duplicate fragment id " + rec.fragment_id);
      }
      auto& ids = next->exact_index[rec.digest];
      ids.insert(std::upper_bound(ids.begin(), ids.end(), rec.fragment_id), rec.fragment_id);
      table.matrix.row_ids.push_back(rec.fragment_id);
      table.fragments.push_back(std::move(rec));
      new_vectors[g].push_back(&item->vectors[i]);
    }
    ++delta.added_sources;
  }
  for (std::size_t g = 0; g < 3; ++g) {
    auto& m = next->tables[g].matrix;
    RowMatrix extra(static_cast<Eigen::Index>(new_vectors[g].size()), d);
    for (std::size_t r = 0; r < new_vectors[g].size(); ++r) {
      extra.row(static_cast<Eigen::Index>(r)) = new_vectors[g][r]->vector.transpose();
    }
    append_rows(m.rows, m.norms, extra);
    m.version = next->version;
    delta.added_rows[g] = new_vectors[g].size();
  }
  next->bug_matrix.version = next->version;
  delta.version = next->version;
  delta.changed = true;
  publish(std::move(next));
  return delta;
}

SnapshotDelta CorpusStore::add_bug(const BugRecord& record) {
  return add_bugs(std::span<const BugRecord>(&record, 1));
}

SnapshotDelta CorpusStore::add_bugs(std::span<const BugRecord> records) {
  std::lock_guard writer(writer_);
  auto base = snapshot();
  SnapshotDelta delta;
  delta.version = base->version;
  if (records.empty()) return delta;

  std::unordered_set<std::string> ids;
  for (const auto& b : base->bugs) ids.insert(b.bug_id);
  RowMatrix extra(0, base->dim());
  std::vector<Vector> rows;
  std::vector<BugRow> row_index;
  for (const auto& rec : records) {
    if (rec.bug_id.empty()) throw BugRejected("bug record has an empty bug_id");
    if (!ids.insert(rec.bug_id).second) throw BugRejected("duplicate bug_id '" + rec.bug_id + "'");
    if (std::find(base->categories.begin(), base->categories.end(), rec.category) ==
        base->categories.end()) {
      throw BugRejected("bug '" + rec.bug_id + "': unknown category '" + rec.category + "'");
    }
    if (rec.statement_streams.empty()) {
      throw BugRejected("bug '" + rec.bug_id + "': at least one statement is required");
    }
    for (std::size_t s = 0; s < rec.statement_streams.size(); ++s) {
      auto e = embed_stream(rec.statement_streams[s], *base->table);
      if (e.is_degenerate) {
        throw BugRejected("bug '" + rec.bug_id + "': statement " + std::to_string(s) +
                          " has no in-vocabulary tokens");
      }
      rows.push_back(std::move(e.vector));
      row_index.push_back({rec.bug_id, s});
    }
  }
  extra.resize(static_cast<Eigen::Index>(rows.size()), base->dim());
  for (std::size_t r = 0; r < rows.size(); ++r) extra.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();

  auto next = std::make_shared<Snapshot>(*base);
  next->version = base->version + 1;
  next->bugs.insert(next->bugs.end(), records.begin(), records.end());
  append_rows(next->bug_matrix.rows, next->bug_matrix.norms, extra);
  next->bug_matrix.row_index.insert(next->bug_matrix.row_index.end(), row_index.begin(),
                                    row_index.end());
  next->bug_matrix.version = next->version;
  for (auto& t : next->tables) t.matrix.version = next->version;
  delta.version = next->version;
  delta.changed = true;
  publish(std::move(next));
  return delta;
}

}  // namespace solembed
