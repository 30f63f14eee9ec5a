#include "solembed/matrix_cache.hpp"

namespace solembed {
namespace {

std::shared_ptr<const ResidentMatrix> load(const Snapshot& snap, MatrixKind kind) {
  auto m = std::make_shared<ResidentMatrix>();
  m->kind = kind;
  m->version = snap.version;
  if (kind == MatrixKind::Bug) {
    m->index = SimilarityIndex<double>(snap.bug_matrix.rows, snap.bug_matrix.norms);
    for (const auto& r : snap.bug_matrix.row_index) m->row_ids.push_back(r.bug_id);
    m->degenerate.assign(m->row_ids.size(), false);
    return m;
  }
  const auto& table = snap.tables[static_cast<std::size_t>(kind)];
  m->index = SimilarityIndex<double>(table.matrix.rows, table.matrix.norms);
  m->row_ids = table.matrix.row_ids;
  m->degenerate.reserve(table.fragments.size());
  for (const auto& f : table.fragments) m->degenerate.push_back(f.degenerate);
  return m;
}

}  // namespace

MatrixKind matrix_kind(Granularity g) { return static_cast<MatrixKind>(static_cast<int>(g)); }

std::string_view to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::Contract: return "contract";
    case MatrixKind::Function: return "function";
    case MatrixKind::Statement: return "statement";
    case MatrixKind::Bug: return "bug";
  }
  return "?";
}

std::shared_ptr<const ResidentMatrix> MatrixCache::get(const Snapshot& snap, MatrixKind kind) {
  const auto key = std::pair{kind, snap.version};
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  // Built outside the lock; a losing racer adopts the stored entry.
  auto built = load(snap, kind);
  ++loads_;
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(key, std::move(built));
  if (inserted) {
    for (auto e = entries_.begin(); e != entries_.end();) {
      if (e->first.first == kind && e->first.second < snap.version) {
        e = entries_.erase(e);
      } else {
        ++e;
      }
    }
  }
  return it->second;
}

std::size_t MatrixCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void MatrixCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

}  // namespace solembed
