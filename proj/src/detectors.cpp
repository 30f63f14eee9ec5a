#include "solembed/detectors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "solembed/parser.hpp"

namespace solembed {
namespace {

constexpr Eigen::Index kSelfQueryBlock = 256;

void check_unit_threshold(double t, const char* what) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in (0, 1]");
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Function and contract ids above a statement fragment.
void fill_parents(BugHit& hit, const std::optional<std::string>& parent,
                  const std::unordered_map<std::string, std::optional<std::string>>& parents) {
  hit.function_id = parent;
  if (!parent) return;
  if (auto it = parents.find(*parent); it != parents.end()) hit.contract_id = it->second;
}

std::unordered_map<std::string, std::string> bug_categories(const Snapshot& snap) {
  std::unordered_map<std::string, std::string> out;
  for (const auto& b : snap.bugs) out.emplace(b.bug_id, b.category);
  return out;
}

}  // namespace

CloneReport detect_corpus_clones(const Snapshot& snap, MatrixCache& cache, Granularity g,
                                 double clone_threshold) {
  check_unit_threshold(clone_threshold, "clone threshold");
  CloneReport report;
  report.granularity = g;
  report.clone_threshold = clone_threshold;
  report.corpus_version = snap.version;
  const auto& fragments = snap.at(g).fragments;
  report.fragments = fragments.size();
  for (const auto& f : fragments) report.degenerate_fragments += f.degenerate ? 1 : 0;
  if (fragments.empty()) return report;

  std::vector<std::pair<std::size_t, std::size_t>> edges;  // row pairs

  // Exact duplicates straight from the index.
  for (const auto& [digest, ids] : snap.exact_index) {
    std::vector<std::size_t> rows;  // in id order, since ids is sorted
    for (const auto& id : ids) {
      const auto& [fg, row] = snap.fragment_rows.at(id);
      if (fg == g && !fragments[row].degenerate) rows.push_back(row);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        edges.emplace_back(rows[i], rows[j]);
        report.pairs.push_back(
            {fragments[rows[i]].fragment_id, fragments[rows[j]].fragment_id, 1.0, true});
      }
    }
  }

  // Near duplicates from the matrix against itself.
  auto resident = cache.get(snap, g);
  const auto& rows = resident->index.rows();
  for (Eigen::Index b = 0; b < rows.rows(); b += kSelfQueryBlock) {
    const Eigen::Index n = std::min(kSelfQueryBlock, rows.rows() - b);
    auto hits = resident->index.query(rows.middleRows(b, n), clone_threshold);
    for (Eigen::Index q = 0; q < n; ++q) {
      const auto i = static_cast<std::size_t>(b + q);
      if (resident->degenerate[i]) continue;
      for (const auto& h : hits[static_cast<std::size_t>(q)]) {
        const std::size_t j = h.row;
        if (j <= i || resident->degenerate[j]) continue;
        if (fragments[i].digest == fragments[j].digest) continue;  // already exact
        edges.emplace_back(i, j);
        const auto& a = fragments[i].fragment_id;
        const auto& c = fragments[j].fragment_id;
        report.pairs.push_back({std::min(a, c), std::max(a, c), h.score, false});
      }
    }
  }

  std::sort(report.pairs.begin(), report.pairs.end(), [](const ClonePair& x, const ClonePair& y) {
    return std::tie(x.fragment_a, x.fragment_b) < std::tie(y.fragment_a, y.fragment_b);
  });

  UnionFind uf(fragments.size());
  std::vector<bool> paired(fragments.size(), false);
  for (auto [i, j] : edges) {
    uf.unite(i, j);
    paired[i] = paired[j] = true;
  }
  std::map<std::size_t, std::vector<std::string>> components;
  std::size_t in_pairs = 0;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (!paired[i]) continue;
    ++in_pairs;
    components[uf.find(i)].push_back(fragments[i].fragment_id);
  }
  for (auto& [root, ids] : components) {
    std::sort(ids.begin(), ids.end());
    report.clusters.push_back(std::move(ids));
  }
  std::sort(report.clusters.begin(), report.clusters.end());

  const std::size_t eligible = report.fragments - report.degenerate_fragments;
  report.clone_ratio = eligible == 0 ? 0.0 : static_cast<double>(in_pairs) / static_cast<double>(eligible);
  return report;
}

BugScan detect_corpus_bugs(const Snapshot& snap, MatrixCache& cache, double bug_threshold) {
  check_unit_threshold(bug_threshold, "bug threshold");
  BugScan scan;
  scan.bug_threshold = bug_threshold;
  scan.corpus_version = snap.version;
  const auto& statements = snap.at(Granularity::Statement).fragments;
  if (snap.bug_matrix.row_index.empty() || statements.empty()) return scan;

  auto bugs = cache.get(snap, MatrixKind::Bug);
  auto stmts = cache.get(snap, Granularity::Statement);
  auto hits = stmts->index.query(bugs->index.rows(), bug_threshold);

  // (statement row, bug id) -> best (score, bug statement index)
  std::map<std::pair<std::size_t, std::string>, std::pair<double, std::size_t>> best;
  for (std::size_t b = 0; b < hits.size(); ++b) {
    const auto& row = snap.bug_matrix.row_index[b];
    for (const auto& h : hits[b]) {
      if (stmts->degenerate[h.row]) continue;
      auto [it, inserted] = best.try_emplace({h.row, row.bug_id}, h.score, row.statement_index);
      if (!inserted && h.score > it->second.first) it->second = {h.score, row.statement_index};
    }
  }

  std::unordered_map<std::string, std::optional<std::string>> parents;
  for (const auto& f : snap.at(Granularity::Function).fragments) parents.emplace(f.fragment_id, f.parent_id);
  const auto categories = bug_categories(snap);
  for (const auto& [key, value] : best) {
    const auto& f = statements[key.first];
    BugHit hit{f.fragment_id, f.span, key.second, categories.at(key.second), value.first, value.second,
               std::nullopt, std::nullopt};
    fill_parents(hit, f.parent_id, parents);
    scan.hits.push_back(std::move(hit));
  }
  std::sort(scan.hits.begin(), scan.hits.end(), [](const BugHit& x, const BugHit& y) {
    return std::tie(x.fragment_id, x.bug_id) < std::tie(y.fragment_id, y.bug_id);
  });
  return scan;
}

ValidationReport validate_contract(std::string_view source_text, const Snapshot& snap,
                                   MatrixCache& cache, const Thresholds& thresholds,
                                   std::size_t top_k) {
  thresholds.validate();
  if (top_k == 0) throw std::invalid_argument("top_k must be positive");
  ValidationReport report;
  report.corpus_version = snap.version;
  report.thresholds = thresholds;
  report.top_k = top_k;
  if (!is_text(source_text)) {
    report.diagnostics.push_back({Severity::Error, "source is not UTF-8 text", 1, 1});
    return report;
  }

  auto unit = SourceUnit::from_text("<submitted>", std::string(source_text));
  report.source_id = unit.id;
  auto parsed = parse(unit);
  report.diagnostics = std::move(parsed.diagnostics);
  const auto fragments = extract_fragments(parsed.root, unit.id);
  std::vector<FragmentEmbedding> vectors;
  vectors.reserve(fragments.size());
  std::unordered_map<std::string, std::optional<std::string>> parents;
  for (const auto& f : fragments) {
    vectors.push_back(embed_fragment(f, *snap.table));
    parents.emplace(f.fragment_id, f.parent_id);
    if (vectors.back().is_degenerate) ++report.degenerate_fragments;
    if (f.granularity == Granularity::Contract) {
      report.token_count += vectors.back().token_count;
      report.oov_count += vectors.back().oov_count;
    }
  }
  if (report.token_count > 0) {
    report.oov_rate = static_cast<double>(report.oov_count) / static_cast<double>(report.token_count);
  }

  auto queries_for = [&](Granularity g) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < fragments.size(); ++i) {
      if (fragments[i].granularity == g && !vectors[i].is_degenerate) idx.push_back(i);
    }
    RowMatrix q(static_cast<Eigen::Index>(idx.size()), snap.dim());
    for (std::size_t r = 0; r < idx.size(); ++r) q.row(static_cast<Eigen::Index>(r)) = vectors[idx[r]].vector.transpose();
    return std::pair{std::move(idx), std::move(q)};
  };

  for (auto g : kGranularities) {
    const auto& table = snap.at(g);
    if (table.fragments.empty()) continue;
    auto [idx, q] = queries_for(g);
    if (idx.empty()) continue;
    auto resident = cache.get(snap, g);
    BatchOptions opts;
    opts.k = top_k;
    auto hits = resident->index.query(q, thresholds.clone, opts);
    auto& out = report.clone_hits[static_cast<std::size_t>(g)];
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto& f = fragments[idx[r]];
      for (const auto& h : hits[r]) {
        if (resident->degenerate[h.row]) continue;
        const auto& m = table.fragments[h.row];
        out.push_back({f.fragment_id, f.span, m.fragment_id, m.source_id, m.span, h.score});
      }
    }
  }

  if (!snap.bug_matrix.row_index.empty()) {
    auto [idx, q] = queries_for(Granularity::Statement);
    if (!idx.empty()) {
      auto bugs = cache.get(snap, MatrixKind::Bug);
      auto hits = bugs->index.query(q, thresholds.bug);
      const auto categories = bug_categories(snap);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& f = fragments[idx[r]];
        std::map<std::string, std::pair<double, std::size_t>> best;
        for (const auto& h : hits[r]) {
          const auto& row = snap.bug_matrix.row_index[h.row];
          auto [it, inserted] = best.try_emplace(row.bug_id, h.score, row.statement_index);
          if (!inserted && h.score > it->second.first) it->second = {h.score, row.statement_index};
        }
        for (const auto& [bug_id, value] : best) {
          BugHit hit{f.fragment_id, f.span, bug_id, categories.at(bug_id), value.first, value.second,
                     std::nullopt, std::nullopt};
          fill_parents(hit, f.parent_id, parents);
          report.bug_hits.push_back(std::move(hit));
        }
      }
    }
  }
  return report;
}

}  // namespace solembed
