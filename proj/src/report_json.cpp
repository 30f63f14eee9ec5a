#include "solembed/report_json.hpp"

namespace solembed {

Json to_json(const Span& span) {
  return {{"start", {{"line", span.start.line}, {"col", span.start.col}}},
          {"end", {{"line", span.end.line}, {"col", span.end.col}}}};
}

Json to_json(const Diagnostic& d) {
  return {{"severity", to_string(d.severity)}, {"message", d.message}, {"line", d.line}, {"col", d.col}};
}

Json to_json(const ClonePair& p) {
  return {{"fragment_a", p.fragment_a}, {"fragment_b", p.fragment_b}, {"score", p.score}, {"exact", p.exact}};
}

Json to_json(const CloneReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) pairs.push_back(to_json(p));
  return {{"granularity", to_string(r.granularity)},
          {"clone_threshold", r.clone_threshold},
          {"corpus_version", r.corpus_version},
          {"fragments", r.fragments},
          {"degenerate_fragments", r.degenerate_fragments},
          {"clone_ratio", r.clone_ratio},
          {"pairs", pairs},
          {"clusters", r.clusters}};
}

Json to_json(const BugHit& h) {
  return {{"fragment_id", h.fragment_id},
          {"span", to_json(h.span)},
          {"bug_id", h.bug_id},
          {"category", h.category},
          {"score", h.score},
          {"statement_index", h.statement_index},
          {"function_id", h.function_id ? Json(*h.function_id) : Json(nullptr)},
          {"contract_id", h.contract_id ? Json(*h.contract_id) : Json(nullptr)}};
}

Json to_json(const BugScan& s) {
  Json hits = Json::array();
  for (const auto& h : s.hits) hits.push_back(to_json(h));
  return {{"bug_threshold", s.bug_threshold}, {"corpus_version", s.corpus_version}, {"hits", hits}};
}

Json to_json(const CloneHit& h) {
  return {{"fragment_id", h.fragment_id},
          {"span", to_json(h.span)},
          {"match_id", h.match_id},
          {"match_source_id", h.match_source_id},
          {"match_span", to_json(h.match_span)},
          {"score", h.score}};
}

Json to_json(const ValidationReport& r) {
  Json diagnostics = Json::array();
  for (const auto& d : r.diagnostics) diagnostics.push_back(to_json(d));
  Json clones = Json::object();
  for (auto g : kGranularities) {
    Json hits = Json::array();
    for (const auto& h : r.clone_hits[static_cast<std::size_t>(g)]) hits.push_back(to_json(h));
    clones[std::string(to_string(g))] = hits;
  }
  Json bugs = Json::array();
  for (const auto& h : r.bug_hits) bugs.push_back(to_json(h));
  return {{"source_id", r.source_id},
          {"corpus_version", r.corpus_version},
          {"clone_threshold", r.thresholds.clone},
          {"bug_threshold", r.thresholds.bug},
          {"top_k", r.top_k},
          {"diagnostics", diagnostics},
          {"clone_hits", clones},
          {"bug_hits", bugs},
          {"oov_rate", r.oov_rate},
          {"token_count", r.token_count},
          {"oov_count", r.oov_count},
          {"degenerate_fragments", r.degenerate_fragments}};
}

Json to_json(const IngestDelta& d) {
  Json failed = Json::array();
  for (const auto& f : d.failed) failed.push_back({{"path", f.path}, {"diagnostic", to_json(f.diagnostic)}});
  return {{"added", d.added},
          {"skipped_duplicates", d.skipped_duplicates},
          {"failed", failed},
          {"new_version", d.new_version}};
}

Json to_json(const ModelUpdate& u) {
  Json j = to_json(u.delta);
  j["oov_rate"] = u.oov_rate;
  j["token_count"] = u.token_count;
  j["oov_count"] = u.oov_count;
  j["retrain_advised"] = u.retrain_advised;
  return j;
}

Json snapshot_counts(const Snapshot& s) {
  Json counts = Json::object();
  for (auto g : kGranularities) counts[std::string(to_string(g))] = s.at(g).fragments.size();
  counts["bugs"] = s.bugs.size();
  counts["bug_rows"] = s.bug_matrix.row_index.size();
  counts["sources"] = s.sources.size();
  return counts;
}

Json stats_json(const Snapshot& s, const Thresholds& t) {
  return {{"corpus_version", s.version},
          {"dim", s.dim()},
          {"vocabulary_size", s.table ? s.table->size() : 0},
          {"counts", snapshot_counts(s)},
          {"thresholds", {{"clone_threshold", t.clone}, {"bug_threshold", t.bug}}},
          {"categories", s.categories}};
}

Json bugs_json(const Snapshot& s) {
  Json bugs = Json::array();
  for (const auto& b : s.bugs) {
    bugs.push_back({{"bug_id", b.bug_id},
                    {"category", b.category},
                    {"description", b.description},
                    {"provenance", b.provenance},
                    {"statements", b.statement_streams.size()}});
  }
  return {{"categories", s.categories}, {"bugs", bugs}};
}

Json api_error(std::string code, std::string message, std::optional<Json> details) {
  Json j = {{"code", std::move(code)}, {"message", std::move(message)}};
  if (details) j["details"] = std::move(*details);
  return j;
}

}  // namespace solembed
