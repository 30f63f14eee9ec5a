#include <fstream>
#include <sstream>

#include "json.hpp"
#include "solembed/corpus_store.hpp"
#include "solembed/similarity.hpp"

namespace solembed {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kManifest = "manifest.json";
constexpr const char* kEmbeddings = "embeddings.txt";
constexpr const char* kFragments = "fragments.jsonl";
constexpr const char* kBugs = "bugs.json";
constexpr const char* kSources = "sources.jsonl";

std::string matrix_file(Granularity g) { return "matrix_" + std::string(to_string(g)) + ".txt"; }

std::optional<Digest> parse_digest(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  Digest d{};
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    d[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return d;
}

json span_json(const Span& s) {
  return {{"start", {{"line", s.start.line}, {"col", s.start.col}}},
          {"end", {{"line", s.end.line}, {"col", s.end.col}}}};
}

Span span_from(const json& j) {
  return {{j.at("start").at("line").get<int>(), j.at("start").at("col").get<int>()},
          {j.at("end").at("line").get<int>(), j.at("end").at("col").get<int>()}};
}

// Write to a sibling temp file, then rename over the target.
void write_file(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError(path.filename().string(), "cannot open for writing");
    out << content;
    if (!out.flush()) throw SnapshotError(path.filename().string(), "write failed");
  }
  fs::rename(tmp, path);
}

std::ifstream open_input(const fs::path& dir, const std::string& name) {
  std::ifstream in(dir / name, std::ios::binary);
  if (!in) throw SnapshotError(name, "missing or unreadable");
  return in;
}

json read_json(const fs::path& dir, const std::string& name) {
  auto in = open_input(dir, name);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SnapshotError(name, std::string("malformed JSON: ") + e.what());
  }
}

template <typename Fn>
void for_each_line(const fs::path& dir, const std::string& name, Fn&& fn) {
  auto in = open_input(dir, name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      fn(line, lineno);
    } catch (const SnapshotError&) {
      throw;
    } catch (const std::exception& e) {
      throw SnapshotError(name, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

void save_snapshot(const Snapshot& snap, const fs::path& dir) {
  fs::create_directories(dir);

  json counts = json::object();
  for (auto g : kGranularities) counts[std::string(to_string(g))] = snap.at(g).fragments.size();
  counts["bugs"] = snap.bugs.size();
  counts["bug_rows"] = snap.bug_matrix.row_index.size();
  counts["sources"] = snap.sources.size();
  json freqs = json::array();
  for (const auto& e : snap.table->vocab().entries()) freqs.push_back(e.frequency);
  json granularities = json::array();
  for (auto g : kGranularities) granularities.push_back(to_string(g));
  json manifest = {
      {"format", "solembed-snapshot"},
      {"format_version", kSnapshotFormatVersion},
      {"version", snap.version},
      {"dim", snap.dim()},
      {"granularities", granularities},
      {"counts", counts},
      {"categories", snap.categories},
      {"vocabulary", {{"size", snap.table->size()}, {"min_count", snap.table->vocab().min_count()},
                      {"frequencies", freqs}}},
  };
  write_file(dir / kManifest, manifest.dump(2) + "\n");

  {
    std::ostringstream out;
    write_embeddings(out, *snap.table);
    write_file(dir / kEmbeddings, out.str());
  }

  {
    std::ostringstream out;
    for (auto g : kGranularities) {
      for (const auto& f : snap.at(g).fragments) {
        json j = {{"fragment_id", f.fragment_id},
                  {"source_id", f.source_id},
                  {"granularity", to_string(f.granularity)},
                  {"span", span_json(f.span)},
                  {"parent_id", f.parent_id ? json(*f.parent_id) : json(nullptr)},
                  {"digest", to_hex(f.digest)},
                  {"degenerate", f.degenerate}};
        out << j.dump() << '\n';
      }
    }
    write_file(dir / kFragments, out.str());
  }

  for (auto g : kGranularities) {
    std::ostringstream out;
    const auto& rows = snap.at(g).matrix.rows;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        if (j) out << ' ';
        out << format_double(rows(i, j));
      }
      out << '\n';
    }
    write_file(dir / matrix_file(g), out.str());
  }

  {
    json bugs = json::array();
    for (const auto& b : snap.bugs) {
      bugs.push_back({{"bug_id", b.bug_id},
                      {"category", b.category},
                      {"statement_streams", b.statement_streams},
                      {"description", b.description},
                      {"provenance", b.provenance}});
    }
    write_file(dir / kBugs, bugs.dump(2) + "\n");
  }

  {
    std::ostringstream out;
    for (const auto& s : snap.sources) {
      json j = {{"source_id", s->source_id},
                {"path", s->path},
                {"content_hash", to_hex(s->content_hash)},
                {"text", s->text}};
      out << j.dump() << '\n';
    }
    write_file(dir / kSources, out.str());
  }
}

std::shared_ptr<const Snapshot> load_snapshot(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw SnapshotError(dir.string(), "not a snapshot directory");
  const auto manifest = read_json(dir, kManifest);
  auto snap = std::make_shared<Snapshot>();
  std::size_t vocab_size = 0;
  std::vector<std::uint64_t> freqs;
  std::uint64_t min_count = 1;
  int dim = 0;
  try {
    if (manifest.at("format").get<std::string>() != "solembed-snapshot") {
      throw SnapshotError(kManifest, "not a solembed snapshot");
    }
    auto fv = manifest.at("format_version").get<int>();
    if (fv != kSnapshotFormatVersion) {
      throw SnapshotError(kManifest, "unsupported snapshot format version " + std::to_string(fv) +
                                         " (expected " + std::to_string(kSnapshotFormatVersion) + ")");
    }
    snap->version = manifest.at("version").get<std::uint64_t>();
    dim = manifest.at("dim").get<int>();
    snap->categories = manifest.at("categories").get<std::vector<std::string>>();
    vocab_size = manifest.at("vocabulary").at("size").get<std::size_t>();
    min_count = manifest.at("vocabulary").at("min_count").get<std::uint64_t>();
    freqs = manifest.at("vocabulary").at("frequencies").get<std::vector<std::uint64_t>>();
  } catch (const json::exception& e) {
    throw SnapshotError(kManifest, std::string("missing or invalid field: ") + e.what());
  }
  if (freqs.size() != vocab_size) throw SnapshotError(kManifest, "vocabulary frequency count mismatch");

  {
    auto in = open_input(dir, kEmbeddings);
    EmbeddingsFile file;
    try {
      file = read_embeddings(in);
    } catch (const std::exception& e) {
      throw SnapshotError(kEmbeddings, e.what());
    }
    if (file.tokens.size() != vocab_size || file.vectors.cols() != dim) {
      throw SnapshotError(kEmbeddings, "shape does not match manifest");
    }
    std::vector<Vocabulary::Entry> entries;
    for (std::size_t i = 0; i < file.tokens.size(); ++i) entries.push_back({file.tokens[i], freqs[i]});
    try {
      snap->table = std::make_shared<EmbeddingTable>(Vocabulary(std::move(entries), min_count),
                                                     std::move(file.vectors));
    } catch (const std::exception& e) {
      throw SnapshotError(kEmbeddings, e.what());
    }
  }

  for_each_line(dir, kFragments, [&](const std::string& line, std::size_t) {
    auto j = json::parse(line);
    FragmentRecord f;
    f.fragment_id = j.at("fragment_id").get<std::string>();
    f.source_id = j.at("source_id").get<std::string>();
    auto g = parse_granularity(j.at("granularity").get<std::string>());
    if (!g) throw std::runtime_error("unknown granularity");
    f.granularity = *g;
    f.span = span_from(j.at("span"));
    if (!j.at("parent_id").is_null()) f.parent_id = j.at("parent_id").get<std::string>();
    auto digest = parse_digest(j.at("digest").get<std::string>());
    if (!digest) throw std::runtime_error("malformed digest");
    f.digest = *digest;
    f.degenerate = j.at("degenerate").get<bool>();
    auto& table = snap->tables[static_cast<std::size_t>(f.granularity)];
    if (!snap->fragment_rows.emplace(f.fragment_id, std::pair{f.granularity, table.fragments.size()})
             .second) {
      throw std::runtime_error("duplicate fragment id " + f.fragment_id);
    }
    auto& ids = snap->exact_index[f.digest];
    ids.insert(std::upper_bound(ids.begin(), ids.end(), f.fragment_id), f.fragment_id);
    table.matrix.row_ids.push_back(f.fragment_id);
    table.fragments.push_back(std::move(f));
  });

  for (auto g : kGranularities) {
    auto& table = snap->tables[static_cast<std::size_t>(g)];
    const auto name = matrix_file(g);
    const auto expected = static_cast<Eigen::Index>(table.fragments.size());
    RowMatrix rows(expected, dim);
    Eigen::Index r = 0;
    for_each_line(dir, name, [&](const std::string& line, std::size_t lineno) {
      if (r >= expected) throw std::runtime_error("more rows than fragments");
      std::string_view rest(line);
      for (int c = 0; c < dim; ++c) {
        auto sp = rest.find(' ');
        auto field = rest.substr(0, sp);
        rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
        auto v = parse_double(field);
        if (!v) {
          throw SnapshotError(name, "line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(dim) + " numbers");
        }
        rows(r, c) = *v;
      }
      if (!rest.empty()) throw std::runtime_error("trailing data");
      ++r;
    });
    if (r != expected) {
      throw SnapshotError(name, "truncated: " + std::to_string(r) + " rows for " +
                                    std::to_string(expected) + " fragments");
    }
    table.matrix.norms = row_norms(rows);
    table.matrix.rows = std::move(rows);
    table.matrix.version = snap->version;
  }

  {
    auto bugs = read_json(dir, kBugs);
    try {
      for (const auto& j : bugs) {
        BugRecord b;
        b.bug_id = j.at("bug_id").get<std::string>();
        b.category = j.at("category").get<std::string>();
        b.statement_streams = j.at("statement_streams").get<std::vector<TokenStream>>();
        b.description = j.at("description").get<std::string>();
        b.provenance = j.at("provenance").get<std::string>();
        snap->bugs.push_back(std::move(b));
      }
    } catch (const json::exception& e) {
      throw SnapshotError(kBugs, std::string("invalid bug record: ") + e.what());
    }
    std::vector<Vector> rows;
    for (const auto& b : snap->bugs) {
      for (std::size_t s = 0; s < b.statement_streams.size(); ++s) {
        rows.push_back(embed_stream(b.statement_streams[s], *snap->table).vector);
        snap->bug_matrix.row_index.push_back({b.bug_id, s});
      }
    }
    RowMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    snap->bug_matrix.norms = row_norms(m);
    snap->bug_matrix.rows = std::move(m);
    snap->bug_matrix.version = snap->version;
  }

  for_each_line(dir, kSources, [&](const std::string& line, std::size_t) {
    auto j = json::parse(line);
    auto s = std::make_shared<SourceRecord>();
    s->source_id = j.at("source_id").get<std::string>();
    s->path = j.at("path").get<std::string>();
    auto digest = parse_digest(j.at("content_hash").get<std::string>());
    if (!digest) throw std::runtime_error("malformed content_hash");
    s->content_hash = *digest;
    s->text = j.at("text").get<std::string>();
    snap->source_hashes.insert(to_hex(s->content_hash));
    snap->sources.push_back(std::move(s));
  });

  return snap;
}

}  // namespace solembed
