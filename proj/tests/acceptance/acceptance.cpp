// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "solembed/bug_catalog.hpp"
#include "solembed/detectors.hpp"
#include "solembed/ingestion.hpp"
#include "solembed/service.hpp"
#include "synthetic.hpp"

#include "httplib.h"
#include "json.hpp"

namespace solembed {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

// Pinned tolerances and budgets.
constexpr double kExactTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-9;
constexpr double kBatchScoreTolerance = 1e-6;
constexpr double kMinSpeedup = 5.0;
constexpr Eigen::Index kSpeedQueryRows = 16;
constexpr double kNormalizationBudgetS = 10.0;
constexpr double kBatchBudgetS = 60.0;
constexpr double kCloneBudgetS = 60.0;
constexpr double kBugBudgetS = 60.0;
constexpr double kP95BudgetMs = 500.0;
constexpr std::size_t kSloStatements = 10000;
constexpr int kSloRequests = 200;

const std::string kBugStatement = "require(msg.sender.call.value(1 ether)());";
const std::string kMutatedBugStatement = "require(msg.sender.call.value(7 ether)());";

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string file_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "c%04zu.sol", i);
  return name;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<std::string>& texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) testing::write_source(dir, file_name(i), texts[i]);
}

std::string contract_id(const Snapshot& s, std::size_t i) {
  return s.at(Granularity::Contract).fragments.at(i).fragment_id;
}

RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// --- criteria ---------------------------------------------------------------

void normalization_invariance(Outcome& o) {
  const auto t0 = Clock::now();
  testing::ContractGenerator gen(1001);
  std::vector<testing::ContractTemplate> templates;
  std::vector<std::string> originals, variants;
  for (int i = 0; i < 20; ++i) {
    templates.push_back(gen.next());
    originals.push_back(testing::render(templates.back(), i));
    variants.push_back(testing::render(templates.back(), 500 + i, {true, static_cast<std::uint64_t>(i)}));
  }
  const auto table = testing::train_on(originals, 100, 10);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = testing::contract_input("a.sol", originals[i], *table);
    const auto b = testing::contract_input("b.sol", variants[i], *table);
    o.require(!a.vectors.empty() && !b.vectors.empty(), "contract parsed");
    if (a.vectors.empty() || b.vectors.empty()) continue;
    const double s = similarity(a.vectors.front().vector, b.vectors.front().vector);
    worst = std::max(worst, std::abs(1.0 - s));
  }
  const double elapsed = seconds_since(t0);
  o.detail << "20 variants, max |1-s|=" << worst << ", " << elapsed << "s";
  o.require(worst <= kExactTolerance, "similarity 1.0");
  o.require(elapsed < kNormalizationBudgetS, "runtime");
}

void metric_properties(Outcome& o) {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  double worst_oracle = 0.0;
  bool symmetric = true, in_range = true, self_one = true, opposite_zero = true;
  for (int i = 0; i < 1000; ++i) {
    Vector a = random_matrix(1, 100, rng).row(0).transpose() * scale(rng);
    Vector b = random_matrix(1, 100, rng).row(0).transpose() * scale(rng);
    const double ab = similarity(a, b);
    const double ba = similarity(b, a);
    symmetric &= ab == ba;
    in_range &= ab >= 0.0 && ab <= 1.0;
    self_one &= similarity(a, a) == 1.0;
    opposite_zero &= similarity(a, Vector(-a)) == 0.0;
    long double diff = 0, na = 0, nb = 0;
    for (int k = 0; k < 100; ++k) {
      diff += (static_cast<long double>(a[k]) - b[k]) * (static_cast<long double>(a[k]) - b[k]);
      na += static_cast<long double>(a[k]) * a[k];
      nb += static_cast<long double>(b[k]) * b[k];
    }
    const long double oracle = 1.0L - std::sqrt(diff) / (std::sqrt(na) + std::sqrt(nb));
    worst_oracle = std::max(worst_oracle, static_cast<double>(std::fabs(oracle - ab)));
  }
  o.detail << "1000 pairs d=100, max oracle error " << worst_oracle;
  o.require(symmetric, "symmetry");
  o.require(in_range, "range");
  o.require(self_one, "s(v,v)=1");
  o.require(opposite_zero, "s(v,-v)=0");
  o.require(worst_oracle <= kOracleTolerance, "oracle");
}

template <typename Fn>
double median_seconds(int repeats, Fn&& fn) {
  std::vector<double> samples;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = Clock::now();
    fn();
    samples.push_back(seconds_since(t0));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

bool same_hits(const std::vector<std::vector<QueryHit>>& a, const std::vector<std::vector<QueryHit>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t q = 0; q < a.size(); ++q) {
    if (a[q].size() != b[q].size()) return false;
    for (std::size_t i = 0; i < a[q].size(); ++i) {
      if (a[q][i].row != b[q][i].row || std::abs(a[q][i].score - b[q][i].score) > kBatchScoreTolerance) return false;
    }
  }
  return true;
}

void batch_equivalence(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1003);
  bool equal = true;
  for (auto [nq, nm, d] : {std::tuple{50, 200, 16}, std::tuple{100, 1000, 128}}) {
    const RowMatrix q = random_matrix(nq, d, rng);
    const RowMatrix m = random_matrix(nm, d, rng);
    const Vector norms = row_norms(m);
    const SimilarityIndex<double> index(m, norms);
    for (double theta : {0.0, 0.3, 0.6, 0.95}) {
      const auto naive = naive_query(q, m, theta);
      equal &= same_hits(naive, batch_query(q, m, norms, theta));
      equal &= same_hits(naive, index.query(q, theta));
    }
  }
  // A validation request queries the resident matrix with all fragments of
  // the submitted contract at once; the single-row ratio is reported too.
  const RowMatrix corpus = random_matrix(10000, 100, rng);
  const RowMatrix queries = random_matrix(kSpeedQueryRows, 100, rng);
  const RowMatrix single = queries.topRows(1);
  const SimilarityIndex<double> index(corpus);
  std::size_t sink = 0;
  const double naive = median_seconds(9, [&] { sink += naive_query(queries, corpus, 0.9).size(); });
  const double matrix = median_seconds(9, [&] { sink += index.query(queries, 0.9).size(); });
  const double naive1 = median_seconds(31, [&] { sink += naive_query(single, corpus, 0.9).size(); });
  const double matrix1 = median_seconds(31, [&] { sink += index.query(single, 0.9).size(); });
  const double speedup = naive / matrix;
  const double elapsed = seconds_since(t0);
  o.detail << "hit sets equal=" << equal << ", N=10000 d=100 " << kSpeedQueryRows << " queries: naive "
           << naive * 1e3 << "ms, matrix " << matrix * 1e3 << "ms, speedup " << speedup
           << "x (single query " << naive1 / matrix1 << "x), " << elapsed << "s";
  o.require(equal, "equivalence");
  o.require(speedup >= kMinSpeedup, "speedup");
  o.require(elapsed < kBatchBudgetS, "runtime");
  if (sink == std::size_t(-1)) std::cout << '\n';
}

void clone_study(Outcome& o) {
  const auto t0 = Clock::now();
  testing::ContractGenerator gen(1004);
  std::vector<testing::ContractTemplate> bases;
  std::vector<std::string> texts;
  for (int i = 0; i < 70; ++i) {
    bases.push_back(gen.next());
    texts.push_back(testing::render(bases.back(), i));
  }
  // Injection log: (clone index, base index).
  std::vector<std::pair<std::size_t, std::size_t>> injected;
  std::mt19937_64 rng(1005);
  std::uniform_int_distribution<std::size_t> pick(0, 69);
  for (int i = 0; i < 30; ++i) {
    const auto base = pick(rng);
    const bool exact = i < 15;
    const std::uint64_t literals = exact ? base : 1000 + static_cast<std::uint64_t>(i);
    texts.push_back(testing::render(bases[base], literals, {true, 2000 + static_cast<std::uint64_t>(i)}));
    injected.emplace_back(texts.size() - 1, base);
  }
  testing::TempDir dir;
  write_corpus(dir.path(), texts);
  auto built = build_store(FilesystemProvider(dir.path()), load_bug_catalog(testing::data_dir() / "bugs.json"), {});
  const auto s = built.store->snapshot();
  o.require(s->at(Granularity::Contract).fragments.size() == 100, "100 contracts stored");
  MatrixCache cache;
  const auto report = detect_corpus_clones(*s, cache, Granularity::Contract, 0.95);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& p : report.pairs) pairs.emplace(p.fragment_a, p.fragment_b);
  std::size_t found = 0;
  for (auto [clone, base] : injected) {
    auto a = contract_id(*s, clone), b = contract_id(*s, base);
    if (a > b) std::swap(a, b);
    found += pairs.count({a, b});
  }
  const double recall = static_cast<double>(found) / static_cast<double>(injected.size());
  bool monotone = true;
  double previous = 2.0;
  std::ostringstream ratios;
  for (double theta : {0.90, 0.95, 0.99, 1.0}) {
    const double ratio = detect_corpus_clones(*s, cache, Granularity::Contract, theta).clone_ratio;
    monotone &= ratio <= previous;
    previous = ratio;
    ratios << (theta == 0.90 ? "" : ",") << ratio;
  }
  const double elapsed = seconds_since(t0);
  o.detail << "recall " << recall << " (" << found << "/30), clone_ratio over {0.90,0.95,0.99,1.0} = "
           << ratios.str() << ", " << elapsed << "s";
  o.require(recall == 1.0, "recall");
  o.require(monotone, "monotone clone_ratio");
  o.require(elapsed < kCloneBudgetS, "runtime");
}

void bug_study(Outcome& o) {
  const auto t0 = Clock::now();
  testing::ContractGenerator gen(1006);
  std::vector<std::string> texts;
  std::set<std::size_t> planted;
  for (std::size_t i = 0; i < 100; ++i) {
    if (i % 10 == 0) {
      const auto& stmt = i % 20 == 0 ? kBugStatement : kMutatedBugStatement;
      texts.push_back(testing::render(gen.with_statement(stmt), i));
      planted.insert(i);
    } else {
      texts.push_back(testing::render(gen.next(), i));
    }
  }
  testing::TempDir dir;
  write_corpus(dir.path(), texts);
  auto built = build_store(FilesystemProvider(dir.path()), load_bug_catalog(testing::data_dir() / "bugs.json"), {});
  const auto s = built.store->snapshot();
  MatrixCache cache;
  const auto scan = detect_corpus_bugs(*s, cache, 0.90);
  std::set<std::string> planted_ids;
  for (auto i : planted) planted_ids.insert(contract_id(*s, i));
  std::set<std::string> true_hits;
  std::size_t false_positives = 0;
  for (const auto& h : scan.hits) {
    const bool in_planted = h.contract_id && planted_ids.count(*h.contract_id);
    if (!in_planted) {
      ++false_positives;
    } else if (h.bug_id == "reentrancy-call-value" && h.score == 1.0) {
      true_hits.insert(*h.contract_id);
    }
  }
  const double elapsed = seconds_since(t0);
  o.detail << true_hits.size() << "/10 planted statements hit at 1.0, " << false_positives
           << " false positives in 90 clean contracts, " << elapsed << "s";
  o.require(true_hits.size() == 10, "all planted hit");
  o.require(false_positives == 0, "no false positives");
  o.require(elapsed < kBugBudgetS, "runtime");
}

void training_sanity(Outcome& o) {
  std::vector<TokenStream> corpus;
  for (int i = 0; i < 1000; ++i) corpus.push_back({"a", "b"});
  for (int i = 0; i < 1000; ++i) corpus.push_back({"c"});
  auto cosine = [](const EmbeddingTable& t, const std::string& x, const std::string& y) {
    const Vector u = t.vector(*t.vocab().id(x)).transpose();
    const Vector v = t.vector(*t.vocab().id(y)).transpose();
    return u.dot(v) / (u.norm() * v.norm());
  };
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Hyperparams hp;
    hp.seed = seed;
    hp.min_count = 1;
    const auto t = train_embeddings(corpus, hp);
    wins += cosine(t, "a", "b") > cosine(t, "a", "c");
  }
  Hyperparams hp;
  hp.seed = 7;
  hp.min_count = 1;
  const bool reproducible = train_embeddings(corpus, hp) == train_embeddings(corpus, hp);
  o.detail << wins << "/20 seeds, bit-reproducible=" << reproducible;
  o.require(wins >= 18, "co-occurrence");
  o.require(reproducible, "reproducibility");
}

void persistence_round_trip(Outcome& o) {
  testing::ContractGenerator gen(1007);
  testing::TempDir corpus;
  for (int i = 0; i < 4; ++i) testing::write_source(corpus.path(), file_name(i), testing::render(gen.next(), i));
  Hyperparams hp;
  hp.dim = 32;
  hp.epochs = 2;
  hp.min_count = 1;
  auto built = build_store(FilesystemProvider(corpus.path()), load_bug_catalog(testing::data_dir() / "bugs.json"), hp);
  const auto s = built.store->snapshot();
  testing::TempDir dir;
  save_snapshot(*s, dir.path());
  const bool exact = snapshots_equal(*s, *load_snapshot(dir.path()));
  o.detail << s->fragment_count() << " fragments, bit-exact=" << exact;
  o.require(s->fragment_count() >= 50, "at least 50 fragments");
  o.require(exact, "bit-exact");

  std::size_t named = 0;
  const std::vector<std::string> files = {"manifest.json", "embeddings.txt", "fragments.jsonl", "matrix_contract.txt",
                                          "matrix_function.txt", "matrix_statement.txt", "bugs.json"};
  for (const auto& name : files) {
    testing::TempDir copy;
    std::filesystem::copy(dir.path(), copy.path(), std::filesystem::copy_options::recursive);
    const auto text = testing::read_text(copy / name);
    std::ofstream(copy / name, std::ios::trunc) << text.substr(0, text.size() / 2);
    try {
      load_snapshot(copy.path());
    } catch (const SnapshotError& e) {
      named += e.file == name;
    }
  }
  o.detail << ", " << named << "/" << files.size() << " truncated files named";
  o.require(named == files.size(), "corrupt files named");
}

void service_slo(Outcome& o) {
  testing::ContractGenerator gen(1008);
  testing::TempDir dir;
  std::vector<std::string> texts;
  while (texts.size() * 12 < kSloStatements + 600) texts.push_back(testing::render(gen.next(), texts.size()));
  write_corpus(dir / "corpus", texts);
  std::vector<std::string> extra;
  for (int i = 0; i < 5; ++i) {
    extra.push_back(testing::render(gen.next(), 9000 + i));
    testing::write_source(dir / "extra", "e" + std::to_string(i) + ".sol", extra.back());
  }
  Hyperparams hp;
  hp.epochs = 3;
  auto built = build_store(FilesystemProvider(dir / "corpus"), load_bug_catalog(testing::data_dir() / "bugs.json"), hp);
  const std::size_t statements = built.store->snapshot()->at(Granularity::Statement).fragments.size();

  MatrixCache cache;
  ServiceConfig config;
  config.admin_token = "acceptance";
  ApiService api(*built.store, cache, config);
  HttpServer server(api);
  const int port = server.bind_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);

  // Fresh contracts, never seen by the store.
  std::vector<std::string> bodies;
  for (int i = 0; i < kSloRequests; ++i) bodies.push_back(json{{"source", testing::render(gen.next(), 20000 + i)}}.dump());
  client.Post("/api/validate", bodies[0], "application/json");
  std::vector<double> latencies;
  bool all_ok = true;
  for (const auto& body : bodies) {
    const auto t0 = Clock::now();
    auto r = client.Post("/api/validate", body, "application/json");
    latencies.push_back(seconds_since(t0) * 1e3);
    all_ok &= r && r->status == 200;
  }
  std::sort(latencies.begin(), latencies.end());
  const double p95 = latencies[static_cast<std::size_t>(std::ceil(0.95 * latencies.size())) - 1];

  // Validate a copy of a batch member while that batch is ingested.
  const auto pre = built.store->version();
  std::atomic<bool> done{false};
  std::thread writer([&] {
    httplib::Client admin("127.0.0.1", port);
    admin.set_read_timeout(120, 0);
    admin.Post("/api/corpus/ingest", {{kAdminTokenHeader, "acceptance"}},
               json{{"dir", (dir / "extra").string()}}.dump(), "application/json");
    done = true;
  });
  const auto probe = json{{"source", extra[2]}}.dump();
  int consistent = 0, inconsistent = 0, seen_pre = 0, seen_post = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool finished = done;
    auto r = client.Post("/api/validate", probe, "application/json");
    if (!r || r->status != 200) {
      ++inconsistent;
      continue;
    }
    const auto j = json::parse(r->body);
    const auto v = j["corpus_version"].get<std::uint64_t>();
    const auto& hits = j["clone_hits"]["contract"];
    const bool found = !hits.empty() && hits[0]["score"] == 1.0;
    const bool ok = (v == pre && !found) || (v == pre + 1 && found);
    (ok ? consistent : inconsistent)++;
    (v == pre ? seen_pre : seen_post)++;
    if (finished) break;
  }
  writer.join();
  server.stop();
  listener.join();

  const bool no_secondary = !std::filesystem::exists(SOLEMBED_BINARY_DIR "/webui");
  o.detail << statements << " corpus statements, p95 " << p95 << "ms over " << kSloRequests
           << " requests; during ingest " << consistent << " consistent / " << inconsistent
           << " inconsistent responses (" << seen_pre << " pre, " << seen_post << " post); secondary built="
           << !no_secondary;
  o.require(statements >= kSloStatements, "corpus size");
  o.require(all_ok, "all requests 200");
  o.require(p95 < kP95BudgetMs, "p95");
  o.require(inconsistent == 0 && seen_post > 0, "consistent snapshot");
  o.require(built.store->version() == pre + 1, "ingest published once");
  o.require(no_secondary, "no secondary component");
}

}  // namespace
}  // namespace solembed

int main() {
  using namespace solembed;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"normalization-invariance", normalization_invariance},
      {"metric-properties", metric_properties},
      {"batch-naive-equivalence-and-speed", batch_equivalence},
      {"clone-study", clone_study},
      {"bug-study", bug_study},
      {"training-sanity", training_sanity},
      {"persistence-round-trip", persistence_round_trip},
      {"service-slo", service_slo},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
