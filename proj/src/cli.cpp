#include "solembed/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>

#include "CLI11.hpp"
#include "solembed/bug_catalog.hpp"
#include "solembed/detectors.hpp"
#include "solembed/ingestion.hpp"
#include "solembed/parser.hpp"
#include "solembed/report_json.hpp"
#include "solembed/service.hpp"

namespace solembed {
namespace {

namespace fs = std::filesystem;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kUnitInterval(
    [](std::string& s) -> std::string {
      auto v = parse_double(s);
      if (!v || !(*v > 0.0 && *v <= 1.0)) return "threshold must be in (0, 1]: " + s;
      return {};
    },
    "(0,1]");

const CLI::Validator kGranularityName(
    [](std::string& s) -> std::string {
      return parse_granularity(s) ? std::string() : "granularity must be contract, function or statement";
    },
    "contract|function|statement");

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::unique_ptr<CorpusStore> open_store(const fs::path& dir) {
  return std::make_unique<CorpusStore>(load_snapshot(dir));
}

void print(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

double median_millis(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

template <typename Fn>
double time_millis(int repeats, Fn&& fn) {
  std::vector<double> samples;
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return median_millis(std::move(samples));
}

void run_bench(std::ostream& out, int rows, int dim, int repeats, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix corpus(rows, dim);
  for (Eigen::Index i = 0; i < corpus.size(); ++i) corpus.data()[i] = normal(rng);
  RowMatrix query(1, dim);
  for (Eigen::Index i = 0; i < dim; ++i) query(0, i) = normal(rng);
  const Vector norms = row_norms(corpus);
  const SimilarityIndex<double> index(corpus, norms);
  const double theta = 0.9;
  std::size_t sink = 0;
  const double naive = time_millis(repeats, [&] { sink += naive_query(query, corpus, theta)[0].size(); });
  const double batch =
      time_millis(repeats, [&] { sink += batch_query(query, corpus, norms, theta)[0].size(); });
  const double resident = time_millis(repeats, [&] { sink += index.query(query, theta)[0].size(); });
  out << "method,rows,dim,millis\n";
  out << "naive," << rows << ',' << dim << ',' << naive << '\n';
  out << "batch," << rows << ',' << dim << ',' << batch << '\n';
  out << "index," << rows << ',' << dim << ',' << resident << '\n';
  if (sink == std::size_t(-1)) out << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solidity code-embedding clone and bug detector", "solembed"};
  app.require_subcommand(1);

  Hyperparams hp;
  std::string corpus_dir, store_dir, bugs_path, glob = "*.sol", file, granularity = "contract";
  Thresholds thresholds;
  std::size_t top_k = 5;
  int port = 8080, rows = 10000, dim = 100, repeats = 9;
  std::string host = "127.0.0.1", admin_token, emit_stream;
  bool emit_ast = false;
  std::uint64_t bench_seed = 7;

  auto* train = app.add_subcommand("train", "Train embeddings on a corpus and build a store");
  train->add_option("corpus_dir", corpus_dir, "Directory of .sol files")->required()->check(CLI::ExistingDirectory);
  train->add_option("--store", store_dir, "Snapshot directory to write")->required();
  train->add_option("--bugs", bugs_path, "Bug catalog JSON")->check(CLI::ExistingFile);
  train->add_option("--glob", glob, "File name pattern")->capture_default_str();
  train->add_option("--dim", hp.dim)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--window", hp.window)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--negatives", hp.negatives)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--epochs", hp.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--lr", hp.initial_lr, "Initial learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--min-count", hp.min_count)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", hp.seed)->capture_default_str();

  auto* ingest_cmd = app.add_subcommand("ingest", "Add new sources with the frozen table");
  ingest_cmd->add_option("dir", corpus_dir)->required()->check(CLI::ExistingDirectory);
  ingest_cmd->add_option("--store", store_dir)->required();
  ingest_cmd->add_option("--glob", glob)->capture_default_str();

  auto* clones = app.add_subcommand("clones", "Report clone pairs in the corpus");
  clones->add_option("--store", store_dir)->required();
  clones->add_option("--granularity", granularity)->capture_default_str()->check(kGranularityName);
  clones->add_option("--threshold", thresholds.clone)->capture_default_str()->check(kUnitInterval);

  auto* bugs = app.add_subcommand("bugs", "Scan the corpus for known bug statements");
  bugs->add_option("--store", store_dir)->required();
  bugs->add_option("--threshold", thresholds.bug)->capture_default_str()->check(kUnitInterval);

  auto* validate = app.add_subcommand("validate", "Check one contract against the corpus");
  validate->add_option("file", file)->required();
  validate->add_option("--store", store_dir)->required();
  validate->add_option("--top-k", top_k)->capture_default_str()->check(CLI::PositiveNumber);
  validate->add_option("--clone-threshold", thresholds.clone)->capture_default_str()->check(kUnitInterval);
  validate->add_option("--bug-threshold", thresholds.bug)->capture_default_str()->check(kUnitInterval);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--store", store_dir)->required();
  serve->add_option("--port", port)->capture_default_str()->check(CLI::Range(1, 65535));
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--admin-token", admin_token, std::string("Defaults to $") + kAdminTokenEnv);
  serve->add_option("--clone-threshold", thresholds.clone)->capture_default_str()->check(kUnitInterval);
  serve->add_option("--bug-threshold", thresholds.bug)->capture_default_str()->check(kUnitInterval);

  auto* bench = app.add_subcommand("bench", "Time the naive loop against the matrix kernels");
  bench->add_option("--rows", rows)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--dim", dim)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--repeats", repeats)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed)->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Print store statistics");
  stats->add_option("--store", store_dir)->required();

  auto* dump = app.add_subcommand("dump", "Print the AST or fragment streams of a file");
  dump->add_option("file", file)->required()->check(CLI::ExistingFile);
  auto* mode = dump->add_option_group("mode");
  mode->add_flag("--emit-ast", emit_ast);
  mode->add_option("--emit-stream", emit_stream)->check(kGranularityName);
  mode->require_option(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) {
      BugCatalog catalog{default_bug_categories(), {}};
      if (!bugs_path.empty()) catalog = load_bug_catalog(bugs_path);
      auto built = build_store(FilesystemProvider(corpus_dir, glob), catalog, hp);
      auto snap = built.store->snapshot();
      save_snapshot(*snap, store_dir);
      print(out, {{"corpus_version", snap->version},
                  {"dim", snap->dim()},
                  {"vocabulary_size", snap->table->size()},
                  {"counts", snapshot_counts(*snap)},
                  {"ingest", to_json(built.delta)}});
      err << "trained " << snap->table->size() << " tokens, stored " << snap->fragment_count()
          << " fragments from " << built.delta.added << " sources (" << built.delta.failed.size()
          << " failed)\n";
    } else if (ingest_cmd->parsed()) {
      auto store = open_store(store_dir);
      auto update = update_model(FilesystemProvider(corpus_dir, glob), *store);
      if (update.delta.added > 0) save_snapshot(*store->snapshot(), store_dir);
      print(out, to_json(update));
      err << "added " << update.delta.added << ", skipped " << update.delta.skipped_duplicates
          << ", failed " << update.delta.failed.size() << ", oov rate " << update.oov_rate
          << (update.retrain_advised ? " (retraining advised)" : "") << '\n';
    } else if (clones->parsed()) {
      auto store = open_store(store_dir);
      MatrixCache cache;
      auto report = detect_corpus_clones(*store->snapshot(), cache, *parse_granularity(granularity),
                                         thresholds.clone);
      print(out, to_json(report));
      err << report.pairs.size() << " clone pairs, clone ratio " << report.clone_ratio << '\n';
    } else if (bugs->parsed()) {
      auto store = open_store(store_dir);
      MatrixCache cache;
      auto scan = detect_corpus_bugs(*store->snapshot(), cache, thresholds.bug);
      print(out, to_json(scan));
      err << scan.hits.size() << " bug hits\n";
    } else if (validate->parsed()) {
      auto store = open_store(store_dir);
      const auto text = read_file(file);
      MatrixCache cache;
      auto report = validate_contract(text, *store->snapshot(), cache, thresholds, top_k);
      print(out, to_json(report));
      std::size_t clone_hits = 0;
      for (const auto& h : report.clone_hits) clone_hits += h.size();
      err << clone_hits << " clone hits, " << report.bug_hits.size() << " bug hits, "
          << report.diagnostics.size() << " diagnostics\n";
    } else if (serve->parsed()) {
      auto store = open_store(store_dir);
      MatrixCache cache;
      ServiceConfig config;
      config.thresholds = thresholds;
      config.store_dir = store_dir;
      if (!admin_token.empty()) {
        config.admin_token = admin_token;
      } else if (const char* env = std::getenv(kAdminTokenEnv); env && *env) {
        config.admin_token = env;
      }
      ApiService api(*store, cache, config);
      HttpServer server(api);
      if (server.bind(host, port) < 0) throw Failure("cannot bind " + host + ":" + std::to_string(port));
      err << "listening on " << host << ':' << port << '\n';
      server.listen_after_bind();
    } else if (bench->parsed()) {
      run_bench(out, rows, dim, repeats, bench_seed);
    } else if (stats->parsed()) {
      auto store = open_store(store_dir);
      print(out, stats_json(*store->snapshot(), Thresholds{}));
    } else if (dump->parsed()) {
      const auto text = read_file(file);
      auto unit = SourceUnit::from_text(file, text);
      auto parsed = parse(unit);
      for (const auto& d : parsed.diagnostics) {
        err << file << ':' << d.line << ':' << d.col << ": " << to_string(d.severity) << ": " << d.message << '\n';
      }
      if (emit_ast) {
        out << dump_ast(parsed.root);
      } else {
        const auto g = *parse_granularity(emit_stream);
        for (const auto& f : extract_fragments(parsed.root, unit.id)) {
          if (f.granularity == g) out << join(f.stream) << '\n';
        }
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace solembed
