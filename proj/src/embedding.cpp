#include "solembed/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace solembed {
namespace {

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sigmoid(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-x));
}

class NoiseDistribution {
 public:
  explicit NoiseDistribution(const Vocabulary& vocab) {
    cumulative_.reserve(vocab.size());
    double total = 0.0;
    for (const auto& e : vocab.entries()) {
      total += std::pow(static_cast<double>(e.frequency), 0.75);
      cumulative_.push_back(total);
    }
    for (auto& c : cumulative_) c /= total;
    cumulative_.back() = 1.0;
  }

  std::size_t sample(std::mt19937_64& rng) const {
    double u = unit_uniform(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace

Vocabulary::Vocabulary(std::vector<Entry> entries, std::uint64_t min_count)
    : entries_(std::move(entries)), min_count_(min_count) {
  ids_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!ids_.emplace(entries_[i].token, i).second) {
      throw std::invalid_argument("duplicate vocabulary token: " + entries_[i].token);
    }
  }
}

std::optional<std::size_t> Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(const std::vector<TokenStream>& streams, std::uint64_t min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : streams) {
    for (const auto& tok : s) ++counts[tok];
  }
  std::vector<Vocabulary::Entry> entries;
  for (auto& [token, freq] : counts) {
    if (freq >= min_count) entries.push_back({token, freq});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.token < b.token;
  });
  return Vocabulary(std::move(entries), min_count);
}

void Hyperparams::validate() const {
  if (dim <= 0) throw std::invalid_argument("dim must be positive");
  if (window <= 0) throw std::invalid_argument("window must be positive");
  if (negatives <= 0) throw std::invalid_argument("negatives must be positive");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (!(initial_lr > 0.0)) throw std::invalid_argument("initial_lr must be positive");
  if (!(final_lr > 0.0) || final_lr > initial_lr) {
    throw std::invalid_argument("final_lr must be positive and <= initial_lr");
  }
  if (min_count < 1) throw std::invalid_argument("min_count must be positive");
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, RowMatrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != vocab_.size()) {
    throw std::invalid_argument("embedding rows do not match vocabulary size");
  }
}

EmbeddingTable train_embeddings(const std::vector<TokenStream>& streams, const Hyperparams& hp) {
  hp.validate();
  auto vocab = build_vocabulary(streams, hp.min_count);
  if (vocab.empty()) throw TrainingError("vocabulary is empty after min_count filtering");

  std::vector<std::vector<std::size_t>> corpus;
  corpus.reserve(streams.size());
  std::uint64_t total_tokens = 0;
  for (const auto& s : streams) {
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    for (const auto& tok : s) {
      if (auto id = vocab.id(tok)) ids.push_back(*id);
    }
    total_tokens += ids.size();
    if (!ids.empty()) corpus.push_back(std::move(ids));
  }

  const auto V = static_cast<Eigen::Index>(vocab.size());
  const int d = hp.dim;
  std::mt19937_64 rng(hp.seed);
  RowMatrix input(V, d);
  for (Eigen::Index i = 0; i < V; ++i) {
    for (int j = 0; j < d; ++j) input(i, j) = (unit_uniform(rng) - 0.5) / d;
  }
  RowMatrix output = RowMatrix::Zero(V, d);
  NoiseDistribution noise(vocab);
  Vector grad(d);

  const double total_steps = static_cast<double>(total_tokens) * hp.epochs;
  double processed = 0.0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    for (const auto& ids : corpus) {
      const auto n = static_cast<std::ptrdiff_t>(ids.size());
      for (std::ptrdiff_t t = 0; t < n; ++t) {
        const double lr =
            hp.initial_lr - (hp.initial_lr - hp.final_lr) * (processed / total_steps);
        processed += 1.0;
        const auto radius = static_cast<std::ptrdiff_t>(1 + rng() % static_cast<std::uint64_t>(hp.window));
        const auto center = static_cast<Eigen::Index>(ids[t]);
        for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, t - radius);
             c <= std::min(n - 1, t + radius); ++c) {
          if (c == t) continue;
          grad.setZero();
          auto in_row = input.row(center);
          for (int k = 0; k <= hp.negatives; ++k) {
            Eigen::Index target;
            double label;
            if (k == 0) {
              target = static_cast<Eigen::Index>(ids[c]);
              label = 1.0;
            } else {
              target = static_cast<Eigen::Index>(noise.sample(rng));
              label = 0.0;
            }
            auto out_row = output.row(target);
            const double g = (label - sigmoid(in_row.dot(out_row))) * lr;
            grad.noalias() += g * out_row.transpose();
            out_row.noalias() += g * in_row;
          }
          in_row.noalias() += grad.transpose();
        }
      }
    }
  }
  if (!input.allFinite()) throw TrainingError("training diverged to non-finite values");
  return EmbeddingTable(std::move(vocab), std::move(input));
}

FragmentEmbedding embed_stream(const TokenStream& stream, const EmbeddingTable& table) {
  FragmentEmbedding out;
  out.vector = Vector::Zero(table.dim());
  out.token_count = stream.size();
  for (const auto& tok : stream) {
    if (auto id = table.vocab().id(tok)) {
      out.vector.noalias() += table.vector(*id).transpose();
      out.is_degenerate = false;
    } else {
      ++out.oov_count;
    }
  }
  return out;
}

FragmentEmbedding embed_fragment(const Fragment& fragment, const EmbeddingTable& table) {
  return embed_stream(fragment.stream, table);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  const auto& vecs = table.vectors();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& tok = table.vocab().entry(i).token;
    if (tok.empty() || tok.find_first_of(" \t\r\n") != std::string::npos) {
      throw std::invalid_argument("token is not writable in the embeddings format: '" + tok + "'");
    }
    out << tok;
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
      out << ' ' << format_double(vecs(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

EmbeddingsFile read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: missing header");
  std::istringstream header(line);
  long long rows = -1, dim = -1;
  if (!(header >> rows >> dim) || rows < 0 || dim <= 0) {
    throw std::runtime_error("line 1: malformed header '" + line + "'");
  }
  EmbeddingsFile file;
  file.tokens.reserve(static_cast<std::size_t>(rows));
  file.vectors.resize(rows, dim);
  for (long long i = 0; i < rows; ++i) {
    const auto lineno = std::to_string(i + 2);
    if (!std::getline(in, line)) {
      throw std::runtime_error("line " + lineno + ": truncated, expected " + std::to_string(rows) +
                               " vectors but found " + std::to_string(i));
    }
    std::string_view rest(line);
    auto next = [&]() -> std::string_view {
      auto sp = rest.find(' ');
      auto field = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
      return field;
    };
    file.tokens.emplace_back(next());
    if (file.tokens.back().empty()) throw std::runtime_error("line " + lineno + ": empty token");
    for (long long j = 0; j < dim; ++j) {
      if (rest.empty()) {
        throw std::runtime_error("line " + lineno + ": expected " + std::to_string(dim) +
                                 " components, found " + std::to_string(j));
      }
      auto value = parse_double(next());
      if (!value || !std::isfinite(*value)) {
        throw std::runtime_error("line " + lineno + ": component " + std::to_string(j + 1) +
                                 " is not a finite number");
      }
      file.vectors(i, j) = *value;
    }
    if (!rest.empty()) throw std::runtime_error("line " + lineno + ": trailing data");
  }
  return file;
}

}  // namespace solembed
