#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "solembed/normalizer.hpp"

namespace solembed {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Vocabulary {
 public:
  struct Entry {
    std::string token;
    std::uint64_t frequency = 0;

    bool operator==(const Entry&) const = default;
  };

  Vocabulary() = default;
  /// Entries must already be in id order.
  Vocabulary(std::vector<Entry> entries, std::uint64_t min_count);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t min_count() const { return min_count_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(std::size_t id) const { return entries_.at(id); }
  std::optional<std::size_t> id(std::string_view token) const;

  bool operator==(const Vocabulary& other) const {
    return entries_ == other.entries_ && min_count_ == other.min_count_;
  }

 private:
  std::vector<Entry> entries_;
  std::uint64_t min_count_ = 1;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Counts token occurrences and keeps those seen at least `min_count` times.
/// Ids are assigned by descending frequency, ties broken lexicographically.
Vocabulary build_vocabulary(const std::vector<TokenStream>& streams, std::uint64_t min_count);

struct Hyperparams {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 10;
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  std::uint64_t min_count = 2;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Trained token vectors. Immutable once constructed.
class EmbeddingTable {
 public:
  EmbeddingTable(Vocabulary vocab, RowMatrix vectors);

  const Vocabulary& vocab() const { return vocab_; }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return vocab_.size(); }
  const RowMatrix& vectors() const { return vectors_; }
  auto vector(std::size_t id) const { return vectors_.row(static_cast<Eigen::Index>(id)); }

  bool operator==(const EmbeddingTable& other) const {
    return vocab_ == other.vocab_ && vectors_.rows() == other.vectors_.rows() &&
           vectors_.cols() == other.vectors_.cols() && vectors_ == other.vectors_;
  }

 private:
  Vocabulary vocab_;
  RowMatrix vectors_;
};

/// Skip-gram with negative sampling, single-threaded. For a fixed seed the
/// resulting table is bit-identical across runs.
///
/// Every position samples a window radius uniformly from 1..window and, for
/// each context position inside it, performs one positive update and
/// `negatives` updates against the unigram^0.75 noise distribution. The
/// learning rate decays linearly from initial_lr to final_lr. Returns the
/// input-side vectors.
EmbeddingTable train_embeddings(const std::vector<TokenStream>& streams, const Hyperparams& hp);

struct FragmentEmbedding {
  Vector vector;
  bool is_degenerate = true;
  std::size_t token_count = 0;
  std::size_t oov_count = 0;
};

/// Sum of the vectors of in-vocabulary tokens; unknown tokens are skipped and
/// counted. An empty or all-unknown stream yields the zero vector and is
/// flagged degenerate.
FragmentEmbedding embed_stream(const TokenStream& stream, const EmbeddingTable& table);
FragmentEmbedding embed_fragment(const Fragment& fragment, const EmbeddingTable& table);

/// word2vec text format: `V d` header, then one `token v1 ... vd` line per id.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

struct EmbeddingsFile {
  std::vector<std::string> tokens;
  RowMatrix vectors;
};

/// Throws std::runtime_error with a line number on malformed or truncated input.
EmbeddingsFile read_embeddings(std::istream& in);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

}  // namespace solembed
