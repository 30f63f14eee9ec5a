#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "solembed/corpus_store.hpp"
#include "solembed/similarity.hpp"

namespace solembed {

enum class MatrixKind { Contract, Function, Statement, Bug };

MatrixKind matrix_kind(Granularity g);
std::string_view to_string(MatrixKind kind);

/// A snapshot matrix loaded for querying. Row ids are fragment ids, or bug
/// ids for the bug matrix.
struct ResidentMatrix {
  MatrixKind kind = MatrixKind::Contract;
  std::uint64_t version = 0;
  SimilarityIndex<double> index;
  std::vector<std::string> row_ids;
  std::vector<bool> degenerate;
};

/// Resident matrices keyed by (kind, version). A newer version evicts the
/// older entries of the same kind.
class MatrixCache {
 public:
  std::shared_ptr<const ResidentMatrix> get(const Snapshot& snapshot, MatrixKind kind);
  std::shared_ptr<const ResidentMatrix> get(const Snapshot& snapshot, Granularity g) {
    return get(snapshot, matrix_kind(g));
  }

  /// Number of times a matrix was read out of a snapshot.
  std::size_t loads() const { return loads_.load(); }
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<MatrixKind, std::uint64_t>, std::shared_ptr<const ResidentMatrix>> entries_;
  std::atomic<std::size_t> loads_{0};
};

}  // namespace solembed
