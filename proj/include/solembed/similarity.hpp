#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace solembed {

enum class Metric { NormalizedEuclidean, Cosine };

struct Thresholds {
  double clone = 0.95;
  double bug = 0.90;

  /// Both thresholds must lie in (0, 1].
  void validate() const {
    if (!(clone > 0.0 && clone <= 1.0)) throw std::invalid_argument("clone threshold must be in (0, 1]");
    if (!(bug > 0.0 && bug <= 1.0)) throw std::invalid_argument("bug threshold must be in (0, 1]");
  }
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// One corpus row matched by a query.
struct QueryHit {
  std::size_t row = 0;
  double score = 0.0;

  bool operator==(const QueryHit&) const = default;
};

namespace detail {

template <typename Scalar>
Scalar clamp_unit(Scalar s) {
  return std::clamp(s, Scalar(0), Scalar(1));
}

inline void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("similarity threshold must be in [0, 1]");
  }
}

inline void sort_and_truncate(std::vector<QueryHit>& hits, std::optional<std::size_t> k) {
  std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.row < b.row;
  });
  if (k && hits.size() > *k) hits.resize(*k);
}

}  // namespace detail

/// 1 - |a - b| / (|a| + |b|), in [0, 1]. Two zero vectors score 1.
///
/// A single scalar pass; this is also the per-pair reference used by the
/// naive query and by candidate rescoring in batch_query.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar similarity(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw DimensionMismatch("similarity: vector dimensions differ");
  Scalar diff2 = 0, a2 = 0, b2 = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Scalar x = a.coeff(i);
    const Scalar y = b.coeff(i);
    diff2 += (x - y) * (x - y);
    a2 += x * x;
    b2 += y * y;
  }
  const Scalar denom = std::sqrt(a2) + std::sqrt(b2);
  if (denom == Scalar(0)) return Scalar(1);
  return detail::clamp_unit(Scalar(1) - std::sqrt(diff2) / denom);
}

/// Cosine similarity mapped onto [0, 1] as (1 + cos) / 2. Two zero vectors
/// score 1, a zero against a non-zero vector scores 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw DimensionMismatch("cosine_similarity: vector dimensions differ");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) && nb == Scalar(0)) return Scalar(1);
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return detail::clamp_unit((Scalar(1) + a.dot(b) / (na * nb)) / Scalar(2));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar score(Metric metric, const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
  return metric == Metric::Cosine ? cosine_similarity(a, b) : similarity(a, b);
}

/// Row-wise Euclidean norms, summed left to right so the result depends only
/// on the row values.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> row_norms(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) sum += m.coeff(i, j) * m.coeff(i, j);
    out(i) = std::sqrt(sum);
  }
  return out;
}

/// Per-pair scalar loop over every (query, corpus row) combination. The
/// baseline batch_query is measured and checked against.
template <typename DerivedQ, typename DerivedM>
std::vector<std::vector<QueryHit>> naive_query(const Eigen::MatrixBase<DerivedQ>& queries,
                                               const Eigen::MatrixBase<DerivedM>& corpus,
                                               double threshold,
                                               std::optional<std::size_t> k = std::nullopt,
                                               Metric metric = Metric::NormalizedEuclidean) {
  detail::check_threshold(threshold);
  if (corpus.rows() > 0 && queries.rows() > 0 && queries.cols() != corpus.cols()) {
    throw DimensionMismatch("naive_query: query and corpus dimensions differ");
  }
  std::vector<std::vector<QueryHit>> out(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    auto& hits = out[static_cast<std::size_t>(q)];
    for (Eigen::Index r = 0; r < corpus.rows(); ++r) {
      const double s = static_cast<double>(score(metric, queries.row(q), corpus.row(r)));
      if (s >= threshold) hits.push_back({static_cast<std::size_t>(r), s});
    }
    detail::sort_and_truncate(hits, k);
  }
  return out;
}

struct BatchOptions {
  std::optional<std::size_t> k;
  Metric metric = Metric::NormalizedEuclidean;
  /// Queries are processed this many rows at a time to bound the Gram block.
  Eigen::Index block_rows = 256;
};

namespace detail {

/// Screening slack on the distance ratio that bounds the round-off of the
/// expanded distance in `Screen` precision for dimension `dim`.
template <typename Screen>
double screening_slack(Eigen::Index dim) {
  const double eps = static_cast<double>(std::numeric_limits<Screen>::epsilon());
  return std::max(1e-6, std::sqrt(4.0 * static_cast<double>(std::max<Eigen::Index>(dim, 1)) * eps));
}

/// Computes all pairwise expanded distances between `q_screen` and
/// `m_screen` block by block (one GEMM per block, negative squared distances
/// clamped to 0), keeps rows whose screened score is within `slack` of the
/// threshold, and rescores those with the exact per-pair formula on
/// `q_exact` / `m_exact`.
template <typename DQs, typename DMs, typename DNs, typename DQ, typename DM>
std::vector<std::vector<QueryHit>> screen_and_rescore(
    const Eigen::MatrixBase<DQs>& q_screen, const Eigen::MatrixBase<DMs>& m_screen,
    const Eigen::MatrixBase<DNs>& m_screen_norms, const Eigen::MatrixBase<DQ>& q_exact,
    const Eigen::MatrixBase<DM>& m_exact, double threshold, double slack,
    const BatchOptions& opts) {
  using Scalar = typename DMs::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  check_threshold(threshold);
  if (m_screen_norms.size() != m_screen.rows() || m_screen.rows() != m_exact.rows()) {
    throw DimensionMismatch("batch_query: norms do not match corpus rows");
  }
  std::vector<std::vector<QueryHit>> out(static_cast<std::size_t>(q_exact.rows()));
  if (q_exact.rows() == 0 || m_exact.rows() == 0) return out;
  if (q_exact.cols() != m_exact.cols()) {
    throw DimensionMismatch("batch_query: query and corpus dimensions differ");
  }

  const auto norms = m_screen_norms.derived().array();
  const ColVector norms_sq = norms.square().matrix();
  const Eigen::Index block = std::max<Eigen::Index>(1, opts.block_rows);
  Matrix gram;
  ColVector candidate;
  for (Eigen::Index q0 = 0; q0 < q_screen.rows(); q0 += block) {
    const Eigen::Index nq = std::min(block, q_screen.rows() - q0);
    const auto qblock = q_screen.middleRows(q0, nq);
    if (nq == 1) {
      gram.resize(m_screen.rows(), 1);
      gram.col(0).noalias() = m_screen * qblock.row(0).transpose();
    } else {
      gram.noalias() = m_screen * qblock.transpose();  // N x nq, one column per query
    }
    const ColVector query_norms = qblock.rowwise().norm();
    for (Eigen::Index j = 0; j < nq; ++j) {
      const Scalar qn = query_norms(j);
      if (opts.metric == Metric::Cosine) {
        // (1 + cos) / 2 >= t  <=>  q.m >= (2t - 1) |q| |m|; zero norms always pass.
        const Scalar floor = Scalar(2 * (threshold - slack) - 1);
        candidate = (gram.col(j).array() - floor * qn * norms).matrix();
        if (qn == Scalar(0)) candidate.setZero();
        candidate = (norms == Scalar(0)).select(Scalar(0), candidate.array()).matrix();
      } else {
        // 1 - d / (|q| + |m|) >= t  <=>  d^2 <= ((1 - t) (|q| + |m|))^2, with
        // d^2 = |q|^2 + |m|^2 - 2 q.m clamped at 0.
        const Scalar reach = Scalar(1 - threshold + slack);
        const auto d2 =
            (qn * qn + norms_sq.array() - Scalar(2) * gram.col(j).array()).max(Scalar(0));
        candidate = (((norms + qn) * reach).square() - d2).matrix();
      }
      auto& hits = out[static_cast<std::size_t>(q0 + j)];
      for (Eigen::Index r = 0; r < m_exact.rows(); ++r) {
        if (candidate(r) < Scalar(0)) continue;
        const double exact =
            static_cast<double>(score(opts.metric, q_exact.row(q0 + j), m_exact.row(r)));
        if (exact >= threshold) hits.push_back({static_cast<std::size_t>(r), exact});
      }
      sort_and_truncate(hits, opts.k);
    }
  }
  return out;
}

}  // namespace detail

/// Threshold query of every row of `queries` against `corpus` as matrix
/// computation, using the precomputed corpus norms.
///
/// Hits are sorted by (score desc, row asc) and truncated to `opts.k`. Scores
/// are those of the per-pair formula, so the result equals naive_query.
template <typename DerivedQ, typename DerivedM, typename DerivedN>
std::vector<std::vector<QueryHit>> batch_query(const Eigen::MatrixBase<DerivedQ>& queries,
                                               const Eigen::MatrixBase<DerivedM>& corpus,
                                               const Eigen::MatrixBase<DerivedN>& corpus_norms,
                                               double threshold, const BatchOptions& opts = {}) {
  using Scalar = typename DerivedM::Scalar;
  return detail::screen_and_rescore(queries, corpus, corpus_norms, queries, corpus, threshold,
                                    detail::screening_slack<Scalar>(corpus.cols()), opts);
}

/// A corpus matrix kept resident for repeated queries: exact rows and norms
/// plus a `Screen`-precision copy that halves the bytes the GEMM has to read.
template <typename Scalar, typename Screen = float>
class SimilarityIndex {
 public:
  using Rows = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Norms = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SimilarityIndex() = default;
  explicit SimilarityIndex(Rows rows) : SimilarityIndex(rows, row_norms(rows)) {}
  SimilarityIndex(Rows rows, Norms norms) : rows_(std::move(rows)), norms_(std::move(norms)) {
    if (norms_.size() != rows_.rows()) throw DimensionMismatch("SimilarityIndex: norms size");
    screen_ = rows_.template cast<Screen>();
    screen_norms_ = norms_.template cast<Screen>();
  }

  const Rows& rows() const { return rows_; }
  const Norms& norms() const { return norms_; }
  Eigen::Index size() const { return rows_.rows(); }
  Eigen::Index dim() const { return rows_.cols(); }

  template <typename DerivedQ>
  std::vector<std::vector<QueryHit>> query(const Eigen::MatrixBase<DerivedQ>& queries,
                                           double threshold, const BatchOptions& opts = {}) const {
    const auto q_screen = queries.template cast<Screen>().eval();
    return detail::screen_and_rescore(q_screen, screen_, screen_norms_, queries, rows_, threshold,
                                      detail::screening_slack<Screen>(rows_.cols()), opts);
  }

 private:
  Rows rows_;
  Norms norms_;
  Eigen::Matrix<Screen, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> screen_;
  Eigen::Matrix<Screen, Eigen::Dynamic, 1> screen_norms_;
};

}  // namespace solembed
