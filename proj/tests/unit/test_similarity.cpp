#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "solembed/similarity.hpp"

namespace solembed {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

long double oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  long double d = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const long double x = a[i], y = b[i];
    d += (x - y) * (x - y);
    na += x * x;
    nb += y * y;
  }
  const long double denom = std::sqrt(na) + std::sqrt(nb);
  if (denom == 0) return 1;
  return std::clamp(1.0L - std::sqrt(d) / denom, 0.0L, 1.0L);
}

TEST(Similarity, Basics) {
  Eigen::VectorXd a(3), z = Eigen::VectorXd::Zero(3);
  a << 1, 2, 3;
  EXPECT_EQ(similarity(a, a), 1.0);
  EXPECT_EQ(similarity(a, (-a).eval()), 0.0);
  EXPECT_EQ(similarity(z, z), 1.0);
  EXPECT_EQ(similarity(a, z), 0.0);
  Eigen::VectorXd b(2);
  EXPECT_THROW(similarity(a, b), DimensionMismatch);
}

TEST(Similarity, CosineVariant) {
  Eigen::VectorXd a(2), b(2), z = Eigen::VectorXd::Zero(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.5);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_EQ(cosine_similarity(z, z), 1.0);
  EXPECT_EQ(cosine_similarity(a, z), 0.0);
}

TEST(SimilarityProperty, MetricAgainstExtendedPrecision) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    auto m = random_matrix(2, 100, rng);
    Eigen::VectorXd a = m.row(0).transpose(), b = m.row(1).transpose();
    const double s = similarity(a, b);
    EXPECT_EQ(s, similarity(b, a));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s, static_cast<double>(oracle(a, b)), 1e-9);
    EXPECT_EQ(similarity(a, a), 1.0);
    EXPECT_EQ(similarity(a, (-a).eval()), 0.0);
  }
}

TEST(RowNorms, MatchScalarLoop) {
  std::mt19937_64 rng(2);
  auto m = random_matrix(40, 17, rng);
  auto norms = row_norms(m);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    EXPECT_NEAR(norms[i], std::sqrt(s), 1e-9);
  }
}

void expect_same(const std::vector<std::vector<QueryHit>>& got,
                 const std::vector<std::vector<QueryHit>>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t q = 0; q < got.size(); ++q) {
    ASSERT_EQ(got[q].size(), want[q].size()) << "query " << q;
    for (std::size_t i = 0; i < got[q].size(); ++i) {
      EXPECT_EQ(got[q][i].row, want[q][i].row);
      EXPECT_NEAR(got[q][i].score, want[q][i].score, 1e-6);
    }
  }
}

struct Shape {
  Eigen::Index queries, rows, dim;
};

class BatchEquivalence : public ::testing::TestWithParam<Shape> {};

TEST_P(BatchEquivalence, MatchesNaive) {
  const auto shape = GetParam();
  std::mt19937_64 rng(static_cast<std::uint64_t>(shape.rows * 7 + shape.dim));
  auto q = random_matrix(shape.queries, shape.dim, rng);
  auto m = random_matrix(shape.rows, shape.dim, rng);
  // Plant near-duplicates so high thresholds have hits.
  for (Eigen::Index i = 0; i < std::min(shape.queries, shape.rows); i += 3) {
    m.row(i) = q.row(i) + 0.01 * random_matrix(1, shape.dim, rng);
  }
  const auto norms = row_norms(m);
  SimilarityIndex<double> index(m);
  for (double theta : {0.0, 0.3, 0.6, 0.95, 1.0}) {
    auto want = naive_query(q, m, theta);
    expect_same(batch_query(q, m, norms, theta), want);
    expect_same(index.query(q, theta), want);
    for (auto& hits : want) hits.resize(std::min<std::size_t>(hits.size(), 3));
    expect_same(batch_query(q, m, norms, theta, {.k = 3}), want);
  }
  auto cos_want = naive_query(q, m, 0.6, std::nullopt, Metric::Cosine);
  expect_same(batch_query(q, m, norms, 0.6, {.metric = Metric::Cosine}), cos_want);
  expect_same(index.query(q, 0.6, {.metric = Metric::Cosine}), cos_want);
}

INSTANTIATE_TEST_SUITE_P(Shapes, BatchEquivalence,
                         ::testing::Values(Shape{50, 200, 16}, Shape{100, 1000, 128},
                                           Shape{1, 30, 4}, Shape{300, 40, 8}));

TEST(BatchQuery, EmptyInputs) {
  Matrix q(0, 4), m(0, 4);
  EXPECT_TRUE(batch_query(q, m, row_norms(m), 0.5).empty());
  Matrix q1 = Matrix::Ones(2, 4);
  auto hits = batch_query(q1, m, row_norms(m), 0.5);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_TRUE(hits[0].empty());
}

TEST(BatchQuery, RejectsBadInput) {
  Matrix q = Matrix::Ones(2, 4), m = Matrix::Ones(3, 5);
  EXPECT_THROW(batch_query(q, m, row_norms(m), 0.5), DimensionMismatch);
  EXPECT_THROW(naive_query(q, m, 0.5), DimensionMismatch);
  Matrix m4 = Matrix::Ones(3, 4);
  EXPECT_THROW(batch_query(q, m4, row_norms(m4), 1.5), std::invalid_argument);
}

TEST(BatchQuery, ZeroRowsAndExactDuplicates) {
  Matrix m(3, 2);
  m << 0, 0, 1, 1, 1, 1;
  Matrix q(2, 2);
  q << 0, 0, 1, 1;
  auto hits = batch_query(q, m, row_norms(m), 1.0);
  ASSERT_EQ(hits[0].size(), 1u);
  EXPECT_EQ(hits[0][0].row, 0u);
  ASSERT_EQ(hits[1].size(), 2u);
  EXPECT_EQ(hits[1][0].score, 1.0);
  EXPECT_EQ(hits[1][1].row, 2u);
}

TEST(Thresholds, Validate) {
  Thresholds t;
  EXPECT_NO_THROW(t.validate());
  t.clone = 0.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.clone = 1.0;
  t.bug = 1.5;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace solembed
