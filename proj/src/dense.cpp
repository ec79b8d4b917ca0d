#include "dense.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace spectral::detail {

namespace {
constexpr Index kGramChunk = 4096;
constexpr Index kUpdateChunk = 128;
}  // namespace

Eigen::MatrixXd gram(ConstBlockRef a, ConstBlockRef b, bool fixed_chunks) {
  const Index n = a.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.cols(), b.cols());
  if (n == 0 || a.cols() == 0 || b.cols() == 0) return out;
  const Index chunk =
      fixed_chunks ? kGramChunk
                   : std::max<Index>(kGramChunk, (n + thread_count() - 1) / thread_count());
  const Index chunks = (n + chunk - 1) / chunk;
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunks));
  parallel_for(0, chunks, 1, [&](Index c0, Index c1) {
    for (Index c = c0; c < c1; ++c) {
      const Index r0 = c * chunk;
      const Index h = std::min(chunk, n - r0);
      partial[c].noalias() = a.middleRows(r0, h).transpose() * b.middleRows(r0, h);
    }
  });
  for (const auto& p : partial) out += p;
  return out;
}

void right_multiply(BlockRef x, const Eigen::MatrixXd& c) {
  const Index n = x.rows();
  const Index m_in = c.rows();
  const Index m_out = c.cols();
  parallel_for(0, n, 1024, [&](Index r0, Index r1) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tmp;
    for (Index r = r0; r < r1; r += kUpdateChunk) {
      const Index h = std::min(kUpdateChunk, r1 - r);
      tmp.noalias() = x.block(r, 0, h, m_in) * c;
      x.block(r, 0, h, m_out) = tmp;
    }
  });
}

void select_columns(BlockRef x, const std::vector<Eigen::Index>& keep) {
  bool identity = true;
  for (std::size_t j = 0; j < keep.size(); ++j) identity &= keep[j] == static_cast<Index>(j);
  if (identity) return;
  for (Index i = 0; i < x.rows(); ++i) {
    double* row = &x(i, 0);
    for (std::size_t j = 0; j < keep.size(); ++j) row[j] = row[keep[j]];
  }
}

std::vector<double> column_norms(ConstBlockRef x) {
  std::vector<double> sq(static_cast<std::size_t>(x.cols()), 0.0);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index c = 0; c < x.cols(); ++c) sq[c] += x(i, c) * x(i, c);
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

}  // namespace spectral::detail
