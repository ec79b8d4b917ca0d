#pragma once

#include <cstdint>
#include <vector>

#include "spectral/partition.hpp"

namespace spectral {

// counts(a, b) = number of vertices in truth block a and found block b.
class ContingencyTable {
 public:
  ContingencyTable(Index k_true, Index k_found);

  Index k_true() const noexcept { return k_true_; }
  Index k_found() const noexcept { return k_found_; }
  std::uint64_t total() const noexcept { return total_; }

  std::uint64_t operator()(Index a, Index b) const { return counts_[a * k_found_ + b]; }
  void add(Index a, Index b, std::uint64_t c = 1);

  std::vector<std::uint64_t> row_sums() const;
  std::vector<std::uint64_t> col_sums() const;

 private:
  Index k_true_;
  Index k_found_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

ContingencyTable contingency(const Partition& truth, const Partition& found);

// Exact fraction `agree / total`, kept as integers for oracle comparisons.
struct PairRatio {
  std::uint64_t agree = 0;
  std::uint64_t total = 0;
  double value() const noexcept { return static_cast<double>(agree) / static_cast<double>(total); }
};

// Optimal one-to-one matching of blocks (Hungarian method on the zero-padded
// square table). Returns the matched vertex count.
std::uint64_t matched_vertices(const ContingencyTable& t);
double partition_match(const ContingencyTable& t);

// Same-truth-block pairs that share a found block. Throws
// UndefinedMetricError when every truth block is a singleton.
PairRatio pairwise_recall_ratio(const ContingencyTable& t);
double pairwise_recall(const ContingencyTable& t);

// Same-found-block pairs that share a truth block. Throws
// UndefinedMetricError when every found block is a singleton.
PairRatio pairwise_precision_ratio(const ContingencyTable& t);
double pairwise_precision(const ContingencyTable& t);

// Minimum-cost perfect assignment on a square cost matrix (row-major,
// size x size). Returns the column assigned to each row.
std::vector<Index> min_cost_assignment(const std::vector<std::int64_t>& cost, Index size);

}  // namespace spectral
