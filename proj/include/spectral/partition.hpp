#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spectral/graph.hpp"
#include "spectral/lobpcg.hpp"
#include "spectral/types.hpp"

namespace spectral {

// Per-vertex block labels in [0, k). Every block id occurs at least once.
struct Partition {
  std::vector<Index> labels;
  Index k = 0;

  Index size() const noexcept { return static_cast<Index>(labels.size()); }

  // Relabels arbitrary non-negative ids to 0..k'-1, keeping their order.
  static Partition compact(std::span<const Index> raw_labels);
};

struct GapOptions {
  Index k_min = 2;
  double alpha = 3.0;
  // A qualifying increment must also be at least this fraction of the
  // eigenvalue it leads to.
  double min_relative_gap = 0.1;
};

struct GapResult {
  Index k = 0;
  std::vector<double> increments;  // lambda_{i+1} - lambda_i, ascending index
  // Chosen increment over its comparison threshold; above alpha iff reliable.
  double confidence = 0.0;
  bool reliable = false;
};

// Cluster count from the first significantly large increment of the
// ascending eigenvalues. Throws DomainError when fewer than k_min + 1 values
// are given or alpha <= 1.
GapResult detect_gap(std::span<const double> eigenvalues, const GapOptions& opts = {});

struct Assignment {
  Partition partition;
  std::vector<Index> pivots;       // vertices selected by the pivoted QR
  std::vector<Index> zero_rows;    // vertices with an all-zero embedding row
};

// Labels vertices from an n x k embedding with orthonormal columns: pivoted
// QR of x^T selects k representative vertices J, and vertex i joins the
// block j maximizing |(x x[J,:]^{-1})_{ij}|. Throws AssignmentError when
// x[J,:] is numerically singular.
Assignment assign_clusters_qrcp(ConstBlockRef x);

struct StaticTimings {
  double solve_seconds = 0.0;
  double assign_seconds = 0.0;
};

struct StaticResult {
  Partition partition;
  EigenState eigenstate;
  GapResult gap;
  std::vector<Index> zero_rows;
  StaticTimings timings;
};

// "Slightly larger" block size: k + max(2, ceil(k / 10)).
Index block_size_for(Index k_expected);

// Eigensolve, gap detection and assignment for one graph. The initial block
// is random from cfg.seed unless `initial` is given.
StaticResult partition_static(const SparseGraph& g, const SolverConfig& cfg,
                              std::optional<Index> k_expected = std::nullopt,
                              const GapOptions& gap = {},
                              const MultiVector* initial = nullptr);

}  // namespace spectral
