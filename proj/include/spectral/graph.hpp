#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectral/types.hpp"

namespace spectral {

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

// Weighted adjacency in compressed-sparse-row form.
//
// A directed graph stores A; the similarity matrix used for clustering is
// W = A + A^T. A graph flagged symmetric already stores W, so W = A.
// Rows are sorted, duplicate entries are summed and self-loops are dropped
// at construction, so every instance satisfies those invariants.
class SparseGraph {
 public:
  SparseGraph() : row_offsets_(1, 0) {}

  // Builds from an arbitrary edge list. Throws DomainError on negative or
  // non-finite weights and on endpoints outside [0, n).
  static SparseGraph from_edges(Index n, const EdgeList& edges, bool symmetric = false);

  Index num_vertices() const noexcept { return static_cast<Index>(row_offsets_.size()) - 1; }
  Index num_entries() const noexcept { return static_cast<Index>(col_indices_.size()); }
  bool is_symmetric() const noexcept { return symmetric_; }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> weights() const noexcept { return weights_; }

  std::span<const Index> row_columns(Index row) const noexcept {
    return {col_indices_.data() + row_offsets_[row],
            static_cast<std::size_t>(row_offsets_[row + 1] - row_offsets_[row])};
  }
  std::span<const double> row_weights(Index row) const noexcept {
    return {weights_.data() + row_offsets_[row],
            static_cast<std::size_t>(row_offsets_[row + 1] - row_offsets_[row])};
  }

  // Stored entries in row-major order.
  EdgeList edges() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> weights_;
  bool symmetric_ = false;
};

enum class SymmetrizeMode {
  algebraic,  // W + W^T
  logical,    // pattern of W + W^T with unit weights
};

// Returns W + W^T of the stored matrix, flagged symmetric. Applied to an
// already symmetric graph this doubles every weight.
SparseGraph symmetrize(const SparseGraph& g, SymmetrizeMode mode = SymmetrizeMode::algebraic);

// Row sums of W (A + A^T for directed storage).
struct DegreeVector {
  std::vector<double> values;

  double max() const noexcept;
};

DegreeVector degrees(const SparseGraph& g);

// Graph over new_n vertices holding g plus `delta`; weights of repeated
// edges add up. Existing vertex indices are kept.
SparseGraph apply_delta(const SparseGraph& g, const EdgeList& delta, Index new_n);

// Edge list text: `src<TAB>dst[<TAB>weight]` per line, `#` comments and blank
// lines ignored, indices in `base` (0 or 1). Vertex count is the largest index
// seen unless `num_vertices` is given.
SparseGraph load_edge_list(std::istream& in, int base = 1,
                           std::optional<Index> num_vertices = std::nullopt);
SparseGraph load_edge_list_file(const std::string& path, int base = 1,
                                std::optional<Index> num_vertices = std::nullopt);

// Parses only the edges; used for stream stage files.
EdgeList read_edges(std::istream& in, int base = 1);

void write_edge_list(std::ostream& out, const EdgeList& edges, int base = 1);

// Linear operator acting on multi-vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Index size() const = 0;
  // y = Op * x. x and y have size() rows and equal column counts.
  virtual void apply(ConstBlockRef x, BlockRef y) const = 0;
  // Magnitude of the operator used to make tolerances relative. 0 if unknown.
  virtual double scale_hint() const { return 0.0; }
};

// Matrix-free graph Laplacian L = D - W over a stored graph.
//
// For directed storage the product is diag(d) X - A X - A^T X, so W is never
// formed. The graph must outlive the operator.
class LaplacianOperator final : public LinearOperator {
 public:
  explicit LaplacianOperator(const SparseGraph& g);
  LaplacianOperator(const SparseGraph& g, DegreeVector d);

  Index size() const override { return graph_->num_vertices(); }
  void apply(ConstBlockRef x, BlockRef y) const override;
  double scale_hint() const override { return max_degree_; }

  const DegreeVector& degree_vector() const noexcept { return degrees_; }
  const SparseGraph& graph() const noexcept { return *graph_; }

 private:
  const SparseGraph* graph_;
  DegreeVector degrees_;
  double max_degree_ = 0.0;
};

// Convenience wrapper around LaplacianOperator::apply.
MultiVector laplacian_apply(const SparseGraph& g, const DegreeVector& d, ConstBlockRef x);

}  // namespace spectral
