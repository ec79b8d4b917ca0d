#include "spectral/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "parallel.hpp"
#include "spectral/errors.hpp"

namespace spectral {

namespace {

void check_weight(double w) {
  if (!std::isfinite(w)) throw DomainError("edge weight is not finite");
  if (w < 0.0) throw DomainError("negative edge weight " + std::to_string(w));
}

}  // namespace

SparseGraph SparseGraph::from_edges(Index n, const EdgeList& edges, bool symmetric) {
  if (n < 0) throw DomainError("negative vertex count");
  EdgeList sorted;
  sorted.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw DomainError("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                        ") outside vertex range [0, " + std::to_string(n) + ")");
    }
    check_weight(e.weight);
    if (e.src != e.dst) sorted.push_back(e);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });

  SparseGraph g;
  g.symmetric_ = symmetric;
  g.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  g.col_indices_.reserve(sorted.size());
  g.weights_.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    const Edge& head = sorted[i];
    double w = 0.0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].src == head.src && sorted[j].dst == head.dst; ++j) {
      w += sorted[j].weight;
    }
    g.col_indices_.push_back(head.dst);
    g.weights_.push_back(w);
    ++g.row_offsets_[static_cast<std::size_t>(head.src) + 1];
    i = j;
  }
  for (std::size_t r = 1; r < g.row_offsets_.size(); ++r) g.row_offsets_[r] += g.row_offsets_[r - 1];

  if (symmetric) {
    // Every stored (i, j, w) must have its mirror (j, i, w).
    for (Index row = 0; row < n; ++row) {
      const auto cols = g.row_columns(row);
      const auto ws = g.row_weights(row);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        const auto mirror_cols = g.row_columns(cols[p]);
        const auto it = std::lower_bound(mirror_cols.begin(), mirror_cols.end(), row);
        if (it == mirror_cols.end() || *it != row ||
            g.row_weights(cols[p])[static_cast<std::size_t>(it - mirror_cols.begin())] != ws[p]) {
          throw DomainError("graph flagged symmetric has an unmatched entry (" +
                            std::to_string(row) + ", " + std::to_string(cols[p]) + ")");
        }
      }
    }
  }
  return g;
}

EdgeList SparseGraph::edges() const {
  EdgeList out;
  out.reserve(col_indices_.size());
  for (Index row = 0; row < num_vertices(); ++row) {
    for (Index p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      out.push_back({row, col_indices_[p], weights_[p]});
    }
  }
  return out;
}

SparseGraph symmetrize(const SparseGraph& g, SymmetrizeMode mode) {
  EdgeList both = g.edges();
  const std::size_t m = both.size();
  both.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) both.push_back({both[i].dst, both[i].src, both[i].weight});
  if (mode == SymmetrizeMode::logical) {
    for (Edge& e : both) e.weight = e.weight > 0.0 ? 1.0 : 0.0;
    SparseGraph summed = SparseGraph::from_edges(g.num_vertices(), both, true);
    EdgeList pattern = summed.edges();
    for (Edge& e : pattern) e.weight = e.weight > 0.0 ? 1.0 : 0.0;
    return SparseGraph::from_edges(g.num_vertices(), pattern, true);
  }
  return SparseGraph::from_edges(g.num_vertices(), both, true);
}

double DegreeVector::max() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

DegreeVector degrees(const SparseGraph& g) {
  const Index n = g.num_vertices();
  DegreeVector d;
  d.values.assign(static_cast<std::size_t>(n), 0.0);
  for (Index row = 0; row < n; ++row) {
    const auto cols = g.row_columns(row);
    const auto ws = g.row_weights(row);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      d.values[row] += ws[p];
      if (!g.is_symmetric()) d.values[cols[p]] += ws[p];
    }
  }
  return d;
}

SparseGraph apply_delta(const SparseGraph& g, const EdgeList& delta, Index new_n) {
  if (new_n < g.num_vertices()) {
    throw DomainError("vertex count cannot shrink (" + std::to_string(g.num_vertices()) + " -> " +
                      std::to_string(new_n) + ")");
  }
  for (const Edge& e : delta) {
    if (e.src < 0 || e.dst < 0 || e.src >= new_n || e.dst >= new_n) {
      throw DomainError("delta edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                        ") outside vertex range [0, " + std::to_string(new_n) + ")");
    }
  }
  EdgeList all = g.edges();
  all.reserve(all.size() + (g.is_symmetric() ? 2 : 1) * delta.size());
  for (const Edge& e : delta) {
    all.push_back(e);
    // Symmetric storage receives the delta as undirected edges.
    if (g.is_symmetric() && e.src != e.dst) all.push_back({e.dst, e.src, e.weight});
  }
  return SparseGraph::from_edges(new_n, all, g.is_symmetric());
}

// ---------------------------------------------------------------------------
// Edge list text

namespace {

struct ParsedLine {
  bool empty = true;
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

ParsedLine parse_line(std::string_view line, int base, Index line_no) {
  ParsedLine out;
  line = trim(line);
  if (line.empty() || line.front() == '#') return out;
  out.empty = false;

  std::string_view fields[4];
  int count = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = line.size();
    if (count == 4) throw ParseError("too many fields", line_no);
    fields[count++] = line.substr(start, end - start);
    pos = end;
  }
  if (count < 2) throw ParseError("expected `src<TAB>dst[<TAB>weight]`", line_no);

  auto parse_index = [&](std::string_view f) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw ParseError("invalid vertex index '" + std::string(f) + "'", line_no);
    }
    if (v < base) {
      throw ParseError("vertex index " + std::to_string(v) + " below base " + std::to_string(base),
                       line_no);
    }
    return v - base;
  };
  out.src = parse_index(fields[0]);
  out.dst = parse_index(fields[1]);
  if (count >= 3) {
    double w = 0.0;
    const auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), w);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
      throw ParseError("invalid weight '" + std::string(fields[2]) + "'", line_no);
    }
    if (!std::isfinite(w) || w < 0.0) {
      throw DomainError("line " + std::to_string(line_no) + ": negative or non-finite weight '" +
                        std::string(fields[2]) + "'");
    }
    out.weight = w;
  }
  if (count == 4) throw ParseError("too many fields", line_no);
  return out;
}

void check_base(int base) {
  if (base != 0 && base != 1) throw DomainError("index base must be 0 or 1");
}

}  // namespace

EdgeList read_edges(std::istream& in, int base) {
  check_base(base);
  EdgeList edges;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const ParsedLine p = parse_line(line, base, line_no);
    if (!p.empty) edges.push_back({p.src, p.dst, p.weight});
  }
  if (in.bad()) throw IoError("read failure");
  return edges;
}

SparseGraph load_edge_list(std::istream& in, int base, std::optional<Index> num_vertices) {
  const EdgeList edges = read_edges(in, base);
  Index n = 0;
  for (const Edge& e : edges) n = std::max({n, e.src + 1, e.dst + 1});
  if (num_vertices) {
    if (*num_vertices < n) {
      throw DomainError("--num-vertices " + std::to_string(*num_vertices) +
                        " is smaller than the largest vertex index " + std::to_string(n));
    }
    n = *num_vertices;
  }
  return SparseGraph::from_edges(n, edges, false);
}

SparseGraph load_edge_list_file(const std::string& path, int base,
                                std::optional<Index> num_vertices) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_edge_list(in, base, num_vertices);
}

void write_edge_list(std::ostream& out, const EdgeList& edges, int base) {
  check_base(base);
  char buf[64];
  for (const Edge& e : edges) {
    out << (e.src + base) << '\t' << (e.dst + base) << '\t';
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.weight);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Laplacian

LaplacianOperator::LaplacianOperator(const SparseGraph& g) : LaplacianOperator(g, degrees(g)) {}

LaplacianOperator::LaplacianOperator(const SparseGraph& g, DegreeVector d)
    : graph_(&g), degrees_(std::move(d)) {
  if (static_cast<Index>(degrees_.values.size()) != g.num_vertices()) {
    throw ContractError("degree vector length does not match the graph");
  }
  max_degree_ = degrees_.max();
}

void LaplacianOperator::apply(ConstBlockRef x, BlockRef y) const {
  const Index n = size();
  if (x.rows() != n || y.rows() != n || x.cols() != y.cols()) {
    throw ContractError("laplacian_apply: expected " + std::to_string(n) + " rows and matching " +
                        "column counts, got x " + std::to_string(x.rows()) + "x" +
                        std::to_string(x.cols()) + ", y " + std::to_string(y.rows()) + "x" +
                        std::to_string(y.cols()));
  }
  const Index l = x.cols();
  if (l == 0 || n == 0) return;
  const SparseGraph& g = *graph_;
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  const auto ws = g.weights();
  const double* d = degrees_.values.data();
  const Index xs = x.outerStride();

  // y_i = d_i x_i - sum_j a_ij x_j
  detail::parallel_for(0, n, 256, [&](Index r0, Index r1) {
    for (Index i = r0; i < r1; ++i) {
      double* yi = &y(i, 0);
      const double* xi = x.data() + i * xs;
      for (Index c = 0; c < l; ++c) yi[c] = d[i] * xi[c];
      for (Index p = offsets[i]; p < offsets[i + 1]; ++p) {
        const double w = ws[p];
        const double* xj = x.data() + cols[p] * xs;
        for (Index c = 0; c < l; ++c) yi[c] -= w * xj[c];
      }
    }
  });
  if (g.is_symmetric()) return;

  // y_j -= a_ij x_i, split by column so each worker owns its output entries.
  detail::parallel_for(0, l, 1, [&](Index c0, Index c1) {
    for (Index i = 0; i < n; ++i) {
      const double* xi = x.data() + i * xs;
      for (Index p = offsets[i]; p < offsets[i + 1]; ++p) {
        const double w = ws[p];
        double* yj = &y(cols[p], 0);
        for (Index c = c0; c < c1; ++c) yj[c] -= w * xi[c];
      }
    }
  });
}

MultiVector laplacian_apply(const SparseGraph& g, const DegreeVector& d, ConstBlockRef x) {
  LaplacianOperator op(g, d);
  MultiVector y(x.rows(), x.cols());
  op.apply(x, y);
  return y;
}

}  // namespace spectral
