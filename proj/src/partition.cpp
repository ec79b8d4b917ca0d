#include "spectral/partition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "spectral/errors.hpp"

namespace spectral {

Partition Partition::compact(std::span<const Index> raw_labels) {
  std::map<Index, Index> ids;
  for (Index v : raw_labels) {
    if (v < 0) throw DomainError("negative block label");
    ids.emplace(v, 0);
  }
  Index next = 0;
  for (auto& [id, mapped] : ids) mapped = next++;
  Partition p;
  p.k = next;
  p.labels.reserve(raw_labels.size());
  for (Index v : raw_labels) p.labels.push_back(ids[v]);
  return p;
}

// ---------------------------------------------------------------------------
// Gap detection
//
// Candidate i (1-based) says "i clusters". It is compared against the largest
// earlier increment, except the jump from the numerical null space to the
// first positive eigenvalue: that jump separates the trivial eigenvalues from
// the cluster, not one cluster eigenvalue from the next. Candidates with no
// earlier increment to compare against are not eligible.

GapResult detect_gap(std::span<const double> eigenvalues, const GapOptions& opts) {
  if (opts.k_min < 1) throw DomainError("k_min must be at least 1");
  if (!(opts.alpha > 1.0)) throw DomainError("alpha must exceed 1");
  if (!(opts.min_relative_gap >= 0.0)) throw DomainError("min_relative_gap must be non-negative");
  const Index m = static_cast<Index>(eigenvalues.size());
  if (m < opts.k_min + 1) {
    throw DomainError("gap detection needs at least k_min + 1 = " +
                      std::to_string(opts.k_min + 1) + " eigenvalues, got " + std::to_string(m));
  }

  double top = 0.0;
  for (double v : eigenvalues) top = std::max(top, std::abs(v));
  const double floor =
      top > 0.0 ? 1e-12 * top : std::numeric_limits<double>::min();
  const double zero_level = 1e-6 * top;

  GapResult out;
  out.increments.resize(static_cast<std::size_t>(m - 1));
  for (Index i = 0; i + 1 < m; ++i) {
    out.increments[i] = std::max(0.0, eigenvalues[i + 1] - eigenvalues[i]);
  }
  Index zeros = 0;
  while (zeros < m && eigenvalues[zeros] <= zero_level) ++zeros;
  const Index null_jump = (zeros >= 1 && zeros < m) ? zeros : -1;  // 1-based increment index

  auto confidence = [&](Index i) -> double {
    double earlier = -1.0;
    for (Index j = 1; j < i; ++j) {
      if (j == null_jump) continue;
      earlier = std::max(earlier, out.increments[j - 1]);
    }
    if (earlier < 0.0) return 0.0;
    const double threshold = std::max(
        {earlier, floor, opts.min_relative_gap / opts.alpha * std::abs(eigenvalues[i])});
    return out.increments[i - 1] / threshold;
  };

  for (Index i = opts.k_min; i < m; ++i) {
    const double c = confidence(i);
    if (c > opts.alpha) {
      out.k = i;
      out.confidence = c;
      out.reliable = true;
      return out;
    }
  }
  Index best = 1;
  for (Index i = 2; i < m; ++i) {
    if (out.increments[i - 1] > out.increments[best - 1]) best = i;
  }
  out.k = best;
  out.confidence = confidence(best);
  out.reliable = false;
  return out;
}

// ---------------------------------------------------------------------------
// Assignment

Assignment assign_clusters_qrcp(ConstBlockRef x) {
  const Index n = x.rows();
  const Index k = x.cols();
  if (k < 1) throw ContractError("assignment needs at least one embedding column");
  if (n < k) throw DomainError("assignment needs at least as many vertices as columns");

  const Eigen::MatrixXd xt = x.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xt);
  Assignment out;
  out.pivots.resize(static_cast<std::size_t>(k));
  Eigen::MatrixXd selected(k, k);
  for (Index j = 0; j < k; ++j) {
    out.pivots[j] = qr.colsPermutation().indices()(j);
    selected.row(j) = x.row(out.pivots[j]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(selected);
  const auto& sv = svd.singularValues();
  if (!(sv(k - 1) > 1e-10 * sv(0))) {
    throw AssignmentError("selected embedding rows are numerically singular (rcond " +
                          std::to_string(sv(0) > 0.0 ? sv(k - 1) / sv(0) : 0.0) + ")");
  }
  const Eigen::MatrixXd inverse = selected.inverse();

  double max_row = 0.0;
  for (Index i = 0; i < n; ++i) max_row = std::max(max_row, x.row(i).norm());
  std::vector<Index> raw(static_cast<std::size_t>(n), 0);
  Eigen::RowVectorXd psi(k);
  for (Index i = 0; i < n; ++i) {
    if (!(x.row(i).norm() > 1e-12 * max_row)) {
      out.zero_rows.push_back(i);
      continue;
    }
    psi.noalias() = x.row(i) * inverse;
    Index arg = 0;
    for (Index j = 1; j < k; ++j)
      if (std::abs(psi(j)) > std::abs(psi(arg))) arg = j;
    raw[i] = arg;
  }
  out.partition = Partition::compact(raw);
  return out;
}

// ---------------------------------------------------------------------------
// Static pipeline

Index block_size_for(Index k_expected) {
  if (k_expected < 1) throw DomainError("expected cluster count must be at least 1");
  return k_expected + std::max<Index>(2, (k_expected + 9) / 10);
}

StaticResult partition_static(const SparseGraph& g, const SolverConfig& cfg,
                              std::optional<Index> k_expected, const GapOptions& gap,
                              const MultiVector* initial) {
  const Index n = g.num_vertices();
  if (n < 1) throw DomainError("cannot partition an empty graph");
  SolverConfig run = cfg;
  if (k_expected) {
    run.block_size = block_size_for(*k_expected);
    run.n_wanted = *k_expected;
  }
  run.block_size = std::min(run.block_size, n);
  if (run.n_wanted > run.block_size) run.n_wanted = run.block_size;
  run.validate();

  MultiVector x0;
  if (initial != nullptr) {
    if (initial->rows() != n || initial->cols() != run.block_size) {
      throw ContractError("initial block must be " + std::to_string(n) + "x" +
                          std::to_string(run.block_size));
    }
    x0 = *initial;
  } else {
    x0 = random_init(n, run.block_size, run.seed);
  }

  using Clock = std::chrono::steady_clock;
  StaticResult out;
  const LaplacianOperator op(g);
  auto t0 = Clock::now();
  out.eigenstate = lobpcg_solve(op, std::move(x0), run);
  auto t1 = Clock::now();
  out.gap = detect_gap(out.eigenstate.eigenvalues, gap);
  Assignment a = assign_clusters_qrcp(out.eigenstate.vectors.leftCols(out.gap.k));
  auto t2 = Clock::now();
  out.partition = std::move(a.partition);
  out.zero_rows = std::move(a.zero_rows);
  out.timings.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.timings.assign_seconds = std::chrono::duration<double>(t2 - t1).count();
  return out;
}

}  // namespace spectral
