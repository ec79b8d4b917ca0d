#include "spectral/metrics.hpp"

#include <algorithm>
#include <limits>

#include "spectral/errors.hpp"

namespace spectral {

ContingencyTable::ContingencyTable(Index k_true, Index k_found)
    : k_true_(k_true),
      k_found_(k_found),
      counts_(static_cast<std::size_t>(k_true * k_found), 0) {
  if (k_true < 0 || k_found < 0) throw DomainError("negative block count");
}

void ContingencyTable::add(Index a, Index b, std::uint64_t c) {
  if (a < 0 || a >= k_true_ || b < 0 || b >= k_found_) {
    throw ContractError("contingency cell out of range");
  }
  counts_[a * k_found_ + b] += c;
  total_ += c;
}

std::vector<std::uint64_t> ContingencyTable::row_sums() const {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(k_true_), 0);
  for (Index a = 0; a < k_true_; ++a)
    for (Index b = 0; b < k_found_; ++b) s[a] += (*this)(a, b);
  return s;
}

std::vector<std::uint64_t> ContingencyTable::col_sums() const {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(k_found_), 0);
  for (Index a = 0; a < k_true_; ++a)
    for (Index b = 0; b < k_found_; ++b) s[b] += (*this)(a, b);
  return s;
}

ContingencyTable contingency(const Partition& truth, const Partition& found) {
  if (truth.size() != found.size()) {
    throw ContractError("partitions differ in length (" + std::to_string(truth.size()) + " vs " +
                        std::to_string(found.size()) + ")");
  }
  ContingencyTable t(truth.k, found.k);
  for (Index i = 0; i < truth.size(); ++i) t.add(truth.labels[i], found.labels[i]);
  return t;
}

// Jonker-Volgenant style shortest augmenting path, O(size^3).
std::vector<Index> min_cost_assignment(const std::vector<std::int64_t>& cost, Index size) {
  if (static_cast<Index>(cost.size()) != size * size) {
    throw ContractError("cost matrix must be size x size");
  }
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  const Index n = size;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<Index> owner(n + 1, 0), way(n + 1, 0);
  for (Index row = 1; row <= n; ++row) {
    owner[0] = row;
    Index col0 = 0;
    std::vector<std::int64_t> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const Index r = owner[col0];
      std::int64_t delta = kInf;
      Index col1 = 0;
      for (Index c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const std::int64_t cur = cost[(r - 1) * n + (c - 1)] - u[r] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (Index c = 0; c <= n; ++c) {
        if (used[c]) {
          u[owner[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const Index col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n), -1);
  for (Index c = 1; c <= n; ++c)
    if (owner[c] != 0) assignment[owner[c] - 1] = c - 1;
  return assignment;
}

std::uint64_t matched_vertices(const ContingencyTable& t) {
  const Index size = std::max(t.k_true(), t.k_found());
  if (size == 0) return 0;
  std::vector<std::int64_t> cost(static_cast<std::size_t>(size * size), 0);
  for (Index a = 0; a < t.k_true(); ++a)
    for (Index b = 0; b < t.k_found(); ++b)
      cost[a * size + b] = -static_cast<std::int64_t>(t(a, b));
  const std::vector<Index> match = min_cost_assignment(cost, size);
  std::uint64_t matched = 0;
  for (Index a = 0; a < t.k_true(); ++a)
    if (match[a] < t.k_found()) matched += t(a, match[a]);
  return matched;
}

double partition_match(const ContingencyTable& t) {
  if (t.total() == 0) throw UndefinedMetricError("partition match of empty partitions");
  return static_cast<double>(matched_vertices(t)) / static_cast<double>(t.total());
}

namespace {

std::uint64_t pairs(std::uint64_t c) { return c < 2 ? 0 : c * (c - 1) / 2; }

std::uint64_t co_clustered_pairs(const ContingencyTable& t) {
  std::uint64_t s = 0;
  for (Index a = 0; a < t.k_true(); ++a)
    for (Index b = 0; b < t.k_found(); ++b) s += pairs(t(a, b));
  return s;
}

}  // namespace

PairRatio pairwise_recall_ratio(const ContingencyTable& t) {
  PairRatio r;
  for (std::uint64_t s : t.row_sums()) r.total += pairs(s);
  if (r.total == 0) throw UndefinedMetricError("pairwise recall undefined: no truth block has two vertices");
  r.agree = co_clustered_pairs(t);
  return r;
}

PairRatio pairwise_precision_ratio(const ContingencyTable& t) {
  PairRatio r;
  for (std::uint64_t s : t.col_sums()) r.total += pairs(s);
  if (r.total == 0) throw UndefinedMetricError("pairwise precision undefined: no found block has two vertices");
  r.agree = co_clustered_pairs(t);
  return r;
}

double pairwise_recall(const ContingencyTable& t) { return pairwise_recall_ratio(t).value(); }
double pairwise_precision(const ContingencyTable& t) { return pairwise_precision_ratio(t).value(); }

}  // namespace spectral
