#include "spectral/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spectral/errors.hpp"

namespace spectral {

const char* to_string(SbmLayout l) noexcept {
  switch (l) {
    case SbmLayout::interleaved: return "interleaved";
    case SbmLayout::contiguous: return "contiguous";
    case SbmLayout::shuffled: return "shuffled";
  }
  return "?";
}

void SbmSpec::validate() const {
  if (n < 1) throw DomainError("SBM needs at least one vertex");
  if (k < 1) throw DomainError("SBM needs at least one block");
  if (k > n) throw DomainError("SBM has more blocks than vertices");
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw DomainError("edge probabilities must lie in [0, 1]");
  }
  if (p_out > p_in) {
    throw DomainError("p_out (" + std::to_string(p_out) + ") must not exceed p_in (" +
                      std::to_string(p_in) + ")");
  }
  if (!block_sizes.empty()) {
    if (static_cast<Index>(block_sizes.size()) != k) throw DomainError("need one size per block");
    Index total = 0;
    for (Index s : block_sizes) {
      if (s < 1) throw DomainError("block sizes must be positive");
      total += s;
    }
    if (total != n) throw DomainError("block sizes must sum to n");
  }
}

namespace {

std::vector<Index> sizes_of(const SbmSpec& spec) {
  if (!spec.block_sizes.empty()) return spec.block_sizes;
  std::vector<Index> s(static_cast<std::size_t>(spec.k), spec.n / spec.k);
  for (Index b = 0; b < spec.n % spec.k; ++b) ++s[b];
  return s;
}

std::vector<Index> layout_labels(const SbmSpec& spec, const std::vector<Index>& sizes) {
  const Index n = spec.n;
  std::vector<Index> labels;
  labels.reserve(static_cast<std::size_t>(n));
  if (spec.layout == SbmLayout::interleaved) {
    // Largest deficit against the proportional share of the prefix.
    std::vector<Index> count(sizes.size(), 0);
    for (Index i = 0; i < n; ++i) {
      Index pick = -1;
      Index best = 0;
      for (std::size_t b = 0; b < sizes.size(); ++b) {
        if (count[b] == sizes[b]) continue;
        const Index deficit = sizes[b] * (i + 1) - count[b] * n;
        if (pick < 0 || deficit > best) {
          pick = static_cast<Index>(b);
          best = deficit;
        }
      }
      ++count[pick];
      labels.push_back(pick);
    }
    return labels;
  }
  for (std::size_t b = 0; b < sizes.size(); ++b) labels.insert(labels.end(), sizes[b], Index(b));
  if (spec.layout == SbmLayout::shuffled) {
    std::mt19937_64 rng(spec.seed ^ 0x632be59bd9b4e019ULL);
    std::shuffle(labels.begin(), labels.end(), rng);
  }
  return labels;
}

// Bernoulli(p) trials over `total` slots, visiting only successes.
template <class F>
void sample_slots(std::uint64_t total, double p, std::mt19937_64& rng, F&& on_hit) {
  if (total == 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint64_t s = 0; s < total; ++s) on_hit(s);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  std::uint64_t pos = 0;
  for (;;) {
    const double u = 1.0 - unif(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(total - pos)) return;
    pos += static_cast<std::uint64_t>(skip);
    on_hit(pos);
    if (++pos >= total) return;
  }
}

}  // namespace

SbmGraph generate_sbm(const SbmSpec& spec) {
  spec.validate();
  const std::vector<Index> sizes = sizes_of(spec);
  const std::vector<Index> labels = layout_labels(spec, sizes);
  std::vector<std::vector<Index>> members(sizes.size());
  for (Index i = 0; i < spec.n; ++i) members[labels[i]].push_back(i);

  std::mt19937_64 rng(spec.seed);
  EdgeList edges;
  auto push = [&](Index u, Index v) { edges.push_back({std::min(u, v), std::max(u, v), 1.0}); };
  for (std::size_t a = 0; a < members.size(); ++a) {
    const auto& ma = members[a];
    const std::uint64_t sa = ma.size();
    // Pairs inside block a, enumerated row by row of the strict upper triangle.
    {
      std::uint64_t row = 0;
      std::uint64_t row_start = 0;  // linear index of (row, row + 1)
      sample_slots(sa * (sa - 1) / 2, spec.p_in, rng, [&](std::uint64_t s) {
        while (s >= row_start + (sa - 1 - row)) {
          row_start += sa - 1 - row;
          ++row;
        }
        push(ma[row], ma[row + 1 + (s - row_start)]);
      });
    }
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const auto& mb = members[b];
      const std::uint64_t sb = mb.size();
      sample_slots(sa * sb, spec.p_out, rng, [&](std::uint64_t s) { push(ma[s / sb], mb[s % sb]); });
    }
  }
  SbmGraph out;
  out.graph = SparseGraph::from_edges(spec.n, edges, false);
  out.truth.labels = labels;
  out.truth.k = static_cast<Index>(sizes.size());
  return out;
}

SbmStream generate_stream(const SbmSpec& spec, StreamMode mode, Index stages) {
  if (stages < 2) throw DomainError("a stream needs at least 2 stages");
  SbmGraph full = generate_sbm(spec);
  EdgeList edges = full.graph.edges();
  const Index n = spec.n;
  const auto m = static_cast<Index>(edges.size());

  SbmStream out;
  out.truth = std::move(full.truth);
  out.stages.resize(static_cast<std::size_t>(stages));
  if (mode == StreamMode::emerging) {
    std::mt19937_64 rng(spec.seed ^ 0xd1b54a32d192ed03ULL);
    std::shuffle(edges.begin(), edges.end(), rng);
    out.initial = SparseGraph::from_edges(n, {}, false);
    for (Index t = 0; t < stages; ++t) {
      StreamStage& st = out.stages[t];
      st.index = t + 1;
      st.mode = mode;
      st.n_after = n;
      st.edge_delta.assign(edges.begin() + t * m / stages, edges.begin() + (t + 1) * m / stages);
    }
  } else {
    out.initial = SparseGraph::from_edges(0, {}, false);
    for (Index t = 0; t < stages; ++t) {
      StreamStage& st = out.stages[t];
      st.index = t + 1;
      st.mode = mode;
      st.n_after = (t + 1) * n / stages;
    }
    for (const Edge& e : edges) {
      const Index top = std::max(e.src, e.dst);
      // first stage whose prefix contains `top`
      Index t = (top * stages) / n;
      while (out.stages[t].n_after <= top) ++t;
      while (t > 0 && out.stages[t - 1].n_after > top) --t;
      out.stages[t].edge_delta.push_back(e);
    }
  }
  return out;
}

}  // namespace spectral
