#pragma once

#include <cstdint>
#include <vector>

#include "spectral/graph.hpp"
#include "spectral/partition.hpp"
#include "spectral/streaming.hpp"

namespace spectral {

// How block ids are laid out over vertex indices. Snowball streams reveal
// vertices in index order, so the layout decides what early stages see.
enum class SbmLayout {
  interleaved,  // every index prefix holds each block in proportion
  contiguous,   // block 0 first, then block 1, ...
  shuffled,     // seeded random order
};

const char* to_string(SbmLayout l) noexcept;

struct SbmSpec {
  Index n = 0;
  Index k = 1;
  double p_in = 0.0;
  double p_out = 0.0;
  std::vector<Index> block_sizes;  // empty: near-equal sizes
  std::uint64_t seed = 1;
  SbmLayout layout = SbmLayout::interleaved;

  // Throws DomainError unless 0 <= p_out <= p_in <= 1, k >= 1 and the
  // block sizes are positive and sum to n.
  void validate() const;
};

struct SbmGraph {
  SparseGraph graph;  // each undirected edge stored once as (i, j), i < j
  Partition truth;
};

SbmGraph generate_sbm(const SbmSpec& spec);

struct SbmStream {
  SparseGraph initial;
  std::vector<StreamStage> stages;
  Partition truth;
};

// Emerging: the edge set of generate_sbm(spec), shuffled and cut into
// `stages` near-equal deltas over all n vertices. Snowball: vertices revealed
// in `stages` near-equal index ranges; each delta holds the edges that the
// new range completes.
SbmStream generate_stream(const SbmSpec& spec, StreamMode mode, Index stages);

}  // namespace spectral
