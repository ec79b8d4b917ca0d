#include "spectral/streaming.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "spectral/errors.hpp"

namespace spectral {

const char* to_string(StreamMode m) noexcept {
  return m == StreamMode::emerging ? "emerging" : "snowball";
}
const char* to_string(InitMode m) noexcept { return m == InitMode::random ? "random" : "warm"; }
const char* to_string(FillMode m) noexcept { return m == FillMode::zero ? "zero" : "random"; }

std::uint64_t stage_seed(std::uint64_t seed, Index stage) {
  // splitmix64 of (seed, stage)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stage);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MultiVector warm_start(const EigenState& prev, Index n_new, FillMode fill, std::uint64_t seed) {
  const Index n_old = prev.vectors.rows();
  const Index l = prev.vectors.cols();
  if (n_new < n_old) {
    throw DomainError("warm start cannot drop vertices (" + std::to_string(n_old) + " -> " +
                      std::to_string(n_new) + ")");
  }
  MultiVector x(n_new, l);
  x.topRows(n_old) = prev.vectors;
  if (n_new > n_old) {
    if (fill == FillMode::zero) {
      x.bottomRows(n_new - n_old).setZero();
    } else {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index i = n_old; i < n_new; ++i)
        for (Index c = 0; c < l; ++c) x(i, c) = normal(rng);
    }
  }
  return x;
}

void validate_stream(const SparseGraph& initial, std::span<const StreamStage> stages) {
  Index n = initial.num_vertices();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StreamStage& st = stages[s];
    const std::string where = "stage " + std::to_string(s + 1) + ": ";
    if (st.index != static_cast<Index>(s) + 1) {
      throw DomainError(where + "stage indices must be consecutive from 1, got " +
                        std::to_string(st.index));
    }
    if (st.mode != stages.front().mode) throw DomainError(where + "mixed stream modes");
    if (st.mode == StreamMode::emerging && st.n_after != n) {
      throw DomainError(where + "emerging stream changes the vertex count (" + std::to_string(n) +
                        " -> " + std::to_string(st.n_after) + ")");
    }
    if (st.n_after < n) {
      throw DomainError(where + "vertex count decreases (" + std::to_string(n) + " -> " +
                        std::to_string(st.n_after) + ")");
    }
    for (const Edge& e : st.edge_delta) {
      if (e.src < 0 || e.dst < 0 || e.src >= st.n_after || e.dst >= st.n_after) {
        throw DomainError(where + "edge (" + std::to_string(e.src + 1) + ", " +
                          std::to_string(e.dst + 1) + ") outside the " +
                          std::to_string(st.n_after) + " vertices of this stage");
      }
    }
    n = st.n_after;
  }
}

std::vector<StageResult> partition_stream(const SparseGraph& initial,
                                          std::span<const StreamStage> stages,
                                          const StreamConfig& cfg) {
  validate_stream(initial, stages);
  cfg.solver.validate();
  Index l = cfg.solver.block_size;
  Index wanted = cfg.solver.n_wanted;
  if (cfg.k_expected) {
    l = block_size_for(*cfg.k_expected);
    wanted = *cfg.k_expected;
  }

  using Clock = std::chrono::steady_clock;
  std::vector<StageResult> done;
  SparseGraph g = initial;
  for (const StreamStage& st : stages) {
    try {
      const auto t0 = Clock::now();
      g = apply_delta(g, st.edge_delta, st.n_after);
      const Index n = g.num_vertices();
      const std::uint64_t seed = stage_seed(cfg.solver.seed, st.index);

      SolverConfig run = cfg.solver;
      run.block_size = std::min(l, n);
      run.n_wanted = std::min(wanted, run.block_size);
      run.seed = seed;

      StageResult res;
      res.index = st.index;
      MultiVector x0;
      const EigenState* prev = done.empty() ? nullptr : &done.back().eigenstate;
      if (cfg.init == InitMode::warm && prev != nullptr) {
        res.init_mode = InitMode::warm;
        x0 = warm_start(*prev, n, cfg.fill, seed);
        if (x0.cols() != run.block_size) {
          // The block grows with the graph until it reaches l.
          const Index old_cols = std::min(x0.cols(), run.block_size);
          const MultiVector fresh = random_init(n, run.block_size, seed);
          MultiVector merged = fresh;
          merged.leftCols(old_cols) = x0.leftCols(old_cols);
          x0 = std::move(merged);
        }
      } else {
        res.init_mode = InitMode::random;
        x0 = random_init(n, run.block_size, seed);
      }

      const LaplacianOperator op(g);
      res.eigenstate = lobpcg_solve(op, std::move(x0), run);
      res.iterations = res.eigenstate.iterations;
      res.gap = detect_gap(res.eigenstate.eigenvalues, cfg.gap);
      res.partition =
          assign_clusters_qrcp(res.eigenstate.vectors.leftCols(res.gap.k)).partition;
      res.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
      if (cfg.on_stage) cfg.on_stage(res);
      done.push_back(std::move(res));
    } catch (const Error& e) {
      throw StageError(st.index, e.what(), std::current_exception(), std::move(done));
    }
  }
  return done;
}

}  // namespace spectral
