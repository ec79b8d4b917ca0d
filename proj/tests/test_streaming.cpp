#include <gtest/gtest.h>

#include "spectral/errors.hpp"
#include "spectral/metrics.hpp"
#include "spectral/sbm.hpp"
#include "spectral/streaming.hpp"

using namespace spectral;

namespace {

EigenState state_of(const MultiVector& v) {
  EigenState s;
  s.vectors = v;
  s.eigenvalues.assign(v.cols(), 0.0);
  s.residual_norms.assign(v.cols(), 0.0);
  return s;
}

StreamConfig stream_config(InitMode init, Index k) {
  StreamConfig cfg;
  cfg.init = init;
  cfg.k_expected = k;
  cfg.solver.deterministic = true;
  return cfg;
}

}  // namespace

TEST(WarmStart, SameSizeIsIdentity) {
  const MultiVector v = random_init(7, 3, 1);
  EXPECT_EQ(warm_start(state_of(v), 7, FillMode::zero, 1), v);
}

TEST(WarmStart, ZeroFill) {
  const MultiVector v = random_init(3, 2, 1);
  const MultiVector w = warm_start(state_of(v), 5, FillMode::zero, 1);
  EXPECT_EQ(w.topRows(3), v);
  EXPECT_TRUE(w.bottomRows(2).isZero(0.0));
}

TEST(WarmStart, RandomFillSeeded) {
  const MultiVector v = random_init(3, 2, 1);
  const MultiVector a = warm_start(state_of(v), 6, FillMode::random, 4);
  const MultiVector b = warm_start(state_of(v), 6, FillMode::random, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.topRows(3), v);
  EXPECT_FALSE(a.bottomRows(3).isZero(0.0));
}

TEST(WarmStart, ShrinkIsDomainError) {
  EXPECT_THROW(warm_start(state_of(random_init(5, 2, 1)), 4, FillMode::zero, 1), DomainError);
}

TEST(WarmStart, ConvergedStateIsFixedPoint) {
  const SbmGraph sbm = generate_sbm({.n = 600, .k = 5, .p_in = 0.15, .p_out = 0.005, .seed = 2});
  const LaplacianOperator op(sbm.graph);
  SolverConfig cfg;
  cfg.block_size = 7;
  cfg.max_iter = 200;
  const EigenState s = lobpcg_solve(op, random_init(600, 7, 1), cfg);
  ASSERT_LT(s.iterations, cfg.max_iter);
  const EigenState again = lobpcg_solve(op, warm_start(s, 600, FillMode::zero, 1), cfg);
  EXPECT_LE(again.iterations, 2);
}

TEST(ValidateStream, RejectsMalformedStreams) {
  const SparseGraph g0 = SparseGraph::from_edges(3, {});
  std::vector<StreamStage> bad_index{{2, StreamMode::emerging, {}, 3}};
  EXPECT_THROW(validate_stream(g0, bad_index), DomainError);
  std::vector<StreamStage> emerging_grows{{1, StreamMode::emerging, {}, 4}};
  EXPECT_THROW(validate_stream(g0, emerging_grows), DomainError);
  std::vector<StreamStage> snowball_shrinks{{1, StreamMode::snowball, {}, 5},
                                            {2, StreamMode::snowball, {}, 4}};
  EXPECT_THROW(validate_stream(g0, snowball_shrinks), DomainError);
  std::vector<StreamStage> edge_outside{{1, StreamMode::snowball, {{0, 4, 1.0}}, 4}};
  EXPECT_THROW(validate_stream(g0, edge_outside), DomainError);
  std::vector<StreamStage> ok{{1, StreamMode::snowball, {{0, 3, 1.0}}, 4}};
  EXPECT_NO_THROW(validate_stream(g0, ok));
}

TEST(PartitionStream, EmptyDeltaIsFixedPoint) {
  const SbmSpec spec{.n = 600, .k = 5, .p_in = 0.2, .p_out = 0.005, .seed = 3};
  const SbmGraph sbm = generate_sbm(spec);
  std::vector<StreamStage> stages{{1, StreamMode::emerging, sbm.graph.edges(), 600},
                                  {2, StreamMode::emerging, {}, 600}};
  StreamConfig cfg = stream_config(InitMode::warm, 5);
  cfg.solver.max_iter = 200;
  const auto res = partition_stream(SparseGraph::from_edges(600, {}), stages, cfg);
  ASSERT_EQ(res.size(), 2u);
  ASSERT_LT(res[0].iterations, 200);
  EXPECT_LE(res[1].iterations, 2);
  EXPECT_EQ(partition_match(contingency(res[0].partition, res[1].partition)), 1.0);
  EXPECT_EQ(res[1].init_mode, InitMode::warm);
}

TEST(PartitionStream, FirstStageSameForBothModes) {
  const SbmStream s = generate_stream({.n = 400, .k = 4, .p_in = 0.2, .p_out = 0.01, .seed = 1},
                                      StreamMode::emerging, 4);
  const auto r = partition_stream(s.initial, s.stages, stream_config(InitMode::random, 4));
  const auto w = partition_stream(s.initial, s.stages, stream_config(InitMode::warm, 4));
  EXPECT_EQ(r[0].eigenstate.vectors, w[0].eigenstate.vectors);
  EXPECT_EQ(r[0].partition.labels, w[0].partition.labels);
  EXPECT_EQ(r[0].init_mode, InitMode::random);
  EXPECT_EQ(w[0].init_mode, InitMode::random);
  EXPECT_EQ(w[1].init_mode, InitMode::warm);
}

TEST(PartitionStream, EmergingFinalStageRecoversTruth) {
  const SbmStream s = generate_stream({.n = 1000, .k = 8, .p_in = 0.15, .p_out = 0.005, .seed = 2},
                                      StreamMode::emerging, 10);
  for (InitMode mode : {InitMode::random, InitMode::warm}) {
    const auto res = partition_stream(s.initial, s.stages, stream_config(mode, 8));
    ASSERT_EQ(res.size(), 10u);
    EXPECT_EQ(partition_match(contingency(s.truth, res.back().partition)), 1.0);
    for (const StageResult& st : res) {
      EXPECT_EQ(st.eigenstate.rows(), 1000);
      EXPECT_LE(st.iterations, 20);
    }
  }
}

TEST(PartitionStream, SnowballWarmNotSlowerLate) {
  const SbmStream s = generate_stream({.n = 1000, .k = 8, .p_in = 0.15, .p_out = 0.005, .seed = 3},
                                      StreamMode::snowball, 10);
  const auto r = partition_stream(s.initial, s.stages, stream_config(InitMode::random, 8));
  const auto w = partition_stream(s.initial, s.stages, stream_config(InitMode::warm, 8));
  double sr = 0, sw = 0;
  for (std::size_t i = 4; i < 10; ++i) {
    sr += r[i].iterations;
    sw += w[i].iterations;
    EXPECT_EQ(r[i].eigenstate.rows(), s.stages[i].n_after);
  }
  EXPECT_LE(sw, sr);
}

TEST(PartitionStream, CumulativeGraphMatchesOneShot) {
  const SbmSpec spec{.n = 300, .k = 3, .p_in = 0.2, .p_out = 0.01, .seed = 6};
  const SbmStream s = generate_stream(spec, StreamMode::snowball, 5);
  const auto res = partition_stream(s.initial, s.stages, stream_config(InitMode::warm, 3));
  const SbmGraph full = generate_sbm(spec);
  EXPECT_EQ(res.back().partition.size(), full.graph.num_vertices());
}

TEST(PartitionStream, DeterministicRunsAreBitwiseEqual) {
  const SbmStream s = generate_stream({.n = 500, .k = 4, .p_in = 0.2, .p_out = 0.01, .seed = 8},
                                      StreamMode::snowball, 5);
  const auto a = partition_stream(s.initial, s.stages, stream_config(InitMode::warm, 4));
  const auto b = partition_stream(s.initial, s.stages, stream_config(InitMode::warm, 4));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].eigenstate.vectors, b[i].eigenstate.vectors);
    EXPECT_EQ(a[i].partition.labels, b[i].partition.labels);
  }
}

TEST(PartitionStream, StageErrorCarriesIndexAndCompletedStages) {
  std::vector<StreamStage> stages{{1, StreamMode::snowball, {{0, 1, 1.0}, {1, 2, 1.0}}, 3},
                                  {2, StreamMode::snowball, {}, 3}};
  StreamConfig cfg;
  cfg.solver.block_size = 3;
  int calls = 0;
  cfg.on_stage = [&](const StageResult&) {
    if (++calls == 2) throw DomainError("injected");
  };
  try {
    partition_stream(SparseGraph::from_edges(0, {}), stages, cfg);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), 2);
    EXPECT_EQ(e.completed().size(), 1u);
    EXPECT_TRUE(e.cause() != nullptr);
  }
}

TEST(StageSeed, DistinctPerStage) {
  EXPECT_NE(stage_seed(1, 1), stage_seed(1, 2));
  EXPECT_EQ(stage_seed(5, 3), stage_seed(5, 3));
}
