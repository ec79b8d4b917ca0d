#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spectral/spectral.h"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spectral_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(CApi, StatusStringsAndVersion) {
  EXPECT_STREQ(spc_status_string(SPC_OK), "ok");
  EXPECT_STRNE(spc_status_string(SPC_ERR_PARSE), "ok");
  EXPECT_STREQ(spc_version(), "1.0.0");
}

TEST(CApi, NullArgumentsRejected) {
  spc_graph* g = nullptr;
  EXPECT_EQ(spc_graph_load(nullptr, 1, 0, &g), SPC_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(spc_last_error()), "");
  spc_graph_free(nullptr);
  EXPECT_EQ(spc_graph_num_vertices(nullptr), 0);
}

TEST(CApi, LoadErrorsMapToCodes) {
  const fs::path d = temp_dir("load");
  spc_graph* g = nullptr;
  EXPECT_EQ(spc_graph_load((d / "missing.tsv").c_str(), 1, 0, &g), SPC_ERR_IO);
  EXPECT_EQ(g, nullptr);
  std::ofstream(d / "bad.tsv") << "1\tz\n";
  EXPECT_EQ(spc_graph_load((d / "bad.tsv").c_str(), 1, 0, &g), SPC_ERR_PARSE);
  std::ofstream(d / "neg.tsv") << "1\t2\t-3\n";
  EXPECT_EQ(spc_graph_load((d / "neg.tsv").c_str(), 1, 0, &g), SPC_ERR_DOMAIN);
  fs::remove_all(d);
}

TEST(CApi, LaplacianApply) {
  const int64_t src[] = {0, 1};
  const int64_t dst[] = {1, 2};
  spc_graph* g = nullptr;
  ASSERT_EQ(spc_graph_from_edges(3, 2, src, dst, nullptr, &g), SPC_OK);
  EXPECT_EQ(spc_graph_num_vertices(g), 3);
  EXPECT_EQ(spc_graph_num_entries(g), 2);
  const double x[] = {1, 0, -1};
  double y[3];
  ASSERT_EQ(spc_graph_laplacian_apply(g, x, 1, y), SPC_OK);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_EQ(y[2], -1.0);
  spc_graph_free(g);
}

TEST(CApi, StaticPipelineOnSbm) {
  spc_sbm_spec spec{1000, 8, 0.15, 0.005, 3, SPC_LAYOUT_INTERLEAVED};
  spc_graph* g = nullptr;
  spc_partition* truth = nullptr;
  ASSERT_EQ(spc_sbm_generate(&spec, &g, &truth), SPC_OK);
  spc_solver_config cfg;
  spc_solver_config_init(&cfg);
  EXPECT_EQ(cfg.block_size, 8);
  EXPECT_EQ(cfg.max_iter, 20);
  EXPECT_EQ(cfg.tol, 1e-4);
  spc_static_result* res = nullptr;
  ASSERT_EQ(spc_partition_static(g, &cfg, 8, nullptr, &res), SPC_OK) << spc_last_error();
  spc_static_summary sum;
  spc_static_result_summary(res, &sum);
  EXPECT_EQ(sum.k_found, 8);
  EXPECT_EQ(sum.block_size, 10);
  EXPECT_TRUE(sum.gap_reliable);
  spc_metrics m;
  ASSERT_EQ(spc_metrics_compute(truth, spc_static_result_partition(res), &m), SPC_OK);
  EXPECT_EQ(m.pm, 1.0);
  EXPECT_EQ(m.pr, 1.0);
  EXPECT_EQ(m.pp, 1.0);

  // Warm restart from the saved state converges at once.
  const fs::path d = temp_dir("static");
  const std::string state_path = (d / "state.json").string();
  ASSERT_EQ(spc_eigenstate_save(spc_static_result_eigenstate(res), state_path.c_str()), SPC_OK);
  spc_eigenstate* warm = nullptr;
  ASSERT_EQ(spc_eigenstate_load(state_path.c_str(), &warm), SPC_OK);
  EXPECT_EQ(spc_eigenstate_cols(warm), 10);
  spc_static_result* again = nullptr;
  ASSERT_EQ(spc_partition_static(g, &cfg, 8, warm, &again), SPC_OK) << spc_last_error();
  spc_static_summary sum2;
  spc_static_result_summary(again, &sum2);
  EXPECT_LE(sum2.iterations, 2);
  spc_eigenstate* wrong = nullptr;
  ASSERT_EQ(spc_eigenstate_load(state_path.c_str(), &wrong), SPC_OK);
  spc_static_result* bad = nullptr;
  EXPECT_EQ(spc_partition_static(g, &cfg, 5, wrong, &bad), SPC_ERR_INVALID_ARGUMENT);

  spc_eigenstate_free(wrong);
  spc_eigenstate_free(warm);
  spc_static_result_free(again);
  spc_static_result_free(res);
  spc_partition_free(truth);
  spc_graph_free(g);
  fs::remove_all(d);
}

TEST(CApi, MetricsUndefinedFlags) {
  const int64_t a[] = {0, 1, 2};
  const int64_t b[] = {0, 0, 0};
  spc_partition *pa = nullptr, *pb = nullptr;
  ASSERT_EQ(spc_partition_from_labels(3, a, &pa), SPC_OK);
  ASSERT_EQ(spc_partition_from_labels(3, b, &pb), SPC_OK);
  spc_metrics m;
  ASSERT_EQ(spc_metrics_compute(pa, pb, &m), SPC_OK);
  EXPECT_EQ(m.pr_defined, 0);
  EXPECT_TRUE(std::isnan(m.pr));
  EXPECT_EQ(m.pp_defined, 1);
  EXPECT_EQ(m.pp, 0.0);
  EXPECT_EQ(m.precision_total, 3u);
  spc_partition* pre = nullptr;
  ASSERT_EQ(spc_partition_prefix(pa, 2, &pre), SPC_OK);
  EXPECT_EQ(spc_partition_size(pre), 2);
  spc_partition_free(pre);
  spc_partition_free(pa);
  spc_partition_free(pb);
}

TEST(CApi, StreamDatasetRoundTrip) {
  const fs::path d = temp_dir("stream");
  spc_sbm_spec spec{400, 4, 0.2, 0.01, 2, SPC_LAYOUT_INTERLEAVED};
  ASSERT_EQ(spc_sbm_write_dataset(&spec, SPC_STREAM_SNOWBALL, 5, d.c_str()), SPC_OK)
      << spc_last_error();
  spc_stream* s = nullptr;
  ASSERT_EQ(spc_stream_load((d / "manifest.json").c_str(), &s), SPC_OK) << spc_last_error();
  EXPECT_EQ(spc_stream_num_stages(s), 5);
  EXPECT_EQ(spc_stream_get_mode(s), SPC_STREAM_SNOWBALL);
  EXPECT_EQ(spc_stream_stage_vertices(s, 5), 400);
  ASSERT_NE(spc_stream_truth(s), nullptr);

  spc_solver_config cfg;
  spc_solver_config_init(&cfg);
  spc_stream_result* r = nullptr;
  ASSERT_EQ(spc_stream_run(s, &cfg, 4, SPC_INIT_WARM, SPC_FILL_ZERO, &r), SPC_OK);
  EXPECT_EQ(spc_stream_result_num_stages(r), 5);
  EXPECT_EQ(spc_stream_result_failed_stage(r), 0);
  spc_stage_summary st;
  ASSERT_EQ(spc_stream_result_stage(r, 4, &st), SPC_OK);
  EXPECT_EQ(st.index, 5);
  EXPECT_EQ(st.num_vertices, 400);
  EXPECT_EQ(st.init_mode, SPC_INIT_WARM);
  spc_metrics m;
  ASSERT_EQ(spc_metrics_compute(spc_stream_truth(s), spc_stream_result_partition(r, 4), &m),
            SPC_OK);
  EXPECT_EQ(m.pm, 1.0);
  EXPECT_EQ(spc_stream_result_stage(r, 5, &st), SPC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spc_stream_result_partition(r, 5), nullptr);
  spc_stream_result_free(r);
  spc_stream_free(s);
  fs::remove_all(d);
}

TEST(CApi, InvalidSbmSpec) {
  spc_sbm_spec spec{100, 2, 0.1, 0.2, 1, SPC_LAYOUT_INTERLEAVED};
  spc_graph* g = nullptr;
  spc_partition* t = nullptr;
  EXPECT_EQ(spc_sbm_generate(&spec, &g, &t), SPC_ERR_DOMAIN);
  EXPECT_EQ(g, nullptr);
  EXPECT_EQ(t, nullptr);
}
