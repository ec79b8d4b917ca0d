#include "spectral/spectral.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spectral/errors.hpp"
#include "spectral/graph.hpp"
#include "spectral/io.hpp"
#include "spectral/lobpcg.hpp"
#include "spectral/metrics.hpp"
#include "spectral/partition.hpp"
#include "spectral/sbm.hpp"
#include "spectral/streaming.hpp"

namespace sp = spectral;

struct spc_graph {
  sp::SparseGraph g;
};
struct spc_partition {
  sp::Partition p;
};
struct spc_eigenstate {
  sp::EigenState s;
};
struct spc_static_result {
  spc_partition partition;
  spc_eigenstate state;
  spc_static_summary summary{};
};
struct spc_stream {
  sp::LoadedStream s;
  std::optional<spc_partition> truth;
};
struct spc_stream_result {
  std::vector<sp::StageResult> stages;
  std::vector<spc_partition> partitions;
  int64_t failed_stage = 0;
  std::string error;
};

namespace {

thread_local std::string g_last_error;

spc_status fail(spc_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Maps the in-flight exception to a status code.
spc_status classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const sp::StageError& e) {
    if (e.cause()) {
      const spc_status inner = classify(e.cause());
      g_last_error = e.what();
      return inner;
    }
    return fail(SPC_ERR_INTERNAL, e.what());
  } catch (const sp::ParseError& e) {
    return fail(SPC_ERR_PARSE, e.what());
  } catch (const sp::IoError& e) {
    return fail(SPC_ERR_IO, e.what());
  } catch (const sp::DomainError& e) {
    return fail(SPC_ERR_DOMAIN, e.what());
  } catch (const sp::ContractError& e) {
    return fail(SPC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const sp::SolverError& e) {
    return fail(SPC_ERR_SOLVER, e.what());
  } catch (const sp::ConditioningError& e) {
    return fail(SPC_ERR_SOLVER, e.what());
  } catch (const sp::AssignmentError& e) {
    return fail(SPC_ERR_ASSIGNMENT, e.what());
  } catch (const sp::UndefinedMetricError& e) {
    return fail(SPC_ERR_UNDEFINED_METRIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPC_ERR_INTERNAL, "unknown error");
  }
}

template <class F>
spc_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return SPC_OK;
  } catch (...) {
    return classify(std::current_exception());
  }
}

#define SPC_REQUIRE(cond)                                                      \
  do {                                                                         \
    if (!(cond)) return fail(SPC_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

sp::SolverConfig to_solver(const spc_solver_config& c) {
  sp::SolverConfig s;
  s.block_size = c.block_size;
  s.tol = c.tol;
  s.max_iter = c.max_iter;
  s.seed = c.seed;
  s.soft_lock_tol = c.soft_lock_tol;
  s.deterministic = c.deterministic != 0;
  return s;
}

sp::GapOptions to_gap(const spc_solver_config& c) {
  sp::GapOptions g;
  g.alpha = c.alpha;
  g.k_min = c.k_min;
  return g;
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sp::IoError(std::string("cannot write ") + path);
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw sp::IoError("failed writing " + path);
}

}  // namespace

extern "C" {

const char* spc_last_error(void) { return g_last_error.c_str(); }

const char* spc_status_string(spc_status status) {
  switch (status) {
    case SPC_OK: return "ok";
    case SPC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPC_ERR_IO: return "i/o error";
    case SPC_ERR_PARSE: return "parse error";
    case SPC_ERR_DOMAIN: return "domain error";
    case SPC_ERR_SOLVER: return "solver error";
    case SPC_ERR_ASSIGNMENT: return "assignment error";
    case SPC_ERR_UNDEFINED_METRIC: return "undefined metric";
    case SPC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* spc_version(void) { return "1.0.0"; }

void spc_solver_config_init(spc_solver_config* cfg) {
  if (cfg == nullptr) return;
  const sp::SolverConfig d;
  const sp::GapOptions g;
  cfg->block_size = d.block_size;
  cfg->tol = d.tol;
  cfg->max_iter = d.max_iter;
  cfg->seed = d.seed;
  cfg->soft_lock_tol = d.soft_lock_tol;
  cfg->deterministic = d.deterministic ? 1 : 0;
  cfg->alpha = g.alpha;
  cfg->k_min = g.k_min;
}

// ----------------------------------------------------------------- graph

spc_status spc_graph_load(const char* path, int base, int64_t num_vertices, spc_graph** out) {
  SPC_REQUIRE(path != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    std::optional<sp::Index> n;
    if (num_vertices > 0) n = num_vertices;
    *out = new spc_graph{sp::load_edge_list_file(path, base, n)};
  });
}

spc_status spc_graph_from_edges(int64_t num_vertices, size_t num_edges, const int64_t* src,
                                const int64_t* dst, const double* weights, spc_graph** out) {
  SPC_REQUIRE(out != nullptr);
  SPC_REQUIRE(num_edges == 0 || (src != nullptr && dst != nullptr));
  *out = nullptr;
  return guarded([&] {
    sp::EdgeList edges(num_edges);
    for (size_t i = 0; i < num_edges; ++i) {
      edges[i] = {src[i], dst[i], weights != nullptr ? weights[i] : 1.0};
    }
    *out = new spc_graph{sp::SparseGraph::from_edges(num_vertices, edges, false)};
  });
}

spc_status spc_graph_write(const spc_graph* g, const char* path) {
  SPC_REQUIRE(g != nullptr && path != nullptr);
  return guarded([&] {
    auto out = open_out(path);
    sp::write_edge_list(out, g->g.edges(), 1);
    close_out(out, path);
  });
}

void spc_graph_free(spc_graph* g) { delete g; }

int64_t spc_graph_num_vertices(const spc_graph* g) { return g ? g->g.num_vertices() : 0; }
int64_t spc_graph_num_entries(const spc_graph* g) { return g ? g->g.num_entries() : 0; }

spc_status spc_graph_laplacian_apply(const spc_graph* g, const double* x, int64_t cols, double* y) {
  SPC_REQUIRE(g != nullptr && x != nullptr && y != nullptr && cols >= 1);
  return guarded([&] {
    const sp::Index n = g->g.num_vertices();
    Eigen::Map<const sp::MultiVector> xm(x, n, cols);
    Eigen::Map<sp::MultiVector> ym(y, n, cols);
    const sp::LaplacianOperator op(g->g);
    op.apply(xm, ym);
  });
}

// ------------------------------------------------------------- partition

spc_status spc_partition_load(const char* path, int64_t num_vertices, spc_partition** out) {
  SPC_REQUIRE(path != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    std::optional<sp::Index> n;
    if (num_vertices > 0) n = num_vertices;
    *out = new spc_partition{sp::read_partition_file(path, n)};
  });
}

spc_status spc_partition_from_labels(int64_t n, const int64_t* labels, spc_partition** out) {
  SPC_REQUIRE(out != nullptr && n >= 0 && (n == 0 || labels != nullptr));
  *out = nullptr;
  return guarded([&] {
    *out = new spc_partition{sp::Partition::compact(std::span<const sp::Index>(labels, n))};
  });
}

spc_status spc_partition_write(const spc_partition* p, const char* path) {
  SPC_REQUIRE(p != nullptr && path != nullptr);
  return guarded([&] {
    auto out = open_out(path);
    sp::write_partition(out, p->p);
    close_out(out, path);
  });
}

spc_status spc_partition_prefix(const spc_partition* p, int64_t n, spc_partition** out) {
  SPC_REQUIRE(p != nullptr && out != nullptr && n >= 0 && n <= p->p.size());
  *out = nullptr;
  return guarded([&] {
    *out = new spc_partition{
        sp::Partition::compact(std::span<const sp::Index>(p->p.labels.data(), n))};
  });
}

void spc_partition_free(spc_partition* p) { delete p; }
int64_t spc_partition_size(const spc_partition* p) { return p ? p->p.size() : 0; }
int64_t spc_partition_num_blocks(const spc_partition* p) { return p ? p->p.k : 0; }
const int64_t* spc_partition_labels(const spc_partition* p) {
  return p ? p->p.labels.data() : nullptr;
}

// --------------------------------------------------------------- metrics

spc_status spc_metrics_compute(const spc_partition* truth, const spc_partition* found,
                               spc_metrics* out) {
  SPC_REQUIRE(truth != nullptr && found != nullptr && out != nullptr);
  return guarded([&] {
    const sp::ContingencyTable t = sp::contingency(truth->p, found->p);
    spc_metrics m{};
    m.matched = sp::matched_vertices(t);
    m.pm = sp::partition_match(t);
    m.pr = m.pp = std::numeric_limits<double>::quiet_NaN();
    try {
      const sp::PairRatio r = sp::pairwise_recall_ratio(t);
      m.pr = r.value();
      m.pr_defined = 1;
      m.recall_agree = r.agree;
      m.recall_total = r.total;
    } catch (const sp::UndefinedMetricError&) {
    }
    try {
      const sp::PairRatio r = sp::pairwise_precision_ratio(t);
      m.pp = r.value();
      m.pp_defined = 1;
      m.precision_agree = r.agree;
      m.precision_total = r.total;
    } catch (const sp::UndefinedMetricError&) {
    }
    *out = m;
  });
}

// ------------------------------------------------------------ eigenstate

spc_status spc_eigenstate_load(const char* path, spc_eigenstate** out) {
  SPC_REQUIRE(path != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw sp::IoError(std::string("cannot open ") + path);
    *out = new spc_eigenstate{sp::read_eigenstate(in)};
  });
}

spc_status spc_eigenstate_save(const spc_eigenstate* s, const char* path) {
  SPC_REQUIRE(s != nullptr && path != nullptr);
  return guarded([&] {
    auto out = open_out(path);
    sp::write_eigenstate(out, s->s);
    close_out(out, path);
  });
}

void spc_eigenstate_free(spc_eigenstate* s) { delete s; }
int64_t spc_eigenstate_rows(const spc_eigenstate* s) { return s ? s->s.rows() : 0; }
int64_t spc_eigenstate_cols(const spc_eigenstate* s) { return s ? s->s.cols() : 0; }
const double* spc_eigenstate_eigenvalues(const spc_eigenstate* s) {
  return s ? s->s.eigenvalues.data() : nullptr;
}
const double* spc_eigenstate_residual_norms(const spc_eigenstate* s) {
  return s ? s->s.residual_norms.data() : nullptr;
}
int32_t spc_eigenstate_iterations(const spc_eigenstate* s) { return s ? s->s.iterations : 0; }

// ---------------------------------------------------------------- static

spc_status spc_partition_static(const spc_graph* g, const spc_solver_config* cfg,
                                int64_t k_expected, const spc_eigenstate* warm,
                                spc_static_result** out) {
  SPC_REQUIRE(g != nullptr && cfg != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    sp::SolverConfig solver = to_solver(*cfg);
    std::optional<sp::Index> k;
    if (k_expected > 0) k = k_expected;
    std::optional<sp::MultiVector> init;
    if (warm != nullptr) {
      const sp::Index l = k ? sp::block_size_for(*k) : warm->s.cols();
      if (warm->s.cols() != std::min(l, g->g.num_vertices())) {
        throw sp::ContractError("warm state has " + std::to_string(warm->s.cols()) +
                                " columns, the solve needs " + std::to_string(l));
      }
      solver.block_size = warm->s.cols();
      init = sp::warm_start(warm->s, g->g.num_vertices(), sp::FillMode::zero, solver.seed);
    }
    sp::StaticResult r =
        sp::partition_static(g->g, solver, k, to_gap(*cfg), init ? &*init : nullptr);
    auto* res = new spc_static_result;
    res->summary.k_found = r.partition.k;
    res->summary.k_gap = r.gap.k;
    res->summary.gap_confidence = r.gap.confidence;
    res->summary.gap_reliable = r.gap.reliable ? 1 : 0;
    res->summary.iterations = r.eigenstate.iterations;
    res->summary.block_size = r.eigenstate.cols();
    res->summary.num_zero_rows = static_cast<int64_t>(r.zero_rows.size());
    res->summary.solve_seconds = r.timings.solve_seconds;
    res->summary.assign_seconds = r.timings.assign_seconds;
    res->partition.p = std::move(r.partition);
    res->state.s = std::move(r.eigenstate);
    *out = res;
  });
}

void spc_static_result_free(spc_static_result* r) { delete r; }

void spc_static_result_summary(const spc_static_result* r, spc_static_summary* out) {
  if (r != nullptr && out != nullptr) *out = r->summary;
}

const spc_partition* spc_static_result_partition(const spc_static_result* r) {
  return r ? &r->partition : nullptr;
}

const spc_eigenstate* spc_static_result_eigenstate(const spc_static_result* r) {
  return r ? &r->state : nullptr;
}

// ---------------------------------------------------------------- stream

spc_status spc_stream_load(const char* manifest_path, spc_stream** out) {
  SPC_REQUIRE(manifest_path != nullptr && out != nullptr);
  *out = nullptr;
  return guarded([&] {
    auto* s = new spc_stream{sp::load_stream(manifest_path), std::nullopt};
    if (s->s.truth) s->truth = spc_partition{*s->s.truth};
    *out = s;
  });
}

void spc_stream_free(spc_stream* s) { delete s; }

int64_t spc_stream_num_stages(const spc_stream* s) {
  return s ? static_cast<int64_t>(s->s.stages.size()) : 0;
}

spc_stream_mode spc_stream_get_mode(const spc_stream* s) {
  return s && s->s.manifest.mode == sp::StreamMode::snowball ? SPC_STREAM_SNOWBALL
                                                              : SPC_STREAM_EMERGING;
}

int64_t spc_stream_stage_vertices(const spc_stream* s, int64_t stage) {
  if (s == nullptr || stage < 1 || stage > static_cast<int64_t>(s->s.stages.size())) return -1;
  return s->s.stages[stage - 1].n_after;
}

const spc_partition* spc_stream_truth(const spc_stream* s) {
  return s && s->truth ? &*s->truth : nullptr;
}

spc_status spc_stream_run(const spc_stream* s, const spc_solver_config* cfg, int64_t k_expected,
                          spc_init_mode init, spc_fill_mode fill, spc_stream_result** out) {
  SPC_REQUIRE(s != nullptr && cfg != nullptr && out != nullptr);
  SPC_REQUIRE(init == SPC_INIT_RANDOM || init == SPC_INIT_WARM);
  SPC_REQUIRE(fill == SPC_FILL_ZERO || fill == SPC_FILL_RANDOM);
  *out = nullptr;
  auto* res = new spc_stream_result;
  *out = res;
  const spc_status st = guarded([&] {
    sp::StreamConfig sc;
    sc.solver = to_solver(*cfg);
    sc.gap = to_gap(*cfg);
    sc.init = init == SPC_INIT_WARM ? sp::InitMode::warm : sp::InitMode::random;
    sc.fill = fill == SPC_FILL_ZERO ? sp::FillMode::zero : sp::FillMode::random;
    if (k_expected > 0) sc.k_expected = k_expected;
    try {
      res->stages = sp::partition_stream(s->s.initial, s->s.stages, sc);
    } catch (const sp::StageError& e) {
      res->stages = e.completed();
      res->failed_stage = e.stage();
      res->error = e.what();
      throw;
    }
  });
  if (st != SPC_OK && res->error.empty()) res->error = g_last_error;
  res->partitions.reserve(res->stages.size());
  for (const auto& stage : res->stages) res->partitions.push_back(spc_partition{stage.partition});
  return st;
}

void spc_stream_result_free(spc_stream_result* r) { delete r; }

int64_t spc_stream_result_num_stages(const spc_stream_result* r) {
  return r ? static_cast<int64_t>(r->stages.size()) : 0;
}

int64_t spc_stream_result_failed_stage(const spc_stream_result* r) {
  return r ? r->failed_stage : 0;
}

const char* spc_stream_result_error(const spc_stream_result* r) {
  return r ? r->error.c_str() : "";
}

spc_status spc_stream_result_stage(const spc_stream_result* r, int64_t i, spc_stage_summary* out) {
  SPC_REQUIRE(r != nullptr && out != nullptr);
  SPC_REQUIRE(i >= 0 && i < static_cast<int64_t>(r->stages.size()));
  const sp::StageResult& s = r->stages[i];
  out->index = s.index;
  out->num_vertices = s.partition.size();
  out->k_found = s.partition.k;
  out->k_gap = s.gap.k;
  out->gap_confidence = s.gap.confidence;
  out->gap_reliable = s.gap.reliable ? 1 : 0;
  out->iterations = s.iterations;
  out->seconds = s.wall_time;
  out->init_mode = s.init_mode == sp::InitMode::warm ? SPC_INIT_WARM : SPC_INIT_RANDOM;
  return SPC_OK;
}

const spc_partition* spc_stream_result_partition(const spc_stream_result* r, int64_t i) {
  if (r == nullptr || i < 0 || i >= static_cast<int64_t>(r->partitions.size())) return nullptr;
  return &r->partitions[i];
}

// ------------------------------------------------------------------- sbm

namespace {

sp::SbmSpec to_spec(const spc_sbm_spec& s) {
  sp::SbmSpec spec;
  spec.n = s.n;
  spec.k = s.k;
  spec.p_in = s.p_in;
  spec.p_out = s.p_out;
  spec.seed = s.seed;
  switch (s.layout) {
    case SPC_LAYOUT_INTERLEAVED: spec.layout = sp::SbmLayout::interleaved; break;
    case SPC_LAYOUT_CONTIGUOUS: spec.layout = sp::SbmLayout::contiguous; break;
    case SPC_LAYOUT_SHUFFLED: spec.layout = sp::SbmLayout::shuffled; break;
    default: throw sp::ContractError("unknown SBM layout");
  }
  return spec;
}

}  // namespace

spc_status spc_sbm_generate(const spc_sbm_spec* spec, spc_graph** graph, spc_partition** truth) {
  SPC_REQUIRE(spec != nullptr && graph != nullptr && truth != nullptr);
  *graph = nullptr;
  *truth = nullptr;
  return guarded([&] {
    sp::SbmGraph g = sp::generate_sbm(to_spec(*spec));
    auto* gh = new spc_graph{std::move(g.graph)};
    *truth = new spc_partition{std::move(g.truth)};
    *graph = gh;
  });
}

spc_status spc_sbm_write_dataset(const spc_sbm_spec* spec, spc_stream_mode mode, int64_t stages,
                                 const char* out_dir) {
  SPC_REQUIRE(spec != nullptr && out_dir != nullptr);
  SPC_REQUIRE(mode == SPC_STREAM_EMERGING || mode == SPC_STREAM_SNOWBALL);
  return guarded([&] {
    namespace fs = std::filesystem;
    const sp::SbmSpec s = to_spec(*spec);
    const sp::SbmGraph full = sp::generate_sbm(s);
    std::optional<sp::SbmStream> stream;
    if (stages >= 2) {
      stream = sp::generate_stream(
          s, mode == SPC_STREAM_SNOWBALL ? sp::StreamMode::snowball : sp::StreamMode::emerging,
          stages);
    } else if (stages != 0) {
      throw sp::DomainError("a stream needs at least 2 stages");
    }
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    auto write_file = [&](const std::string& name, auto&& body) {
      const std::string path = (dir / name).string();
      auto out = open_out(path.c_str());
      body(out);
      close_out(out, path);
    };
    write_file("graph.tsv", [&](std::ostream& o) { sp::write_edge_list(o, full.graph.edges(), 1); });
    write_file("truth.tsv", [&](std::ostream& o) { sp::write_partition(o, full.truth); });
    if (!stream) return;

    sp::StreamManifest m;
    m.mode = stream->stages.front().mode;
    m.initial_vertices = stream->initial.num_vertices();
    m.truth_file = "truth.tsv";
    const int width = std::max<int>(2, static_cast<int>(std::to_string(stages).size()));
    for (const sp::StreamStage& st : stream->stages) {
      char name[64];
      std::snprintf(name, sizeof(name), "stage_%0*lld.tsv", width,
                    static_cast<long long>(st.index));
      write_file(name, [&](std::ostream& o) { sp::write_edge_list(o, st.edge_delta, 1); });
      m.stages.push_back({name, st.n_after});
    }
    write_file("manifest.json", [&](std::ostream& o) { sp::write_manifest(o, m); });
  });
}

}  // extern "C"
