/*
 * C interface to the spectral partitioning library.
 *
 * All objects are opaque handles created by the library and released with the
 * matching *_free function. Functions returning spc_status report failures
 * through the code and leave a message retrievable with spc_last_error() on
 * the calling thread. Pointers returned by accessors are borrowed and stay
 * valid until the owning handle is freed.
 */
#ifndef SPECTRAL_SPECTRAL_H
#define SPECTRAL_SPECTRAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPC_BUILDING_LIBRARY)
#    define SPC_API __declspec(dllexport)
#  else
#    define SPC_API __declspec(dllimport)
#  endif
#else
#  define SPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spc_status {
  SPC_OK = 0,
  SPC_ERR_INVALID_ARGUMENT = 1, /* null handle, bad enum, contract violation */
  SPC_ERR_IO = 2,
  SPC_ERR_PARSE = 3,
  SPC_ERR_DOMAIN = 4,
  SPC_ERR_SOLVER = 5,
  SPC_ERR_ASSIGNMENT = 6,
  SPC_ERR_UNDEFINED_METRIC = 7,
  SPC_ERR_INTERNAL = 8
} spc_status;

typedef enum spc_stream_mode { SPC_STREAM_EMERGING = 0, SPC_STREAM_SNOWBALL = 1 } spc_stream_mode;
typedef enum spc_init_mode { SPC_INIT_RANDOM = 0, SPC_INIT_WARM = 1 } spc_init_mode;
typedef enum spc_fill_mode { SPC_FILL_ZERO = 0, SPC_FILL_RANDOM = 1 } spc_fill_mode;
typedef enum spc_sbm_layout {
  SPC_LAYOUT_INTERLEAVED = 0,
  SPC_LAYOUT_CONTIGUOUS = 1,
  SPC_LAYOUT_SHUFFLED = 2
} spc_sbm_layout;

typedef struct spc_graph spc_graph;
typedef struct spc_partition spc_partition;
typedef struct spc_eigenstate spc_eigenstate;
typedef struct spc_static_result spc_static_result;
typedef struct spc_stream spc_stream;
typedef struct spc_stream_result spc_stream_result;

/* Message for the last failed call on this thread; empty if none. */
SPC_API const char* spc_last_error(void);
SPC_API const char* spc_status_string(spc_status status);
SPC_API const char* spc_version(void);

/* ------------------------------------------------------------------ config */

typedef struct spc_solver_config {
  int64_t block_size;   /* l; ignored when k_expected is passed */
  double tol;           /* relative residual threshold */
  int32_t max_iter;
  uint64_t seed;
  double soft_lock_tol;
  int32_t deterministic;
  double alpha;         /* gap threshold */
  int64_t k_min;
} spc_solver_config;

/* block_size 8, tol 1e-4, max_iter 20, seed 1, soft_lock_tol 1e-5,
 * deterministic 0, alpha 3.0, k_min 2. */
SPC_API void spc_solver_config_init(spc_solver_config* cfg);

/* ------------------------------------------------------------------- graph */

/* Edge list file, `base` 0 or 1. num_vertices <= 0 takes the largest index. */
SPC_API spc_status spc_graph_load(const char* path, int base, int64_t num_vertices,
                                  spc_graph** out);
/* Directed edges, 0-based; weights may be NULL for unit weights. */
SPC_API spc_status spc_graph_from_edges(int64_t num_vertices, size_t num_edges,
                                        const int64_t* src, const int64_t* dst,
                                        const double* weights, spc_graph** out);
SPC_API spc_status spc_graph_write(const spc_graph* g, const char* path);
SPC_API void spc_graph_free(spc_graph* g);
SPC_API int64_t spc_graph_num_vertices(const spc_graph* g);
SPC_API int64_t spc_graph_num_entries(const spc_graph* g);
/* y = L x for a row-major n x cols block. */
SPC_API spc_status spc_graph_laplacian_apply(const spc_graph* g, const double* x, int64_t cols,
                                             double* y);

/* --------------------------------------------------------------- partition */

/* `vertex<TAB>block` file, 1-based. num_vertices <= 0 takes the largest id. */
SPC_API spc_status spc_partition_load(const char* path, int64_t num_vertices,
                                      spc_partition** out);
/* Labels are arbitrary non-negative ids; they are compacted. */
SPC_API spc_status spc_partition_from_labels(int64_t n, const int64_t* labels,
                                             spc_partition** out);
SPC_API spc_status spc_partition_write(const spc_partition* p, const char* path);
/* First n vertices of p, compacted. */
SPC_API spc_status spc_partition_prefix(const spc_partition* p, int64_t n, spc_partition** out);
SPC_API void spc_partition_free(spc_partition* p);
SPC_API int64_t spc_partition_size(const spc_partition* p);
SPC_API int64_t spc_partition_num_blocks(const spc_partition* p);
SPC_API const int64_t* spc_partition_labels(const spc_partition* p);

/* ----------------------------------------------------------------- metrics */

typedef struct spc_metrics {
  double pm;
  double pr;        /* NaN when undefined */
  double pp;        /* NaN when undefined */
  int32_t pr_defined;
  int32_t pp_defined;
  uint64_t matched; /* vertices matched by the optimal block matching */
  uint64_t recall_agree, recall_total;
  uint64_t precision_agree, precision_total;
} spc_metrics;

/* Always fills PM; PR/PP carry their *_defined flags instead of failing. */
SPC_API spc_status spc_metrics_compute(const spc_partition* truth, const spc_partition* found,
                                       spc_metrics* out);

/* -------------------------------------------------------------- eigenstate */

SPC_API spc_status spc_eigenstate_load(const char* path, spc_eigenstate** out);
SPC_API spc_status spc_eigenstate_save(const spc_eigenstate* s, const char* path);
SPC_API void spc_eigenstate_free(spc_eigenstate* s);
SPC_API int64_t spc_eigenstate_rows(const spc_eigenstate* s);
SPC_API int64_t spc_eigenstate_cols(const spc_eigenstate* s);
SPC_API const double* spc_eigenstate_eigenvalues(const spc_eigenstate* s);
SPC_API const double* spc_eigenstate_residual_norms(const spc_eigenstate* s);
SPC_API int32_t spc_eigenstate_iterations(const spc_eigenstate* s);

/* ------------------------------------------------------------------ static */

typedef struct spc_static_summary {
  int64_t k_found;          /* blocks in the emitted partition */
  int64_t k_gap;            /* count chosen by gap detection */
  double gap_confidence;
  int32_t gap_reliable;
  int32_t iterations;
  int64_t block_size;
  int64_t num_zero_rows;    /* vertices with an all-zero embedding row */
  double solve_seconds;
  double assign_seconds;
} spc_static_summary;

/* k_expected <= 0 uses cfg->block_size. `warm` may be NULL; when given its
 * vectors seed the solve (rows are zero-filled up to the graph size). */
SPC_API spc_status spc_partition_static(const spc_graph* g, const spc_solver_config* cfg,
                                        int64_t k_expected, const spc_eigenstate* warm,
                                        spc_static_result** out);
SPC_API void spc_static_result_free(spc_static_result* r);
SPC_API void spc_static_result_summary(const spc_static_result* r, spc_static_summary* out);
SPC_API const spc_partition* spc_static_result_partition(const spc_static_result* r);
SPC_API const spc_eigenstate* spc_static_result_eigenstate(const spc_static_result* r);

/* ------------------------------------------------------------------ stream */

/* Reads and validates a stream manifest and the files it names. */
SPC_API spc_status spc_stream_load(const char* manifest_path, spc_stream** out);
SPC_API void spc_stream_free(spc_stream* s);
SPC_API int64_t spc_stream_num_stages(const spc_stream* s);
SPC_API spc_stream_mode spc_stream_get_mode(const spc_stream* s);
SPC_API int64_t spc_stream_stage_vertices(const spc_stream* s, int64_t stage);
/* Truth named by the manifest, or NULL. */
SPC_API const spc_partition* spc_stream_truth(const spc_stream* s);

/* Runs every stage. On a stage failure the returned status is the failure's
 * code and *out still holds the completed stages. */
SPC_API spc_status spc_stream_run(const spc_stream* s, const spc_solver_config* cfg,
                                  int64_t k_expected, spc_init_mode init, spc_fill_mode fill,
                                  spc_stream_result** out);
SPC_API void spc_stream_result_free(spc_stream_result* r);
SPC_API int64_t spc_stream_result_num_stages(const spc_stream_result* r);
/* 1-based index of the failed stage, 0 if the run completed. */
SPC_API int64_t spc_stream_result_failed_stage(const spc_stream_result* r);
SPC_API const char* spc_stream_result_error(const spc_stream_result* r);

typedef struct spc_stage_summary {
  int64_t index;
  int64_t num_vertices;
  int64_t k_found;
  int64_t k_gap;
  double gap_confidence;
  int32_t gap_reliable;
  int32_t iterations;
  double seconds;
  spc_init_mode init_mode;
} spc_stage_summary;

/* `i` counts completed stages from 0. */
SPC_API spc_status spc_stream_result_stage(const spc_stream_result* r, int64_t i,
                                           spc_stage_summary* out);
SPC_API const spc_partition* spc_stream_result_partition(const spc_stream_result* r, int64_t i);

/* --------------------------------------------------------------------- sbm */

typedef struct spc_sbm_spec {
  int64_t n;
  int64_t k;
  double p_in;
  double p_out;
  uint64_t seed;
  spc_sbm_layout layout;
} spc_sbm_spec;

SPC_API spc_status spc_sbm_generate(const spc_sbm_spec* spec, spc_graph** graph,
                                    spc_partition** truth);

/* Writes graph.tsv and truth.tsv into out_dir. With stages >= 2 it also
 * writes stage_XX.tsv delta files and manifest.json for the given mode. */
SPC_API spc_status spc_sbm_write_dataset(const spc_sbm_spec* spec, spc_stream_mode mode,
                                         int64_t stages, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SPECTRAL_SPECTRAL_H */
