// spectral-cli: static and streaming spectral partitioning, SBM generation and
// partition evaluation. Links only against the C API in spectral/spectral.h.

#include <spectral/spectral.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kInput = 2, kSolver = 3, kUnreliable = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_for(spc_status s) {
  switch (s) {
    case SPC_OK: return kOk;
    case SPC_ERR_INVALID_ARGUMENT:
    case SPC_ERR_IO:
    case SPC_ERR_PARSE:
    case SPC_ERR_DOMAIN: return kInput;
    default: return kSolver;
  }
}

void check(spc_status s, const std::string& what) {
  if (s != SPC_OK) throw Failure{exit_for(s), what + ": " + spc_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Graph = std::unique_ptr<spc_graph, Deleter<spc_graph, spc_graph_free>>;
using Part = std::unique_ptr<spc_partition, Deleter<spc_partition, spc_partition_free>>;
using State = std::unique_ptr<spc_eigenstate, Deleter<spc_eigenstate, spc_eigenstate_free>>;
using StaticRes =
    std::unique_ptr<spc_static_result, Deleter<spc_static_result, spc_static_result_free>>;
using Stream = std::unique_ptr<spc_stream, Deleter<spc_stream, spc_stream_free>>;
using StreamRes =
    std::unique_ptr<spc_stream_result, Deleter<spc_stream_result, spc_stream_result_free>>;

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled) {}
  json lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return enabled_ ? json(s) : json(nullptr);
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Options {
  std::string graph, manifest, truth, labels, out = "out", state_in, state_out;
  int64_t k = 0;
  int64_t block_size = 0;
  double tol = 1e-4;
  int32_t max_iter = 20;
  double alpha = 3.0;
  uint64_t seed = 1;
  std::string init = "warm";
  std::string fill = "zero";
  bool compare = false;
  bool deterministic = false;
  int64_t num_vertices = 0;
  // gen
  int64_t n = 1000;
  int64_t gen_k = 8;
  double p_in = 0.15, p_out = 0.005;
  std::string stream = "none";
  int64_t stages = 10;
  std::string layout = "interleaved";
};

spc_solver_config solver_config(const Options& o) {
  spc_solver_config c;
  spc_solver_config_init(&c);
  if (o.block_size > 0) c.block_size = o.block_size;
  c.tol = o.tol;
  c.max_iter = o.max_iter;
  c.alpha = o.alpha;
  c.seed = o.seed;
  c.deterministic = o.deterministic ? 1 : 0;
  return c;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const spc_partition* truth, const spc_partition* found) {
  spc_metrics m;
  check(spc_metrics_compute(truth, found, &m), "metrics");
  json j;
  j["PM"] = m.pm;
  j["PR"] = m.pr_defined ? json(m.pr) : json(nullptr);
  j["PP"] = m.pp_defined ? json(m.pp) : json(nullptr);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Failure{kInput, "cannot write " + path.string()};
}

Part load_truth(const std::string& path, int64_t n) {
  spc_partition* p = nullptr;
  check(spc_partition_load(path.c_str(), n, &p), "truth " + path);
  Part truth(p);
  if (spc_partition_size(p) != n) {
    throw Failure{kInput, "truth " + path + " covers " + std::to_string(spc_partition_size(p)) +
                              " vertices, the graph has " + std::to_string(n)};
  }
  return truth;
}

// ---------------------------------------------------------------- static

int run_static(const Options& o) {
  Stopwatch clock(!o.deterministic);
  spc_graph* gp = nullptr;
  check(spc_graph_load(o.graph.c_str(), 1, o.num_vertices, &gp), "graph " + o.graph);
  Graph g(gp);
  const int64_t n = spc_graph_num_vertices(gp);
  Part truth;
  if (!o.truth.empty()) truth = load_truth(o.truth, n);
  State warm;
  if (!o.state_in.empty()) {
    spc_eigenstate* s = nullptr;
    check(spc_eigenstate_load(o.state_in.c_str(), &s), "state " + o.state_in);
    warm.reset(s);
  }
  const json load_seconds = clock.lap();

  const spc_solver_config cfg = solver_config(o);
  spc_static_result* rp = nullptr;
  check(spc_partition_static(gp, &cfg, o.k, warm.get(), &rp), "partition");
  StaticRes res(rp);
  clock.lap();
  spc_static_summary sum;
  spc_static_result_summary(rp, &sum);
  const spc_partition* found = spc_static_result_partition(rp);
  const spc_eigenstate* state = spc_static_result_eigenstate(rp);

  json report;
  report["command"] = "static";
  report["n"] = n;
  report["k_found"] = sum.k_found;
  report["k_gap"] = sum.k_gap;
  const int64_t l = spc_eigenstate_cols(state);
  std::vector<double> ev(spc_eigenstate_eigenvalues(state), spc_eigenstate_eigenvalues(state) + l);
  std::vector<double> rn(spc_eigenstate_residual_norms(state),
                         spc_eigenstate_residual_norms(state) + l);
  report["eigenvalues"] = ev;
  report["residual_norms"] = rn;
  report["gap_confidence"] = number_or_null(sum.gap_confidence);
  report["gap_reliable"] = sum.gap_reliable != 0;
  report["iterations"] = sum.iterations;
  report["block_size"] = sum.block_size;
  report["zero_rows"] = sum.num_zero_rows;
  json metrics = nullptr;
  if (truth) metrics = metrics_json(truth.get(), found);
  const json metrics_seconds = truth ? clock.lap() : json(nullptr);
  if (truth) {
    report["PM"] = metrics["PM"];
    report["PR"] = metrics["PR"];
    report["PP"] = metrics["PP"];
  }
  json seconds;
  seconds["load"] = load_seconds;
  seconds["solve"] = o.deterministic ? json(nullptr) : json(sum.solve_seconds);
  seconds["assign"] = o.deterministic ? json(nullptr) : json(sum.assign_seconds);
  seconds["metrics"] = metrics_seconds;
  report["seconds"] = seconds;

  const fs::path dir(o.out);
  fs::create_directories(dir);
  check(spc_partition_write(found, (dir / "labels.tsv").string().c_str()), "labels");
  if (!o.state_out.empty()) check(spc_eigenstate_save(state, o.state_out.c_str()), "state");
  write_text(dir / "report.json", report.dump(2) + "\n");
  std::cout << report.dump() << "\n";
  return sum.gap_reliable ? kOk : kUnreliable;
}

// ---------------------------------------------------------------- stream

struct Run {
  std::string tag;
  StreamRes result;
  spc_status status;
};

int run_stream(const Options& o) {
  spc_stream* sp = nullptr;
  check(spc_stream_load(o.manifest.c_str(), &sp), "manifest " + o.manifest);
  Stream stream(sp);
  const int64_t stages = spc_stream_num_stages(sp);
  const int64_t n_final = spc_stream_stage_vertices(sp, stages);
  Part own_truth;
  const spc_partition* truth = spc_stream_truth(sp);
  if (!o.truth.empty()) {
    own_truth = load_truth(o.truth, n_final);
    truth = own_truth.get();
  }
  const spc_fill_mode fill = o.fill == "random" ? SPC_FILL_RANDOM : SPC_FILL_ZERO;
  const spc_solver_config cfg = solver_config(o);

  std::vector<spc_init_mode> modes;
  if (o.compare) {
    modes = {SPC_INIT_RANDOM, SPC_INIT_WARM};
  } else {
    modes = {o.init == "random" ? SPC_INIT_RANDOM : SPC_INIT_WARM};
  }
  std::vector<Run> runs;
  for (spc_init_mode m : modes) {
    spc_stream_result* rp = nullptr;
    const spc_status st = spc_stream_run(sp, &cfg, o.k, m, fill, &rp);
    if (rp == nullptr) check(st, "stream");
    runs.push_back({m == SPC_INIT_WARM ? "W" : "R", StreamRes(rp), st});
  }

  std::string lines;
  for (int64_t i = 0; i < stages; ++i) {
    for (const Run& run : runs) {
      if (i >= spc_stream_result_num_stages(run.result.get())) continue;
      spc_stage_summary s;
      check(spc_stream_result_stage(run.result.get(), i, &s), "stage");
      json rec;
      rec["stage"] = s.index;
      rec["init_mode"] = run.tag;
      rec["n"] = s.num_vertices;
      rec["seconds"] = o.deterministic ? json(nullptr) : json(s.seconds);
      rec["k_found"] = s.k_found;
      rec["k_gap"] = s.k_gap;
      rec["gap_confidence"] = number_or_null(s.gap_confidence);
      rec["gap_reliable"] = s.gap_reliable != 0;
      rec["iterations"] = s.iterations;
      if (truth != nullptr) {
        spc_partition* prefix = nullptr;
        check(spc_partition_prefix(truth, s.num_vertices, &prefix), "truth prefix");
        Part tp(prefix);
        const json m = metrics_json(tp.get(), spc_stream_result_partition(run.result.get(), i));
        rec["PM"] = m["PM"];
        rec["PR"] = m["PR"];
        rec["PP"] = m["PP"];
      }
      lines += rec.dump() + "\n";
    }
  }
  int code = kOk;
  for (const Run& run : runs) {
    if (run.status != SPC_OK) {
      std::cerr << "spectral-cli: stream " << run.tag << " failed at stage "
                << spc_stream_result_failed_stage(run.result.get()) << ": "
                << spc_stream_result_error(run.result.get()) << "\n";
      code = kSolver;
    }
  }
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "records.jsonl", lines);
  std::cout << lines;
  return code;
}

// ------------------------------------------------------------------- gen

int run_gen(const Options& o) {
  spc_sbm_spec spec;
  spec.n = o.n;
  spec.k = o.gen_k;
  spec.p_in = o.p_in;
  spec.p_out = o.p_out;
  spec.seed = o.seed;
  spec.layout = o.layout == "contiguous" ? SPC_LAYOUT_CONTIGUOUS
                : o.layout == "shuffled" ? SPC_LAYOUT_SHUFFLED
                                         : SPC_LAYOUT_INTERLEAVED;
  const bool streamed = o.stream != "none";
  const spc_stream_mode mode = o.stream == "snowball" ? SPC_STREAM_SNOWBALL : SPC_STREAM_EMERGING;
  check(spc_sbm_write_dataset(&spec, mode, streamed ? o.stages : 0, o.out.c_str()), "gen");
  json j;
  j["command"] = "gen";
  j["n"] = o.n;
  j["k"] = o.gen_k;
  j["p_in"] = o.p_in;
  j["p_out"] = o.p_out;
  j["seed"] = o.seed;
  j["layout"] = o.layout;
  j["stream"] = o.stream;
  j["stages"] = streamed ? json(o.stages) : json(nullptr);
  std::cout << j.dump() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ eval

int run_eval(const Options& o) {
  spc_partition* fp = nullptr;
  check(spc_partition_load(o.labels.c_str(), o.num_vertices, &fp), "labels " + o.labels);
  Part found(fp);
  Part truth = load_truth(o.truth, spc_partition_size(fp));
  json j = metrics_json(truth.get(), found.get());
  j["n"] = spc_partition_size(fp);
  j["k_true"] = spc_partition_num_blocks(truth.get());
  j["k_found"] = spc_partition_num_blocks(fp);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "metrics.json", j.dump(2) + "\n");
  std::cout << j.dump() << "\n";
  return kOk;
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k, "Expected cluster count; sets the block size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--block-size", o.block_size, "Eigenvectors to compute when --k is absent")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "Relative residual tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "LOBPCG iteration cap")->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  cmd->add_option("--alpha", o.alpha, "Gap confidence threshold")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--deterministic", o.deterministic,
                "Fixed reduction order and no timings in outputs");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Spectral graph partitioning with LOBPCG"};
  app.require_subcommand(1);
  app.set_version_flag("--version", spc_version());

  auto* st = app.add_subcommand("static", "Partition a single graph");
  st->add_option("--graph", o.graph, "Edge list (1-based TSV)")->required();
  st->add_option("--truth", o.truth, "Truth partition for PM/PR/PP");
  st->add_option("--num-vertices", o.num_vertices, "Vertex count override");
  st->add_option("--state-in", o.state_in, "Eigen state to warm-start from");
  st->add_option("--state-out", o.state_out, "Write the final eigen state here");
  st->add_option("--out", o.out, "Output directory")->capture_default_str();
  add_solver_flags(st, o);

  auto* sm = app.add_subcommand("stream", "Partition a graph stream stage by stage");
  sm->add_option("--manifest", o.manifest, "Stream manifest (JSON)")->required();
  sm->add_option("--truth", o.truth, "Truth partition for the final graph");
  sm->add_option("--init", o.init, "Initialization for stages after the first")
      ->check(CLI::IsMember({"random", "warm"}))->capture_default_str();
  sm->add_option("--fill", o.fill, "Fill for rows of new vertices")
      ->check(CLI::IsMember({"zero", "random"}))->capture_default_str();
  sm->add_flag("--compare", o.compare, "Run random and warm starts and pair the records");
  sm->add_option("--out", o.out, "Output directory")->capture_default_str();
  add_solver_flags(sm, o);

  auto* gen = app.add_subcommand("gen", "Generate an SBM graph or stream");
  gen->add_option("--n", o.n, "Vertices")->capture_default_str();
  gen->add_option("--k", o.gen_k, "Blocks")->capture_default_str();
  gen->add_option("--p-in", o.p_in, "Intra-block edge probability")->capture_default_str();
  gen->add_option("--p-out", o.p_out, "Inter-block edge probability")->capture_default_str();
  gen->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  gen->add_option("--stream", o.stream, "Also write a stream")
      ->check(CLI::IsMember({"none", "emerging", "snowball"}))->capture_default_str();
  gen->add_option("--stages", o.stages, "Stream stages")->capture_default_str();
  gen->add_option("--layout", o.layout, "Block layout over vertex ids")
      ->check(CLI::IsMember({"interleaved", "contiguous", "shuffled"}))->capture_default_str();
  gen->add_option("--out", o.out, "Output directory")->capture_default_str();
  gen->add_flag("--deterministic", o.deterministic, "Accepted for uniformity; output is seeded");

  auto* ev = app.add_subcommand("eval", "Compare a partition with the truth");
  ev->add_option("--truth", o.truth, "Truth partition")->required();
  ev->add_option("--labels", o.labels, "Found partition")->required();
  ev->add_option("--num-vertices", o.num_vertices, "Vertex count override");
  ev->add_option("--out", o.out, "Output directory")->capture_default_str();
  ev->add_flag("--deterministic", o.deterministic, "Accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (st->parsed()) return run_static(o);
    if (sm->parsed()) return run_stream(o);
    if (gen->parsed()) return run_gen(o);
    return run_eval(o);
  } catch (const Failure& f) {
    std::cerr << "spectral-cli: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "spectral-cli: " << e.what() << "\n";
    return kSolver;
  }
}
