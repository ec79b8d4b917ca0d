#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spectral/lobpcg.hpp"
#include "spectral/partition.hpp"
#include "spectral/streaming.hpp"

namespace spectral {

// `vertex<TAB>block` lines, both 1-based. Every vertex in [1, n] must appear
// exactly once; n defaults to the largest vertex seen. Block ids are
// compacted to 0..k-1 preserving their order.
Partition read_partition(std::istream& in, std::optional<Index> num_vertices = std::nullopt);
Partition read_partition_file(const std::string& path,
                              std::optional<Index> num_vertices = std::nullopt);
void write_partition(std::ostream& out, const Partition& p);

// JSON: {"rows", "cols", "eigenvalues", "residual_norms", "iterations",
// "vectors" (row-major)}.
void write_eigenstate(std::ostream& out, const EigenState& s);
EigenState read_eigenstate(std::istream& in);

// Stream manifest (JSON):
//   {"mode": "emerging" | "snowball",
//    "base": 1,
//    "cumulative": false,
//    "initial_vertices": N0,
//    "initial": "initial.tsv",           optional edge file
//    "truth": "truth.tsv",               optional
//    "stages": [{"file": "stage_01.tsv", "n_after": N1}, ...]}
// Relative paths resolve against the manifest's directory. With
// "cumulative": true each stage file holds the whole graph so far and is
// converted to a delta on load.
struct StreamManifest {
  StreamMode mode = StreamMode::emerging;
  int base = 1;
  bool cumulative = false;
  Index initial_vertices = 0;
  std::string initial_file;
  std::string truth_file;
  struct Entry {
    std::string file;
    Index n_after = 0;
  };
  std::vector<Entry> stages;
};

StreamManifest read_manifest_file(const std::string& path);
void write_manifest(std::ostream& out, const StreamManifest& m);

struct LoadedStream {
  StreamManifest manifest;
  SparseGraph initial;
  std::vector<StreamStage> stages;
  std::optional<Partition> truth;  // over the final vertex count
};

// Reads the manifest and every file it names, and validates the stream.
LoadedStream load_stream(const std::string& manifest_path);

}  // namespace spectral
