#include "spectral/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "spectral/errors.hpp"

namespace spectral {

namespace fs = std::filesystem;
using nlohmann::json;

Partition read_partition(std::istream& in, std::optional<Index> num_vertices) {
  std::map<Index, Index> blocks;  // 0-based vertex -> raw block id
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    Index v = 0;
    Index b = 0;
    const char* p = line.data() + first;
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(p, end, v);
    if (r1.ec != std::errc()) throw ParseError("invalid vertex id", line_no);
    p = r1.ptr;
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    auto r2 = std::from_chars(p, end, b);
    if (r2.ec != std::errc()) throw ParseError("invalid block id", line_no);
    p = r2.ptr;
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p != end) throw ParseError("trailing characters", line_no);
    if (v < 1 || b < 1) throw ParseError("vertex and block ids are 1-based", line_no);
    if (!blocks.emplace(v - 1, b - 1).second) {
      throw ParseError("vertex " + std::to_string(v) + " listed twice", line_no);
    }
  }
  Index n = blocks.empty() ? 0 : blocks.rbegin()->first + 1;
  if (num_vertices) {
    if (*num_vertices < n) throw DomainError("partition file lists vertices beyond the graph");
    n = *num_vertices;
  }
  if (static_cast<Index>(blocks.size()) != n) {
    throw DomainError("partition file covers " + std::to_string(blocks.size()) + " of " +
                      std::to_string(n) + " vertices");
  }
  std::vector<Index> raw;
  raw.reserve(static_cast<std::size_t>(n));
  for (const auto& [v, b] : blocks) raw.push_back(b);
  return Partition::compact(raw);
}

Partition read_partition_file(const std::string& path, std::optional<Index> num_vertices) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_partition(in, num_vertices);
}

void write_partition(std::ostream& out, const Partition& p) {
  for (Index i = 0; i < p.size(); ++i) out << (i + 1) << '\t' << (p.labels[i] + 1) << '\n';
}

void write_eigenstate(std::ostream& out, const EigenState& s) {
  json j;
  j["rows"] = s.vectors.rows();
  j["cols"] = s.vectors.cols();
  j["eigenvalues"] = s.eigenvalues;
  j["residual_norms"] = s.residual_norms;
  j["iterations"] = s.iterations;
  std::vector<double> flat(s.vectors.data(), s.vectors.data() + s.vectors.size());
  j["vectors"] = std::move(flat);
  out << j.dump() << '\n';
}

EigenState read_eigenstate(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("eigen state: ") + e.what(), 0);
  }
  try {
    EigenState s;
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    s.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    s.residual_norms = j.value("residual_norms", std::vector<double>{});
    s.iterations = j.value("iterations", 0);
    const auto flat = j.at("vectors").get<std::vector<double>>();
    if (rows < 0 || cols < 1 || static_cast<Index>(flat.size()) != rows * cols ||
        static_cast<Index>(s.eigenvalues.size()) != cols) {
      throw ParseError("eigen state dimensions are inconsistent", 0);
    }
    s.vectors = Eigen::Map<const MultiVector>(flat.data(), rows, cols);
    s.converged.assign(static_cast<std::size_t>(cols), false);
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("eigen state: ") + e.what(), 0);
  }
}

StreamManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0);
  }
  try {
    StreamManifest m;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "emerging") {
      m.mode = StreamMode::emerging;
    } else if (mode == "snowball") {
      m.mode = StreamMode::snowball;
    } else {
      throw ParseError("manifest: unknown mode '" + mode + "'", 0);
    }
    m.base = j.value("base", 1);
    m.cumulative = j.value("cumulative", false);
    m.initial_vertices = j.value("initial_vertices", Index{0});
    m.initial_file = j.value("initial", std::string());
    m.truth_file = j.value("truth", std::string());
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({s.at("file").get<std::string>(), s.at("n_after").get<Index>()});
    }
    if (m.stages.empty()) throw ParseError("manifest: no stages", 0);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0);
  }
}

void write_manifest(std::ostream& out, const StreamManifest& m) {
  json j;
  j["mode"] = to_string(m.mode);
  j["base"] = m.base;
  j["cumulative"] = m.cumulative;
  j["initial_vertices"] = m.initial_vertices;
  if (!m.initial_file.empty()) j["initial"] = m.initial_file;
  if (!m.truth_file.empty()) j["truth"] = m.truth_file;
  json stages = json::array();
  for (const auto& s : m.stages) stages.push_back({{"file", s.file}, {"n_after", s.n_after}});
  j["stages"] = std::move(stages);
  out << j.dump(2) << '\n';
}

namespace {

std::string resolve(const fs::path& dir, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p.string() : (dir / p).string();
}

EdgeList read_edge_file(const std::string& path, int base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_edges(in, base);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

// cur - prev as a multiset of weighted entries; shrinking entries are errors.
EdgeList difference(const SparseGraph& prev, const SparseGraph& cur) {
  EdgeList out;
  for (Index row = 0; row < cur.num_vertices(); ++row) {
    const auto cols = cur.row_columns(row);
    const auto ws = cur.row_weights(row);
    std::span<const Index> pcols;
    std::span<const double> pws;
    if (row < prev.num_vertices()) {
      pcols = prev.row_columns(row);
      pws = prev.row_weights(row);
    }
    std::size_t q = 0;
    for (std::size_t p = 0; p < cols.size(); ++p) {
      while (q < pcols.size() && pcols[q] < cols[p]) {
        throw DomainError("cumulative stream removes edge (" + std::to_string(row + 1) + ", " +
                          std::to_string(pcols[q] + 1) + ")");
      }
      double w = ws[p];
      if (q < pcols.size() && pcols[q] == cols[p]) {
        w -= pws[q];
        ++q;
        if (w < 0.0) throw DomainError("cumulative stream lowers an edge weight");
      }
      if (w > 0.0) out.push_back({row, cols[p], w});
    }
    if (q < pcols.size()) {
      throw DomainError("cumulative stream removes edge (" + std::to_string(row + 1) + ", " +
                        std::to_string(pcols[q] + 1) + ")");
    }
  }
  return out;
}

}  // namespace

LoadedStream load_stream(const std::string& manifest_path) {
  LoadedStream out;
  out.manifest = read_manifest_file(manifest_path);
  const StreamManifest& m = out.manifest;
  const fs::path dir = fs::path(manifest_path).parent_path();

  EdgeList initial_edges;
  if (!m.initial_file.empty()) initial_edges = read_edge_file(resolve(dir, m.initial_file), m.base);
  out.initial = SparseGraph::from_edges(m.initial_vertices, initial_edges, false);

  SparseGraph running = out.initial;
  for (std::size_t s = 0; s < m.stages.size(); ++s) {
    StreamStage st;
    st.index = static_cast<Index>(s) + 1;
    st.mode = m.mode;
    st.n_after = m.stages[s].n_after;
    EdgeList edges = read_edge_file(resolve(dir, m.stages[s].file), m.base);
    if (m.cumulative) {
      const SparseGraph cur = SparseGraph::from_edges(st.n_after, edges, false);
      st.edge_delta = difference(running, cur);
      running = cur;
    } else {
      st.edge_delta = std::move(edges);
    }
    out.stages.push_back(std::move(st));
  }
  validate_stream(out.initial, out.stages);
  if (!m.truth_file.empty()) {
    const Index n = out.stages.back().n_after;
    out.truth = read_partition_file(resolve(dir, m.truth_file), n);
  }
  return out;
}

}  // namespace spectral
