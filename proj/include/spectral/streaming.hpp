#pragma once

#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectral/graph.hpp"
#include "spectral/lobpcg.hpp"
#include "spectral/partition.hpp"

namespace spectral {

enum class StreamMode { emerging, snowball };
enum class InitMode { random, warm };
enum class FillMode { zero, random };

const char* to_string(StreamMode m) noexcept;
const char* to_string(InitMode m) noexcept;
const char* to_string(FillMode m) noexcept;

// One increment of a stream: the new edges and the vertex count after them.
struct StreamStage {
  Index index = 0;  // 1-based
  StreamMode mode = StreamMode::emerging;
  EdgeList edge_delta;
  Index n_after = 0;
};

struct StageResult {
  Index index = 0;
  Partition partition;
  EigenState eigenstate;
  GapResult gap;
  int iterations = 0;
  double wall_time = 0.0;
  InitMode init_mode = InitMode::random;
};

struct StreamConfig {
  SolverConfig solver;
  InitMode init = InitMode::warm;
  FillMode fill = FillMode::zero;
  // Cluster count of the final graph; fixes l for every stage when given.
  std::optional<Index> k_expected;
  GapOptions gap;
  std::function<void(const StageResult&)> on_stage;
};

// A stage failed. Holds the results of the stages before it.
class StageError : public Error {
 public:
  StageError(Index stage, const std::string& what, std::exception_ptr cause,
             std::vector<StageResult> completed)
      : Error("stage " + std::to_string(stage) + ": " + what),
        stage_(stage),
        cause_(std::move(cause)),
        completed_(std::move(completed)) {}
  Index stage() const noexcept { return stage_; }
  // The error raised inside the stage.
  const std::exception_ptr& cause() const noexcept { return cause_; }
  const std::vector<StageResult>& completed() const noexcept { return completed_; }

 private:
  Index stage_;
  std::exception_ptr cause_;
  std::vector<StageResult> completed_;
};

// Previous eigenvectors in the top rows; new rows zero or seeded Gaussian.
MultiVector warm_start(const EigenState& prev, Index n_new, FillMode fill, std::uint64_t seed);

// Checks consecutive indices, the vertex-count rule of each mode and that
// every delta edge lies inside its stage. Throws DomainError.
void validate_stream(const SparseGraph& initial, std::span<const StreamStage> stages);

// Seed used for the random parts of stage `stage`.
std::uint64_t stage_seed(std::uint64_t seed, Index stage);

std::vector<StageResult> partition_stream(const SparseGraph& initial,
                                          std::span<const StreamStage> stages,
                                          const StreamConfig& cfg);

}  // namespace spectral
