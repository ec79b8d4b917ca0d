#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"
#include "spectral/graph.hpp"
#include "spectral/types.hpp"

namespace spectral {

// Per-iteration snapshot handed to SolverConfig::monitor.
struct IterationInfo {
  int iteration = 0;  // 0 is the Rayleigh-Ritz pass on the initial block
  std::vector<double> ritz_values;
  std::vector<double> residual_norms;
  Index active_columns = 0;
  bool used_p = false;
};

struct SolverConfig {
  Index block_size = 8;         // l
  double tol = 1e-4;            // relative to the operator scale
  int max_iter = 20;
  std::uint64_t seed = 1;
  double soft_lock_tol = 1e-5;  // relative, like tol
  bool deterministic = false;
  // Leading columns that must meet tol before the solve stops; 0 means all l.
  Index n_wanted = 0;
  // Constrain the block against the normalized all-ones vector.
  bool deflate_constant = false;
  std::function<void(const IterationInfo&)> monitor;

  // tol = 1e-10, max_iter = 500.
  static SolverConfig high_accuracy();

  // Throws DomainError on l < 1, max_iter < 1 or negative tolerances.
  void validate() const;
};

struct SolveStats {
  double scale = 0.0;                 // max(|theta_l|, operator scale)
  double initial_max_residual = 0.0;  // over the wanted columns, before iteration 1
  int restarts = 0;                   // basis conditioning recoveries
  int p_drops = 0;
  int image_refreshes = 0;            // explicit recomputations of the direction image
  // Dense n x l blocks allocated by the solve, including the returned vectors.
  int dense_blocks = 0;
};

struct EigenState {
  std::vector<double> eigenvalues;  // ascending
  MultiVector vectors;              // n x l, orthonormal columns
  std::vector<double> residual_norms;
  int iterations = 0;
  std::vector<bool> converged;
  SolveStats stats;

  Index rows() const noexcept { return vectors.rows(); }
  Index cols() const noexcept { return vectors.cols(); }
};

// Raised when the basis cannot be recovered; carries the best state so far.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, EigenState best)
      : Error(what), best_(std::move(best)) {}
  const EigenState& best_state() const noexcept { return best_; }

 private:
  EigenState best_;
};

// Symmetric positive-definite preconditioner applied in place to residuals.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply_in_place(BlockRef r) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply_in_place(BlockRef) const override {}
};

// n x l block of i.i.d. standard normal entries from a seeded generator.
MultiVector random_init(Index n, Index l, std::uint64_t seed);

// Orthonormalizes the columns in place. Numerically dependent columns are
// replaced with fresh random directions drawn from `seed`.
void orthonormalize_in_place(BlockRef x, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);
MultiVector orthonormalize(MultiVector x, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

struct RitzPairs {
  Eigen::VectorXd values;  // ascending
  Eigen::MatrixXd coeffs;  // basis * coeffs has orthonormal columns
};

// Solves (B^T Op B) c = theta (B^T B) c. Throws ConditioningError when the
// Gram matrix B^T B has condition number above 1/sqrt(machine epsilon).
RitzPairs rayleigh_ritz(const LinearOperator& op, ConstBlockRef basis);

// Same, from precomputed projected matrices.
RitzPairs rayleigh_ritz(const Eigen::MatrixXd& projected_op, const Eigen::MatrixXd& gram);

// The l smallest eigenpairs of a symmetric positive-semidefinite operator,
// starting from x0 (n x l). x0 becomes the working block.
EigenState lobpcg_solve(const LinearOperator& op, MultiVector x0, const SolverConfig& cfg,
                        const Preconditioner* precond = nullptr);

// ||Op x_i - lambda_i x_i||_2 recomputed from the state.
std::vector<double> residual_norms(const LinearOperator& op, const EigenState& state);

}  // namespace spectral
