#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spectral/errors.hpp"
#include "spectral/lobpcg.hpp"
#include "spectral/sbm.hpp"

using namespace spectral;

namespace {

SparseGraph two_triangles() {
  return SparseGraph::from_edges(
      6, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}});
}

SparseGraph complete(Index n) {
  EdgeList e;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
  return SparseGraph::from_edges(n, e);
}

double orthonormality_error(const MultiVector& x) {
  const Eigen::MatrixXd g = x.transpose() * x;
  return (g - Eigen::MatrixXd::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

SolverConfig accurate(Index l) {
  SolverConfig cfg = SolverConfig::high_accuracy();
  cfg.block_size = l;
  return cfg;
}

// Dense operator for tests that need an arbitrary symmetric matrix.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Index size() const override { return m_.rows(); }
  void apply(ConstBlockRef x, BlockRef y) const override { y = m_ * x; }

 private:
  Eigen::MatrixXd m_;
};

}  // namespace

TEST(RandomInit, SeededAndGaussian) {
  EXPECT_EQ(random_init(50, 3, 7), random_init(50, 3, 7));
  EXPECT_NE(random_init(50, 3, 7), random_init(50, 3, 8));
  const MultiVector x = random_init(10000, 4, 1);
  for (Index c = 0; c < 4; ++c) {
    EXPECT_LE(std::abs(x.col(c).mean()), 4.0 / std::sqrt(10000.0));
    const double var = (x.col(c).array() - x.col(c).mean()).square().mean();
    EXPECT_NEAR(var, 1.0, 0.1);
  }
}

TEST(RandomInit, SquareBlockFullRank) {
  const MultiVector x = random_init(3, 3, 5);
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(x).rank(), 3);
}

TEST(RandomInit, TooManyColumnsIsDomainError) {
  EXPECT_THROW(random_init(3, 4, 1), DomainError);
}

TEST(Orthonormalize, OrthonormalInputStaysOrthonormal) {
  const MultiVector q = orthonormalize(random_init(30, 5, 2));
  EXPECT_LE(orthonormality_error(orthonormalize(q)), 1e-12);
}

TEST(Orthonormalize, DuplicateColumnIsReplaced) {
  MultiVector x = random_init(20, 4, 3);
  x.col(2) = x.col(0);
  const MultiVector q = orthonormalize(x);
  EXPECT_EQ(q.cols(), 4);
  EXPECT_LE(orthonormality_error(q), 1e-12);
}

TEST(Orthonormalize, PreservesSpanByProjectorOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MultiVector x = random_init(40, 6, seed);
    const MultiVector q = orthonormalize(x);
    EXPECT_LE(orthonormality_error(q), 1e-12);
    const Eigen::MatrixXd basis = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd(x))
                                      .householderQ() *
                                  Eigen::MatrixXd::Identity(40, 6);
    const Eigen::MatrixXd p1 = basis * basis.transpose();
    const Eigen::MatrixXd p2 = Eigen::MatrixXd(q) * Eigen::MatrixXd(q).transpose();
    EXPECT_LE((p1 - p2).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Orthonormalize, ZeroInputIsDomainError) {
  EXPECT_THROW(orthonormalize(MultiVector::Zero(5, 2)), DomainError);
}

TEST(RayleighRitz, ExactEigenvectorsGiveExactValues) {
  const SparseGraph g = oracle::random_graph(25, 0.2, 4, false);
  const auto ref = oracle::dense_eigen(oracle::dense_laplacian(g));
  const MultiVector basis = ref.vectors.leftCols(4);
  const RitzPairs rr = rayleigh_ritz(LaplacianOperator(g), basis);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(rr.values(i), ref.values(i), 1e-12);
}

TEST(RayleighRitz, OnesVectorGivesZero) {
  const SparseGraph g = oracle::random_graph(15, 0.3, 1, true);
  const RitzPairs rr = rayleigh_ritz(LaplacianOperator(g), MultiVector::Ones(15, 1));
  ASSERT_EQ(rr.values.size(), 1);
  EXPECT_NEAR(rr.values(0), 0.0, 1e-12);
}

TEST(RayleighRitz, MatchesProjectedDenseOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseGraph g = oracle::random_graph(50, 0.1, seed, true);
    const Eigen::MatrixXd l = oracle::dense_laplacian(g);
    const MultiVector b = random_init(50, 5, seed + 50);
    const RitzPairs rr = rayleigh_ritz(LaplacianOperator(g), b);
    const Eigen::MatrixXd bd = b;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(bd.transpose() * l * bd,
                                                                 bd.transpose() * bd);
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(rr.values(i), ge.eigenvalues()(i), 1e-10 * (1.0 + ge.eigenvalues()(i)));
    }
    const Eigen::MatrixXd y = bd * rr.coeffs;
    EXPECT_LE((y.transpose() * y - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RayleighRitz, IllConditionedGramRaises) {
  MultiVector b = random_init(20, 3, 1);
  b.col(2) = b.col(0) + 1e-12 * b.col(1);
  EXPECT_THROW(rayleigh_ritz(LaplacianOperator(two_triangles()), b.topRows(6)), Error);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(2, 2);
  gram(1, 1) = 1e-20;
  EXPECT_THROW(rayleigh_ritz(Eigen::MatrixXd::Identity(2, 2), gram), ConditioningError);
}

TEST(Lobpcg, TwoTriangles) {
  const SparseGraph g = two_triangles();
  const EigenState s =
      lobpcg_solve(LaplacianOperator(g), random_init(6, 3, 1), accurate(3));
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[1], 0.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-8);
  Eigen::MatrixXd indicators = Eigen::MatrixXd::Zero(6, 2);
  indicators.block(0, 0, 3, 1).setOnes();
  indicators.block(3, 1, 3, 1).setOnes();
  EXPECT_LE(oracle::subspace_sine(Eigen::MatrixXd(s.vectors.leftCols(2)), indicators), 1e-6);
}

TEST(Lobpcg, PathP3) {
  const SparseGraph g = SparseGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const EigenState s =
      lobpcg_solve(LaplacianOperator(g), random_init(3, 3, 2), accurate(3));
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-8);
  EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-8);
}

TEST(Lobpcg, CompleteK4) {
  const EigenState s = lobpcg_solve(LaplacianOperator(complete(4)), random_init(4, 4, 3), accurate(4));
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], 4.0, 1e-8);
}

TEST(Lobpcg, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 20 + static_cast<Index>(rng() % 80);
    const SparseGraph g = oracle::random_graph(n, 0.05 + 0.1 * (trial % 3), rng(), true);
    const auto ref = oracle::dense_eigen(oracle::dense_laplacian(g));
    const EigenState s =
        lobpcg_solve(LaplacianOperator(g), random_init(n, 4, rng()), accurate(4));
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(s.eigenvalues[i], ref.values(i), 1e-6 * std::max(1.0, ref.values(i)));
    }
  }
}

TEST(Lobpcg, StateInvariants) {
  const SparseGraph g = oracle::random_graph(80, 0.08, 9, true);
  const LaplacianOperator op(g);
  SolverConfig cfg;
  cfg.block_size = 6;
  const EigenState s = lobpcg_solve(op, random_init(80, 6, 4), cfg);
  EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  EXPECT_LE(orthonormality_error(s.vectors), 1e-10);
  EXPECT_LE(s.iterations, cfg.max_iter);
  const double dmax = degrees(g).max();
  for (double v : s.eigenvalues) {
    EXPECT_GE(v, -1e-10);
    EXPECT_LE(v, 2.0 * dmax + 1e-10);
  }
  const std::vector<double> again = residual_norms(op, s);
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_NEAR(again[i], s.residual_norms[i], 1e-10);
}

TEST(Lobpcg, RitzValuesMonotone) {
  const SparseGraph g = generate_sbm({.n = 400, .k = 4, .p_in = 0.1, .p_out = 0.01, .seed = 3}).graph;
  SolverConfig cfg;
  cfg.block_size = 6;
  cfg.tol = 0.0;
  cfg.max_iter = 30;
  std::vector<std::vector<double>> history;
  cfg.monitor = [&](const IterationInfo& info) { history.push_back(info.ritz_values); };
  lobpcg_solve(LaplacianOperator(g), random_init(400, 6, 1), cfg);
  ASSERT_GE(history.size(), 2u);
  for (std::size_t it = 1; it < history.size(); ++it) {
    double prev_sum = 0.0, cur_sum = 0.0;
    for (std::size_t j = 0; j < history[it].size(); ++j) {
      prev_sum += history[it - 1][j];
      cur_sum += history[it][j];
      EXPECT_LE(cur_sum, prev_sum + 1e-9 * (1.0 + std::abs(prev_sum)))
          << "iteration " << it << " prefix " << j;
    }
  }
}

TEST(Lobpcg, IdentityPreconditionerGivesSameIterates) {
  const SparseGraph g = oracle::random_graph(120, 0.05, 2, true);
  const LaplacianOperator op(g);
  SolverConfig cfg;
  cfg.block_size = 5;
  cfg.deterministic = true;
  const IdentityPreconditioner id;
  const EigenState a = lobpcg_solve(op, random_init(120, 5, 1), cfg);
  const EigenState b = lobpcg_solve(op, random_init(120, 5, 1), cfg, &id);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lobpcg, DeterministicRunsAreBitwiseEqual) {
  const SparseGraph g = generate_sbm({.n = 600, .k = 5, .p_in = 0.1, .p_out = 0.005, .seed = 1}).graph;
  SolverConfig cfg;
  cfg.block_size = 7;
  cfg.deterministic = true;
  const EigenState a = lobpcg_solve(LaplacianOperator(g), random_init(600, 7, 9), cfg);
  const EigenState b = lobpcg_solve(LaplacianOperator(g), random_init(600, 7, 9), cfg);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_EQ(a.residual_norms, b.residual_norms);
}

TEST(Lobpcg, ConvergedStartStopsImmediately) {
  const SparseGraph g = oracle::random_graph(60, 0.1, 5, true);
  const LaplacianOperator op(g);
  const EigenState s = lobpcg_solve(op, random_init(60, 4, 2), accurate(4));
  SolverConfig cfg;
  cfg.block_size = 4;
  const EigenState again = lobpcg_solve(op, s.vectors, cfg);
  EXPECT_LE(again.iterations, 2);
}

TEST(Lobpcg, UsesSixBlocks) {
  const SparseGraph g = oracle::random_graph(200, 0.03, 7, false);
  SolverConfig cfg;
  cfg.block_size = 6;
  const EigenState s = lobpcg_solve(LaplacianOperator(g), random_init(200, 6, 1), cfg);
  EXPECT_LE(s.stats.dense_blocks, 6);
}

TEST(Lobpcg, DeflationKeepsBlockOrthogonalToOnes) {
  const SparseGraph g = oracle::random_graph(50, 0.15, 3, true);
  SolverConfig cfg = SolverConfig::high_accuracy();
  cfg.block_size = 3;
  cfg.deflate_constant = true;
  const EigenState s = lobpcg_solve(LaplacianOperator(g), random_init(50, 3, 5), cfg);
  const auto ref = oracle::dense_eigen(oracle::dense_laplacian(g));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.eigenvalues[i], ref.values(i + 1), 1e-6);
  EXPECT_LE(s.vectors.colwise().sum().cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lobpcg, GeneralSymmetricOperator) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(30, 30);
  m = m * m.transpose() + Eigen::MatrixXd::Identity(30, 30);
  const auto ref = oracle::dense_eigen(m);
  const EigenState s =
      lobpcg_solve(DenseOperator(m), random_init(30, 3, 1), accurate(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.eigenvalues[i], ref.values(i), 1e-6 * ref.values(i));
}

TEST(Lobpcg, ContractChecks) {
  const LaplacianOperator op(two_triangles());
  SolverConfig cfg;
  cfg.block_size = 3;
  EXPECT_THROW(lobpcg_solve(op, random_init(6, 2, 1), cfg), ContractError);
  EXPECT_THROW(lobpcg_solve(op, random_init(5, 3, 1), cfg), ContractError);
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Lobpcg, StableOnLargeNullSpace) {
  // 12 isolated edges and 6 isolated vertices: a 18-dimensional null space.
  EdgeList e;
  for (Index i = 0; i < 12; ++i) e.push_back({2 * i, 2 * i + 1, 1.0});
  const SparseGraph g = SparseGraph::from_edges(30, e);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EigenState s = lobpcg_solve(LaplacianOperator(g), random_init(30, 8, seed), accurate(8));
    for (double v : s.eigenvalues) EXPECT_NEAR(v, 0.0, 1e-8);
    EXPECT_LT(orthonormality_error(s.vectors), 1e-8);
  }
}

TEST(Lobpcg, StableWhenBasisFillsSpace) {
  const SparseGraph g = oracle::random_graph(25, 0.3, 11, true);
  const auto ref = oracle::dense_eigen(oracle::dense_laplacian(g));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EigenState s = lobpcg_solve(LaplacianOperator(g), random_init(25, 8, seed), accurate(8));
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(s.eigenvalues[i], ref.values(i), 1e-6);
  }
}
