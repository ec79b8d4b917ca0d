#include "spectral/lobpcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dense.hpp"

namespace spectral {

using detail::column_norms;
using detail::gram;
using detail::right_multiply;
using detail::select_columns;

SolverConfig SolverConfig::high_accuracy() {
  SolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.soft_lock_tol = 1e-12;
  cfg.max_iter = 500;
  return cfg;
}

void SolverConfig::validate() const {
  if (block_size < 1) throw DomainError("block size must be at least 1");
  if (max_iter < 1) throw DomainError("max_iter must be at least 1");
  if (!(tol >= 0.0)) throw DomainError("tol must be non-negative");
  if (!(soft_lock_tol >= 0.0)) throw DomainError("soft_lock_tol must be non-negative");
  if (n_wanted < 0) throw DomainError("n_wanted must be non-negative");
}

MultiVector random_init(Index n, Index l, std::uint64_t seed) {
  if (l < 1) throw DomainError("block size must be at least 1");
  if (l > n) {
    throw DomainError("block size " + std::to_string(l) + " exceeds vertex count " +
                      std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MultiVector x(n, l);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < l; ++c) x(i, c) = normal(rng);
  return x;
}

// ---------------------------------------------------------------------------
// Orthonormalization

void orthonormalize_in_place(BlockRef x, std::uint64_t seed) {
  const Index n = x.rows();
  const Index l = x.cols();
  if (l > n) throw DomainError("cannot orthonormalize more columns than rows");
  if (l == 0) return;
  if (x.cwiseAbs().maxCoeff() == 0.0) throw DomainError("cannot orthonormalize an all-zero block");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kDependent = 1e-10;

  for (Index j = 0; j < l; ++j) {
    for (int attempt = 0;; ++attempt) {
      const double norm0 = x.col(j).norm();
      // Modified Gram-Schmidt, two passes.
      for (int pass = 0; pass < 2; ++pass) {
        for (Index i = 0; i < j; ++i) x.col(j) -= x.col(i).dot(x.col(j)) * x.col(i);
      }
      const double norm1 = x.col(j).norm();
      if (norm0 > 0.0 && norm1 > kDependent * norm0 && std::isfinite(norm1)) {
        x.col(j) /= norm1;
        break;
      }
      if (attempt == 16) throw DomainError("failed to complete an orthonormal basis");
      for (Index r = 0; r < n; ++r) x(r, j) = normal(rng);
    }
  }
}

MultiVector orthonormalize(MultiVector x, std::uint64_t seed) {
  orthonormalize_in_place(x, seed);
  return x;
}

// ---------------------------------------------------------------------------
// Rayleigh-Ritz

RitzPairs rayleigh_ritz(const Eigen::MatrixXd& projected_op, const Eigen::MatrixXd& gram_matrix) {
  const Index s = gram_matrix.rows();
  if (projected_op.rows() != s || projected_op.cols() != s || gram_matrix.cols() != s) {
    throw ContractError("rayleigh_ritz: projected matrices must be square and equal in size");
  }
  RitzPairs out;
  if (s == 0) return out;
  const Eigen::MatrixXd m = 0.5 * (gram_matrix + gram_matrix.transpose());
  const Eigen::MatrixXd k = 0.5 * (projected_op + projected_op.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(m);
  if (gram_eig.info() != Eigen::Success) throw ConditioningError("Gram eigensolve failed");
  const double lo = gram_eig.eigenvalues()(0);
  const double hi = gram_eig.eigenvalues()(s - 1);
  const double limit = 1.0 / std::sqrt(std::numeric_limits<double>::epsilon());
  if (!(lo > 0.0) || !(hi / lo <= limit)) {
    throw ConditioningError("Gram matrix condition number " +
                            (lo > 0.0 ? std::to_string(hi / lo) : std::string("inf")) +
                            " exceeds " + std::to_string(limit));
  }
  // Whitening transform M^{-1/2} turns the pencil into a standard problem.
  const Eigen::MatrixXd whiten =
      gram_eig.eigenvectors() * gram_eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd reduced = whiten.transpose() * k * whiten;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  if (eig.info() != Eigen::Success) throw ConditioningError("projected eigensolve failed");
  out.values = eig.eigenvalues();
  out.coeffs = whiten * eig.eigenvectors();
  return out;
}

RitzPairs rayleigh_ritz(const LinearOperator& op, ConstBlockRef basis) {
  if (basis.rows() != op.size()) throw ContractError("rayleigh_ritz: basis row count mismatch");
  MultiVector image(basis.rows(), basis.cols());
  op.apply(basis, image);
  return rayleigh_ritz(gram(basis, image, true), gram(basis, basis, true));
}

// ---------------------------------------------------------------------------
// LOBPCG

namespace {

constexpr double kDropRelative = 1e-10;
constexpr double kSvqbDrop = 1e-12;
constexpr double kImageRetained = 1e-3;
constexpr double kImageConditioning = 1e-6;

// v -= q (q^T v); av -= aq (q^T v) when images are given.
void project_out(BlockRef v, ConstBlockRef q, BlockRef* av, const ConstBlockRef* aq,
                 bool fixed_chunks) {
  if (v.cols() == 0 || q.cols() == 0) return;
  const Eigen::MatrixXd h = gram(q, v, fixed_chunks);
  v.noalias() -= q * h;
  if (av != nullptr) av->noalias() -= (*aq) * h;
}

// Orthonormalizes v (and its image) by the SVQB scheme, keeping only
// directions whose scaled Gram eigenvalue is significant. Returns the kept
// column count; the result occupies the leftmost columns.
Index svqb(BlockRef v, BlockRef* av, bool fixed_chunks, double* min_kept = nullptr) {
  const Index m = v.cols();
  if (m == 0) return 0;
  const Eigen::MatrixXd g = gram(v, v, fixed_chunks);
  Eigen::VectorXd scale(m);
  for (Index i = 0; i < m; ++i) scale(i) = g(i, i) > 0.0 ? 1.0 / std::sqrt(g(i, i)) : 0.0;
  Eigen::MatrixXd scaled = scale.asDiagonal() * g * scale.asDiagonal();
  scaled = 0.5 * (scaled + scaled.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double top = lam(m - 1);
  if (!(top > 0.0)) return 0;
  std::vector<Index> keep;
  for (Index i = 0; i < m; ++i)
    if (lam(i) > kSvqbDrop * top) keep.push_back(i);
  // Largest directions first so that the order is stable.
  std::reverse(keep.begin(), keep.end());
  if (min_kept != nullptr && !keep.empty()) *min_kept = std::min(*min_kept, lam(keep.back()) / top);
  Eigen::MatrixXd t(m, static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    t.col(static_cast<Index>(j)) =
        scale.asDiagonal() * eig.eigenvectors().col(keep[j]) / std::sqrt(lam(keep[j]));
  }
  right_multiply(v, t);
  if (av != nullptr) right_multiply(*av, t);
  return t.cols();
}

// Drops columns that lost almost all of their norm to projection.
Index drop_vanished(BlockRef v, BlockRef* av, const std::vector<double>& before,
                    double* min_retained = nullptr) {
  const std::vector<double> after = column_norms(v);
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < after.size(); ++j) {
    if (before[j] > 0.0 && after[j] > kDropRelative * before[j] && std::isfinite(after[j])) {
      keep.push_back(static_cast<Eigen::Index>(j));
      if (min_retained != nullptr) *min_retained = std::min(*min_retained, after[j] / before[j]);
    }
  }
  select_columns(v, keep);
  if (av != nullptr) select_columns(*av, keep);
  return static_cast<Index>(keep.size());
}

// Symmetric matrix from the upper block triangle of a blocked Gram product.
Eigen::MatrixXd assemble(const std::vector<ConstBlockRef>& left,
                         const std::vector<ConstBlockRef>& right, bool fixed_chunks) {
  Index s = 0;
  std::vector<Index> offset;
  for (const auto& b : left) {
    offset.push_back(s);
    s += b.cols();
  }
  Eigen::MatrixXd out(s, s);
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = i; j < right.size(); ++j) {
      const Eigen::MatrixXd blk = gram(left[i], right[j], fixed_chunks);
      out.block(offset[i], offset[j], blk.rows(), blk.cols()) = blk;
      if (i != j) out.block(offset[j], offset[i], blk.cols(), blk.rows()) = blk.transpose();
    }
  }
  return out;
}

class Solve {
 public:
  Solve(const LinearOperator& op, MultiVector x0, const SolverConfig& cfg,
        const Preconditioner* precond)
      : op_(op), cfg_(cfg), precond_(precond), n_(op.size()), l_(x0.cols()), x_(std::move(x0)) {
    cfg_.validate();
    if (x_.rows() != n_) {
      throw ContractError("initial block has " + std::to_string(x_.rows()) + " rows, operator " +
                          std::to_string(n_));
    }
    if (l_ != cfg_.block_size) {
      throw ContractError("initial block has " + std::to_string(l_) +
                          " columns, configured block size is " + std::to_string(cfg_.block_size));
    }
    if (l_ > n_) throw DomainError("block size exceeds operator size");
    wanted_ = cfg_.n_wanted == 0 ? l_ : std::min(cfg_.n_wanted, l_);
    fixed_ = cfg_.deterministic;
    stats_.dense_blocks = 1;  // the working block x_
    if (cfg_.deflate_constant) constant_ = MultiVector::Constant(n_, 1, 1.0 / std::sqrt(double(n_)));
  }

  EigenState run() {
    ax_ = block();
    r_ = block();
    start_from_x();
    stats_.initial_max_residual = max_wanted_residual();
    notify(0, l_, false);

    ar_ = block();
    p_ = block();
    ap_ = block();

    int it = 0;
    while (!converged() && it < cfg_.max_iter) {
      std::vector<Eigen::Index> active;
      for (Index i = 0; i < l_; ++i)
        if (!(norms_[i] <= cfg_.soft_lock_tol * stats_.scale)) active.push_back(i);
      if (active.empty()) break;

      const Index mr = prepare_residuals(active);
      if (mr == 0) break;  // no new search directions
      Index mp = have_p_ ? prepare_directions(active, mr) : 0;

      RitzPairs rr;
      bool restarted = false;
      Index mr_used = mr;
      for (;;) {
        try {
          rr = project(mr_used, mp);
          break;
        } catch (const ConditioningError& e) {
          if (mp > 0) {
            mp = 0;
            ++stats_.p_drops;
            continue;
          }
          if (restarted) throw SolverError(std::string("basis conditioning failure: ") + e.what(),
                                           snapshot(it));
          restarted = true;
          ++stats_.restarts;
          orthonormalize_in_place(x_, cfg_.seed ^ 0x5851f42d4c957f2dULL);
          op_.apply(x_, ax_);
          std::vector<double> before = column_norms(r_.leftCols(mr_used));
          auto rb = r_.leftCols(mr_used);
          BlockRef rref(rb);
          for (int pass = 0; pass < 2; ++pass) project_out(rref, x_, nullptr, nullptr, fixed_);
          mr_used = drop_vanished(rref, nullptr, before);
          auto rb2 = r_.leftCols(mr_used);
          BlockRef rref2(rb2);
          mr_used = svqb(rref2, nullptr, fixed_);
          if (mr_used == 0) throw SolverError("no search directions after restart", snapshot(it));
          op_.apply(r_.leftCols(mr_used), ar_.leftCols(mr_used));
        }
      }
      update(rr, mr_used, mp);
      ++it;
      notify(it, static_cast<Index>(active.size()), mp > 0);
    }
    return snapshot(it);
  }

 private:
  MultiVector block() {
    ++stats_.dense_blocks;
    return MultiVector(n_, l_);
  }

  bool converged() const {
    for (Index i = 0; i < wanted_; ++i)
      if (!(norms_[i] <= cfg_.tol * stats_.scale)) return false;
    return true;
  }

  double max_wanted_residual() const {
    double m = 0.0;
    for (Index i = 0; i < wanted_; ++i) m = std::max(m, norms_[i]);
    return m;
  }

  void deflate(BlockRef v) {
    if (cfg_.deflate_constant) project_out(v, constant_, nullptr, nullptr, fixed_);
  }

  // Orthonormalize x_, apply the operator and rotate to Ritz vectors.
  void start_from_x() {
    deflate(x_);
    orthonormalize_in_place(x_, cfg_.seed ^ 0x2545f4914f6cdd1dULL);
    op_.apply(x_, ax_);
    const RitzPairs rr = rayleigh_ritz(gram(x_, ax_, fixed_), gram(x_, x_, fixed_));
    right_multiply(x_, rr.coeffs);
    right_multiply(ax_, rr.coeffs);
    theta_.assign(rr.values.data(), rr.values.data() + l_);
    refresh_residuals();
  }

  void refresh_residuals() {
    for (Index i = 0; i < n_; ++i)
      for (Index c = 0; c < l_; ++c) r_(i, c) = ax_(i, c) - theta_[c] * x_(i, c);
    norms_ = column_norms(r_);
    stats_.scale = std::max(std::abs(theta_.back()), op_.scale_hint());
    if (!(stats_.scale > 0.0)) stats_.scale = 1.0;
  }

  // Active residual columns, preconditioned and orthonormalized against x_.
  // Leaves them in r_[:, 0:mr] with images in ar_.
  Index prepare_residuals(const std::vector<Eigen::Index>& active) {
    select_columns(r_, active);
    Index mr = static_cast<Index>(active.size());
    auto rb = r_.leftCols(mr);
    BlockRef r(rb);
    if (precond_ != nullptr) precond_->apply_in_place(r);
    deflate(r);
    const std::vector<double> before = column_norms(r);
    for (int pass = 0; pass < 2; ++pass) project_out(r, x_, nullptr, nullptr, fixed_);
    mr = drop_vanished(r, nullptr, before);
    for (int pass = 0; pass < 2 && mr > 0; ++pass) {
      auto rb2 = r_.leftCols(mr);
      BlockRef r2(rb2);
      mr = svqb(r2, nullptr, fixed_);
    }
    if (mr > 0) op_.apply(r_.leftCols(mr), ar_.leftCols(mr));
    return mr;
  }

  // Previous directions for the active columns, made orthonormal to x_ and
  // the new residuals. Images follow every transformation.
  Index prepare_directions(const std::vector<Eigen::Index>& active, Index mr) {
    select_columns(p_, active);
    select_columns(ap_, active);
    Index mp = static_cast<Index>(active.size());
    double retained = 1.0;
    {
      auto pb = p_.leftCols(mp);
      auto apb = ap_.leftCols(mp);
      BlockRef p(pb);
      BlockRef ap(apb);
      deflate(p);
      const std::vector<double> before = column_norms(p);
      const ConstBlockRef ax(ax_);
      const ConstBlockRef ar(ar_.leftCols(mr));
      for (int pass = 0; pass < 2; ++pass) {
        project_out(p, x_, &ap, &ax, fixed_);
        project_out(p, r_.leftCols(mr), &ap, &ar, fixed_);
      }
      mp = drop_vanished(p, &ap, before, &retained);
    }
    double conditioning = 1.0;
    for (int pass = 0; pass < 2 && mp > 0; ++pass) {
      auto pb = p_.leftCols(mp);
      auto apb = ap_.leftCols(mp);
      BlockRef p(pb);
      BlockRef ap(apb);
      mp = svqb(p, &ap, fixed_, &conditioning);
    }
    // Rescaling a nearly cancelled direction magnifies the rounding error
    // carried by its image, so the image is recomputed.
    if (mp > 0 && (retained < kImageRetained || conditioning < kImageConditioning)) {
      op_.apply(p_.leftCols(mp), ap_.leftCols(mp));
      ++stats_.image_refreshes;
    }
    return mp;
  }

  RitzPairs project(Index mr, Index mp) {
    std::vector<ConstBlockRef> basis{x_, r_.leftCols(mr)};
    std::vector<ConstBlockRef> image{ax_, ar_.leftCols(mr)};
    if (mp > 0) {
      basis.emplace_back(p_.leftCols(mp));
      image.emplace_back(ap_.leftCols(mp));
    }
    const Eigen::MatrixXd k = assemble(basis, image, fixed_);
    const Eigen::MatrixXd m = assemble(basis, basis, fixed_);
    return rayleigh_ritz(k, m);
  }

  // x <- x Cx + p_new with p_new = r Cr + p Cp; images alike.
  void update(const RitzPairs& rr, Index mr, Index mp) {
    const Eigen::MatrixXd cx = rr.coeffs.block(0, 0, l_, l_);
    const Eigen::MatrixXd cr = rr.coeffs.block(l_, 0, mr, l_);
    const Eigen::MatrixXd cp = mp > 0 ? Eigen::MatrixXd(rr.coeffs.block(l_ + mr, 0, mp, l_))
                                      : Eigen::MatrixXd();
    constexpr Index kChunk = 128;
    MultiVector pn, apn, xn;
    for (Index r = 0; r < n_; r += kChunk) {
      const Index h = std::min(kChunk, n_ - r);
      pn.noalias() = r_.block(r, 0, h, mr) * cr;
      apn.noalias() = ar_.block(r, 0, h, mr) * cr;
      if (mp > 0) {
        pn.noalias() += p_.block(r, 0, h, mp) * cp;
        apn.noalias() += ap_.block(r, 0, h, mp) * cp;
      }
      xn.noalias() = x_.middleRows(r, h) * cx;
      xn += pn;
      p_.middleRows(r, h) = pn;
      ap_.middleRows(r, h) = apn;
      x_.middleRows(r, h) = xn;
    }
    have_p_ = true;
    theta_.assign(rr.values.data(), rr.values.data() + l_);
    op_.apply(x_, ax_);
    refresh_residuals();
  }

  void notify(int it, Index active, bool used_p) const {
    if (!cfg_.monitor) return;
    IterationInfo info;
    info.iteration = it;
    info.ritz_values = theta_;
    info.residual_norms = norms_;
    info.active_columns = active;
    info.used_p = used_p;
    cfg_.monitor(info);
  }

  EigenState snapshot(int it) {
    EigenState s;
    s.eigenvalues = theta_;
    s.residual_norms = norms_;
    s.iterations = it;
    s.converged.resize(static_cast<std::size_t>(l_));
    for (Index i = 0; i < l_; ++i) s.converged[i] = norms_[i] <= cfg_.tol * stats_.scale;
    s.stats = stats_;
    s.vectors = std::move(x_);
    return s;
  }

  const LinearOperator& op_;
  SolverConfig cfg_;
  const Preconditioner* precond_;
  Index n_;
  Index l_;
  Index wanted_ = 0;
  bool fixed_ = false;
  MultiVector x_, ax_, r_, ar_, p_, ap_;
  MultiVector constant_;
  std::vector<double> theta_;
  std::vector<double> norms_;
  bool have_p_ = false;
  SolveStats stats_;
};

}  // namespace

EigenState lobpcg_solve(const LinearOperator& op, MultiVector x0, const SolverConfig& cfg,
                        const Preconditioner* precond) {
  Solve solve(op, std::move(x0), cfg, precond);
  return solve.run();
}

std::vector<double> residual_norms(const LinearOperator& op, const EigenState& state) {
  const Index n = state.vectors.rows();
  const Index l = state.vectors.cols();
  if (n != op.size() || static_cast<Index>(state.eigenvalues.size()) != l) {
    throw ContractError("eigen state does not match the operator");
  }
  MultiVector r(n, l);
  op.apply(state.vectors, r);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < l; ++c) r(i, c) -= state.eigenvalues[c] * state.vectors(i, c);
  return column_norms(r);
}

}  // namespace spectral
