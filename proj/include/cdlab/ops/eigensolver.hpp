#pragma once

#include "cdlab/ops/linear_op.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace cdlab {

using Block = Eigen::MatrixXcd;

struct KernelOptions {
  int extra = 4;               // block size = k + extra
  int max_iter = 400;
  double residual_tol = 1e-7;  // relative to lambda_ref
  bool decisive_only = true;   // stop once the kernel block and the first pair above tau converge
  double tau_rel = 1e-6;       // kernel threshold relative to lambda_ref
  double min_gap_ratio = 1e2;
  int power_iters = 40;
  // preconditioner 1 / (1 + |2 pi k|^2)^p; p <= 0 picks p from the spectral radius (mixed-order operators)
  double precond_power = 0;
  std::uint64_t seed = 12345;
  Eigen::Index dense_threshold = 1500;  // reduced dimension below which a dense eigensolve is used
};

struct KernelReport {
  std::vector<double> eigenvalues;  // ascending, k of them
  std::vector<double> residuals;    // relative to lambda_ref
  int kernel_dim = 0;
  double lambda_ref = 0;
  double tau = 0;
  double gap_ratio = 0;  // first excluded / last included (empty kernel: / accuracy of the first eigenvalue)
  bool converged = false;
  bool unreliable = false;
  int iterations = 0;
  int applies = 0;
  std::string method;
  std::string note;
};

// Self-adjoint positive semidefinite operator restricted to the range of an orthogonal projector P that
// commutes with the Fourier preconditioner (band and fiber-component masks).
struct ConstrainedOperator {
  std::function<Vec(const Vec&)> apply;  // must already include P on both sides
  std::shared_ptr<const ProjectionOp> P;
  int fiber_dim = 1;
};

// P A^dagger A P, with the unweighted adjoint (its kernel equals ker A on range P).
inline ConstrainedOperator normal_equations(OpPtr A, std::shared_ptr<const ProjectionOp> P) {
  return {[A, P](const Vec& x) {
            const Vec px = P->apply(x);
            return P->apply(A->adjoint(A->apply(px)));
          },
          P, A->dim_in()};
}
// P (sum_i B_i^dagger B_i) P: kernel is the common kernel of all B_i on range P.
inline ConstrainedOperator stacked_normal_equations(std::vector<OpPtr> Bs, std::shared_ptr<const ProjectionOp> P) {
  const int d = Bs.at(0)->dim_in();
  return {[Bs, P](const Vec& x) {
            const Vec px = P->apply(x);
            Vec out = Vec::Zero(px.size());
            for (const auto& B : Bs) out += B->adjoint(B->apply(px));
            return P->apply(out);
          },
          P, d};
}
// P A P for an operator that is already self-adjoint.
inline ConstrainedOperator self_adjoint(OpPtr A, std::shared_ptr<const ProjectionOp> P) {
  return {[A, P](const Vec& x) { return P->apply(A->apply(P->apply(x))); }, P, A->dim_in()};
}

namespace detail {

// Fourier preconditioner applied per fiber component.
inline Block precondition(const Grid& g, int dim, const Block& R, double power) {
  const std::size_t np = g.npts();
  std::vector<double> mult(np);
  for (std::size_t i = 0; i < np; ++i) {
    double k2 = 0;
    for (int a = 0; a < g.real_dim(); ++a) {
      const double k = 2 * std::numbers::pi * g.wavenumber(a, i);
      k2 += k * k;
    }
    mult[i] = std::pow(1.0 + k2, -power);
  }
  Block out(R.rows(), R.cols());
  ScalarField spec(np);
  for (Eigen::Index c = 0; c < R.cols(); ++c)
    for (int k = 0; k < dim; ++k) {
      g.forward(R.col(c).data() + k * np, spec.data());
      for (std::size_t i = 0; i < np; ++i) spec[i] *= mult[i];
      g.backward(spec.data(), out.col(c).data() + k * np);
    }
  return out;
}

inline Block apply_block(const ConstrainedOperator& op, const Block& X, int& count) {
  Block out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) out.col(c) = op.apply(X.col(c));
  count += static_cast<int>(X.cols());
  return out;
}

inline Block random_block(const ConstrainedOperator& op, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  Block X(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) X(r, c) = cd(nd(rng), nd(rng));
    X.col(c) = op.P->apply(X.col(c));
  }
  return X;
}

// Plane-wave basis of range(P).
inline Block range_basis(const ProjectionOp& P, int dim) {
  const Grid& g = *P.grid();
  const std::size_t np = g.npts();
  const std::vector<int> bands(g.real_dim(), P.band());
  std::vector<std::size_t> modes;
  for (std::size_t i = 0; i < np; ++i)
    if (g.in_band(i, bands)) modes.push_back(i);
  ScalarField spec(np, 0.0), f(np);
  std::vector<std::pair<int, std::size_t>> cols;
  for (int k = 0; k < dim; ++k)
    if (P.keep()[k])
      for (std::size_t m : modes) cols.emplace_back(k, m);
  Block B = Block::Zero(static_cast<Eigen::Index>(np * dim), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::fill(spec.begin(), spec.end(), cd(0.0));
    spec[cols[c].second] = 1.0;
    g.backward(spec.data(), f.data());
    const double s = std::sqrt(static_cast<double>(np));  // unit Euclidean norm
    for (std::size_t t = 0; t < np; ++t) B(static_cast<Eigen::Index>(cols[c].first * np + t), static_cast<Eigen::Index>(c)) = f[t] * s;
  }
  return B;
}

inline void finish_report(KernelReport& rep, const KernelOptions& opt, int k) {
  rep.tau = opt.tau_rel * rep.lambda_ref;
  rep.kernel_dim = 0;
  for (int i = 0; i < k; ++i)
    if (rep.eigenvalues[i] < rep.tau) ++rep.kernel_dim;
  if (rep.kernel_dim == k) {
    rep.gap_ratio = 0;
    rep.unreliable = true;
    rep.note = "all requested eigenvalues are below the threshold; increase the count";
  } else {
    // floor at roundoff level so an exactly zero eigenvalue gives a finite ratio
    const double floor = std::numeric_limits<double>::epsilon() * rep.lambda_ref;
    const double incl = rep.kernel_dim > 0 ? std::max(std::abs(rep.eigenvalues[rep.kernel_dim - 1]), floor) : 0.0;
    const double excl = rep.eigenvalues[rep.kernel_dim];
    // empty kernel: compare the first eigenvalue with its own accuracy bound |r| >= |lambda - lambda_exact|
    const double noise = std::max(rep.residuals.empty() ? 0.0 : rep.residuals[0] * rep.lambda_ref, floor);
    rep.gap_ratio = excl / (rep.kernel_dim > 0 ? incl : noise);
    if (rep.gap_ratio < opt.min_gap_ratio) {
      rep.unreliable = true;
      rep.note = "kernel count unreliable: gap ratio below threshold";
    }
  }
  if (!rep.converged) {
    rep.unreliable = true;
    if (rep.note.empty()) rep.note = "eigensolver did not converge; partial spectrum";
  }
}

}  // namespace detail

// Largest eigenvalue estimate by power iteration.
inline double spectral_radius(const ConstrainedOperator& op, Eigen::Index rows, int iters, std::uint64_t seed, int& count) {
  Block x = detail::random_block(op, rows, 1, seed ^ 0x9e3779b97f4a7c15ULL);
  Vec v = x.col(0) / x.col(0).norm();
  double lam = 0;
  for (int it = 0; it < iters; ++it) {
    Vec w = op.apply(v);
    ++count;
    lam = std::max(lam, v.dot(w).real());
    const double nw = w.norm();
    if (nw == 0) break;
    v = w / nw;
  }
  return lam;
}

// k smallest eigenvalues of a constrained positive semidefinite operator plus the kernel decision.
inline KernelReport kernel_spectrum(const ConstrainedOperator& op, int k, KernelOptions opt = {}) {
  KernelReport rep;
  const Grid& g = *op.P->grid();
  const auto rows = static_cast<Eigen::Index>(g.npts() * op.fiber_dim);
  int applies = 0;

  // reduced dimension of range(P)
  Eigen::Index reduced = 0;
  {
    std::size_t modes = 0;
    const std::vector<int> bands(g.real_dim(), op.P->band());
    for (std::size_t i = 0; i < g.npts(); ++i)
      if (g.in_band(i, bands)) ++modes;
    int comps = 0;
    for (bool b : op.P->keep()) comps += b;
    reduced = static_cast<Eigen::Index>(modes) * comps;
  }
  k = static_cast<int>(std::min<Eigen::Index>(k, reduced));

  if (reduced <= opt.dense_threshold) {
    const Block B = detail::range_basis(*op.P, op.fiber_dim);
    const Block AB = detail::apply_block(op, B, applies);
    Block M = B.adjoint() * AB;
    M = 0.5 * (M + M.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Block> es(M);
    rep.lambda_ref = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    for (int i = 0; i < k; ++i) {
      rep.eigenvalues.push_back(es.eigenvalues()[i]);
      rep.residuals.push_back(0.0);
    }
    rep.converged = true;
    rep.method = "dense";
    rep.applies = applies;
    detail::finish_report(rep, opt, k);
    return rep;
  }

  rep.method = "lobpcg";
  rep.lambda_ref = spectral_radius(op, rows, opt.power_iters, opt.seed, applies);
  double power = opt.precond_power;
  if (power <= 0) {
    // effective order: lambda_ref grows like (1 + |2 pi k|^2)^p at the band edge
    double k2max = 0;
    const std::vector<int> bands(g.real_dim(), op.P->band());
    for (std::size_t i = 0; i < g.npts(); ++i) {
      if (!g.in_band(i, bands)) continue;
      double k2 = 0;
      for (int a = 0; a < g.real_dim(); ++a) k2 += std::pow(2 * std::numbers::pi * g.wavenumber(a, i), 2);
      k2max = std::max(k2max, k2);
    }
    power = k2max > 0 ? std::clamp(std::log(std::max(rep.lambda_ref, 1.0)) / std::log1p(k2max), 0.5, 4.0) : 1.0;
  }
  const int m = std::min<int>(k + opt.extra, static_cast<int>(reduced));

  // Rayleigh-Ritz on span(S) without forming an orthonormal basis: returns coefficients Z (S Z = Ritz vectors).
  auto rayleigh_ritz = [](const Block& S, const Block& AS, int want) {
    Block G(S.cols(), S.cols());
    G.setZero();
    G.selfadjointView<Eigen::Lower>().rankUpdate(S.adjoint());
    G = G.selfadjointView<Eigen::Lower>();
    Block H = S.adjoint() * AS;
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Block> gs(G);
    const double top = gs.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < gs.eigenvalues().size(); ++i)
      if (gs.eigenvalues()[i] > 1e-13 * top) keep.push_back(i);
    Block C(S.cols(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      C.col(static_cast<Eigen::Index>(j)) = gs.eigenvectors().col(keep[j]) / std::sqrt(gs.eigenvalues()[keep[j]]);
    Block Hr = C.adjoint() * H * C;
    Eigen::SelfAdjointEigenSolver<Block> es(0.5 * (Hr + Hr.adjoint()));
    want = std::min<int>(want, static_cast<int>(C.cols()));
    return std::make_pair(Block(C * es.eigenvectors().leftCols(want)), Eigen::VectorXd(es.eigenvalues().head(want)));
  };

  Block X = detail::random_block(op, rows, m, opt.seed);
  Block AX = detail::apply_block(op, X, applies);
  Eigen::VectorXd lam;
  {
    auto [Z, l] = rayleigh_ritz(X, AX, m);
    X = X * Z;
    AX = AX * Z;
    lam = l;
  }
  Block Pd(rows, 0), APd(rows, 0);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (it > 0 && it % 20 == 0) AX = detail::apply_block(op, X, applies);  // refresh against drift
    const Block R = AX - X * lam.asDiagonal();
    std::vector<double> rn(static_cast<std::size_t>(X.cols()));
    std::vector<Eigen::Index> active;
    // the count is decided by the pairs up to the first Ritz value above tau; later pairs only guard the ordering
    Eigen::Index decisive = k - 1;
    if (opt.decisive_only)
      for (Eigen::Index c = 0; c < k; ++c)
        if (lam[c] >= opt.tau_rel * rep.lambda_ref) {
          decisive = c;
          break;
        }
    bool done = true;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      rn[c] = R.col(c).norm() / rep.lambda_ref;
      if (rn[c] > opt.residual_tol) {
        active.push_back(c);
        if (c <= decisive) done = false;
      }
    }
    rep.residuals.assign(rn.begin(), rn.begin() + k);
    if (done) {
      rep.converged = true;
      break;
    }
    // soft locking: only unconverged columns get new directions
    Block Ra(rows, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) Ra.col(static_cast<Eigen::Index>(j)) = R.col(active[j]);
    Block W = detail::precondition(g, op.fiber_dim, Ra, power);
    for (Eigen::Index c = 0; c < W.cols(); ++c) W.col(c) = op.P->apply(W.col(c));
    W -= X * (X.adjoint() * W);
    const Block AW = detail::apply_block(op, W, applies);
    const Eigen::Index nx = X.cols(), nw = W.cols(), np_ = Pd.cols();
    Block S(rows, nx + nw + np_), AS(rows, nx + nw + np_);
    S << X, W, Pd;
    AS << AX, AW, APd;
    auto [Z, l] = rayleigh_ritz(S, AS, m);
    const Block Xn = S * Z, AXn = AS * Z;
    // next search directions: W and P components of the update, active columns only
    Block Zt(nw + np_, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j)
      if (active[j] < Z.cols()) Zt.col(static_cast<Eigen::Index>(j)) = Z.col(active[j]).tail(nw + np_);
      else Zt.col(static_cast<Eigen::Index>(j)).setZero();
    Pd = S.rightCols(nw + np_) * Zt;
    APd = AS.rightCols(nw + np_) * Zt;
    X = Xn;
    AX = AXn;
    lam = l;
  }
  rep.iterations = it;
  rep.applies = applies;
  for (int i = 0; i < k; ++i) rep.eigenvalues.push_back(lam[i]);
  detail::finish_report(rep, opt, k);
  return rep;
}

}  // namespace cdlab
