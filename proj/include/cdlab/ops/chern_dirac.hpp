#pragma once

#include "cdlab/ops/context.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cdlab {

enum class PartialCD { DpL, DppL, DpR, DppR };

inline Side side_of(PartialCD w) { return (w == PartialCD::DpL || w == PartialCD::DppL) ? Side::L : Side::R; }
inline bool is_prime(PartialCD w) { return w == PartialCD::DpL || w == PartialCD::DpR; }
inline const char* label(PartialCD w) {
  switch (w) {
    case PartialCD::DpL: return "D'L";
    case PartialCD::DppL: return "D''L";
    case PartialCD::DpR: return "D'R";
    default: return "D''R";
  }
}

namespace detail {

// Lift of the frame connection matrix Gamma to V: sum_{kl} Gamma_kl N_kl.
// On the up factor a_k^dag a_l, on the down factor the same minus the trace, so both vacua are parallel.
inline std::vector<fiber::Mat> spin_lift(int n) {
  const auto gens = complex_generators(n);
  const int d = fiber::dim(n);
  std::vector<fiber::Mat> out;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const Multivector w = gens[k].eps * gens[l].eps_bar;  // a_k^dag a_l = -w / 2 on either factor
      fiber::Mat m = -0.5 * (fiber::clifford(Side::L, w) + fiber::clifford(Side::R, w));
      if (k == l) m -= fiber::Mat::Identity(d, d);
      out.push_back(std::move(m));
    }
  return out;
}

inline ScalarField times(const ScalarField& a, const ScalarField& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  ScalarField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

// Appends scale * coef * Lm o D_X to op, X the frame vector of direction dir, D the (twisted) covariant
// derivative on V; coef is an optional scalar field.
inline void add_covariant_V(FirstOrderOp& op, const OpContext& c, const fiber::Mat& Lm, int dir, const Twist& tw,
                            const std::vector<fiber::Mat>& lift, cd scale = 1.0, const ScalarField& coef = {}) {
  const int n = c.n;
  for (int a = 0; a < n; ++a) op.add(Lm, times(coef, c.dir_coeff(dir, a)), c.dir_deriv(dir, a), scale);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      op.add(Lm * lift[k * n + l], times(coef, c.gam(dir, k, l)), FirstOrderOp::kNoDeriv, scale);
  if (!tw.empty()) op.add(Lm, times(coef, tw.on_frame(c, dir)), FirstOrderOp::kNoDeriv, scale);
}

// Appends the partial operator to op.
inline void add_partial_cd(FirstOrderOp& op, const OpContext& c, PartialCD which, const Twist& tw, bool torsion,
                           const std::vector<fiber::Mat>& lift) {
  const int n = c.n;
  const Side side = side_of(which);
  const bool prime = is_prime(which);
  for (int j = 0; j < n; ++j) {
    // D' pairs c(epsbar_j) with D_{eps_j}; D'' pairs c(eps_j) with D_{epsbar_j}
    const fiber::Mat cm = fiber::clifford(side, prime ? c.epsbar[j] : c.eps[j]);
    add_covariant_V(op, c, cm, prime ? j : n + j, tw, lift);
  }
  if (!torsion) return;
  for (int r = 0; r < n; ++r)
    for (int s = r + 1; s < n; ++s)
      for (int m = 0; m < n; ++m) {
        if (prime) {
          const Multivector w = c.epsbar[r] * c.epsbar[s] * c.eps[m];
          op.add(fiber::clifford(side, w), c.T(r, s, m), FirstOrderOp::kNoDeriv, -0.5);
        } else {
          ScalarField f = c.T(r, s, m);
          for (auto& v : f) v = std::conj(v);
          const Multivector w = c.eps[r] * c.eps[s] * c.epsbar[m];
          op.add(fiber::clifford(side, w), f, FirstOrderOp::kNoDeriv, -0.5);
        }
      }
}

}  // namespace detail

// D_X on V for X = eps_dir (dir < n) or epsbar_{dir - n}, optionally twisted.
inline OpPtr covariant_derivative_V(const OpContext& c, int dir, const Twist& tw = {}) {
  auto op = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::V, Bundle::V);
  detail::add_covariant_V(*op, c, fiber::Mat::Identity(c.dim, c.dim), dir, tw, detail::spin_lift(c.n));
  op->finalize();
  return op;
}

// One of the four partial Chern-Dirac operators; torsion = false drops the zeroth-order torsion term (ablation).
inline OpPtr assemble_partial_cd(PartialCD which, const OpContext& c, const Twist& tw = {}, bool torsion = true) {
  auto op = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::V, Bundle::V);
  detail::add_partial_cd(*op, c, which, tw, torsion, detail::spin_lift(c.n));
  op->finalize();
  return op;
}

// Chern-Dirac operator D' + D'' for the left (L) or right (R) structure.
inline OpPtr assemble_chern_dirac(Side side, const OpContext& c, const Twist& tw = {}, bool torsion = true) {
  auto op = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::V, Bundle::V);
  const auto lift = detail::spin_lift(c.n);
  detail::add_partial_cd(*op, c, side == Side::L ? PartialCD::DpL : PartialCD::DpR, tw, torsion, lift);
  detail::add_partial_cd(*op, c, side == Side::L ? PartialCD::DppL : PartialCD::DppR, tw, torsion, lift);
  op->finalize();
  return op;
}

// Pointwise constant fiber map between the form bundle and V.
inline OpPtr fiber_op(const OpContext& c, const fiber::Mat& M, Bundle from, Bundle to) {
  auto op = std::make_shared<FirstOrderOp>(c.grid, static_cast<int>(M.cols()), static_cast<int>(M.rows()), from, to);
  op->add_constant(M);
  op->finalize();
  return op;
}
inline OpPtr sigma_op(const OpContext& c) { return fiber_op(c, fiber::sigma(c.n), Bundle::Forms, Bundle::V); }
inline OpPtr sigma_inv_op(const OpContext& c) {
  return fiber_op(c, fiber::sigma(c.n).inverse(), Bundle::V, Bundle::Forms);
}

// Band-limit projection plus optional restriction to fiber components of a bidegree.
inline std::vector<bool> bidegree_mask(int n, Bundle b, int p, int q) {
  std::vector<bool> keep(fiber::dim(n));
  for (int idx = 0; idx < fiber::dim(n); ++idx) {
    const auto pq = b == Bundle::V ? fiber::v_bidegree(n, idx) : fiber::form_bidegree(n, idx);
    keep[idx] = pq.first == p && pq.second == q;
  }
  return keep;
}
inline OpPtr band_projection(const OpContext& c, Bundle b, int band, std::vector<bool> keep = {}) {
  return std::make_shared<ProjectionOp>(c.grid, c.dim, b, band, std::move(keep));
}

// a o P o b: products re-project to the band limit after the inner factor.
inline OpPtr compose_banded(const OpContext& c, OpPtr a, OpPtr b, int band) {
  return compose({a, band_projection(c, b->bundle_out(), band), b});
}

// Bott-Chern and Aeppli Dirac operators.
inline OpPtr assemble_bc_dirac(const OpContext& c, int band) {
  auto first = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::V, Bundle::V);
  const auto lift = detail::spin_lift(c.n);
  detail::add_partial_cd(*first, c, PartialCD::DpL, {}, true, lift);
  detail::add_partial_cd(*first, c, PartialCD::DppR, {}, true, lift);
  first->finalize();
  return add(first, compose_banded(c, assemble_partial_cd(PartialCD::DpR, c), assemble_partial_cd(PartialCD::DppL, c), band));
}
inline OpPtr assemble_aeppli_dirac(const OpContext& c, int band) {
  auto first = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::V, Bundle::V);
  const auto lift = detail::spin_lift(c.n);
  detail::add_partial_cd(*first, c, PartialCD::DppL, {}, true, lift);
  detail::add_partial_cd(*first, c, PartialCD::DpR, {}, true, lift);
  first->finalize();
  return add(first, compose_banded(c, assemble_partial_cd(PartialCD::DpL, c), assemble_partial_cd(PartialCD::DppR, c), band));
}

}  // namespace cdlab
