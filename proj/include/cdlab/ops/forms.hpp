#pragma once

#include "cdlab/ops/chern_dirac.hpp"

#include <functional>
#include <memory>

namespace cdlab {

// Two independent constructions of del, delbar and their adjoints on forms written in the unitary coframe.
//  Lemma route: Chern covariant derivative plus torsion contractions.
//  Spectral route: change to dz coordinates, coordinate exterior derivative by FFT, change back; adjoints are
//  the volume-weighted discrete adjoints.
enum class FormRoute { Lemma, Spectral };

struct FormOps {
  OpPtr del, delbar, del_star, delbar_star;
  OpPtr d() const { return add(del, delbar); }
  OpPtr d_star() const { return add(del_star, delbar_star); }
};

namespace detail {

// Appends scale * Lm o nabla_X on forms (Chern connection, derivation on the coframe).
inline void add_covariant_forms(FirstOrderOp& op, const OpContext& c, const fiber::Mat& Lm, int dir,
                                const fiber::FormGenerators& fg, cd scale = 1.0) {
  const int n = c.n;
  for (int a = 0; a < n; ++a) op.add(Lm, c.dir_coeff(dir, a), c.dir_deriv(dir, a), scale);
  const int cdir = OpContext::conj_dir(dir, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      // nabla eps^k = -sum_j Gamma_kj eps^j ; nabla epsbar^k = -sum_j conj(Gamma_kj(Xbar)) epsbar^j
      op.add(Lm * fiber::Mat(fg.wedge_h[j] * fg.int_h[k]), c.gam(dir, k, j), FirstOrderOp::kNoDeriv, -scale);
      ScalarField g = c.gam(cdir, k, j);
      for (auto& v : g) v = std::conj(v);
      op.add(Lm * fiber::Mat(fg.wedge_a[j] * fg.int_a[k]), g, FirstOrderOp::kNoDeriv, -scale);
    }
}

inline ScalarField conj_field(ScalarField f) {
  for (auto& v : f) v = std::conj(v);
  return f;
}

// Pointwise fiber map given by a matrix-valued function of the grid point.
inline OpPtr pointwise_matrix_op(const OpContext& c, const std::function<fiber::Mat(std::size_t)>& m, Bundle b) {
  const std::size_t np = c.npts();
  const int d = c.dim;
  std::vector<ScalarField> fields(static_cast<std::size_t>(d * d), ScalarField(np));
  for (std::size_t i = 0; i < np; ++i) {
    const fiber::Mat mi = m(i);
    for (int r = 0; r < d; ++r)
      for (int col = 0; col < d; ++col) fields[r * d + col][i] = mi(r, col);
  }
  auto op = std::make_shared<FirstOrderOp>(c.grid, d, d, b, b);
  for (int r = 0; r < d; ++r)
    for (int col = 0; col < d; ++col) {
      const auto& f = fields[r * d + col];
      double mx = 0;
      for (const auto& v : f) mx = std::max(mx, std::abs(v));
      if (mx == 0) continue;
      fiber::Mat e = fiber::Mat::Zero(d, d);
      e(r, col) = 1.0;
      op->add(e, f);
    }
  op->finalize();
  return op;
}

}  // namespace detail

// Wedge with alpha^{1,0} (holo = true) or alpha^{0,1}, written in the frame.
inline OpPtr twist_wedge(const OpContext& c, const Twist& tw, bool holo) {
  const auto fg = fiber::form_generators(c.n);
  auto op = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::Forms, Bundle::Forms);
  for (int j = 0; j < c.n; ++j) op->add(holo ? fg.wedge_h[j] : fg.wedge_a[j], tw.on_frame(c, holo ? j : c.n + j));
  op->finalize();
  return op;
}

inline FormOps assemble_form_ops_lemma(const OpContext& c, const Twist& tw = {}) {
  const int n = c.n;
  const auto fg = fiber::form_generators(n);
  auto mk = [&] { return std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::Forms, Bundle::Forms); };
  auto del = mk(), delbar = mk(), dstar = mk(), dbstar = mk();
  for (int j = 0; j < n; ++j) {
    detail::add_covariant_forms(*del, c, fg.wedge_h[j], j, fg);
    detail::add_covariant_forms(*delbar, c, fg.wedge_a[j], n + j, fg);
    detail::add_covariant_forms(*dstar, c, fg.int_h[j], n + j, fg, -1.0);
    detail::add_covariant_forms(*dbstar, c, fg.int_a[j], j, fg, -1.0);
  }
  for (int r = 0; r < n; ++r)
    for (int s = r + 1; s < n; ++s)
      for (int m = 0; m < n; ++m) {
        const ScalarField& t = c.T(r, s, m);
        const ScalarField tb = detail::conj_field(t);
        del->add(fiber::Mat(fg.wedge_h[r] * fg.wedge_h[s] * fg.int_h[m]), t);
        delbar->add(fiber::Mat(fg.wedge_a[r] * fg.wedge_a[s] * fg.int_a[m]), tb);
        dstar->add(fiber::Mat(fg.int_h[r] * fg.int_h[s] * fg.wedge_h[m]), tb, FirstOrderOp::kNoDeriv, -1.0);
        dbstar->add(fiber::Mat(fg.int_a[r] * fg.int_a[s] * fg.wedge_a[m]), t, FirstOrderOp::kNoDeriv, -1.0);
      }
  if (!tw.empty()) {
    for (int j = 0; j < n; ++j) {
      del->add(fg.wedge_h[j], tw.on_frame(c, j));
      delbar->add(fg.wedge_a[j], tw.on_frame(c, n + j));
      dstar->add(fg.int_h[j], tw.on_frame(c, n + j), FirstOrderOp::kNoDeriv, -1.0);
      dbstar->add(fg.int_a[j], tw.on_frame(c, j), FirstOrderOp::kNoDeriv, -1.0);
    }
  }
  for (auto* p : {&del, &delbar, &dstar, &dbstar}) (*p)->finalize();
  return {del, delbar, dstar, dbstar};
}

// Frame -> coordinate and coordinate -> frame coefficient maps.
inline OpPtr frame_to_coord(const OpContext& c) {
  return detail::pointwise_matrix_op(c, [&](std::size_t i) { return fiber::exterior_power(c.n, c.fr->Finv[i]); }, Bundle::Forms);
}
inline OpPtr coord_to_frame(const OpContext& c) {
  return detail::pointwise_matrix_op(c, [&](std::size_t i) { return fiber::exterior_power(c.n, c.fr->F[i]); }, Bundle::Forms);
}

// Coordinate del (holo = true) or delbar: sum_a dz^a ∧ d/dz_a.
inline OpPtr coordinate_del(const OpContext& c, bool holo) {
  const auto fg = fiber::form_generators(c.n);
  auto op = std::make_shared<FirstOrderOp>(c.grid, c.dim, c.dim, Bundle::Forms, Bundle::Forms);
  for (int a = 0; a < c.n; ++a) op->add(holo ? fg.wedge_h[a] : fg.wedge_a[a], {}, holo ? a : c.n + a);
  op->finalize();
  return op;
}

inline FormOps assemble_form_ops_spectral(const OpContext& c, const Twist& tw = {}) {
  const OpPtr Mf = frame_to_coord(c), Mb = coord_to_frame(c);
  auto build = [&](const Twist& t) {
    OpPtr del = compose({Mb, coordinate_del(c, true), Mf});
    OpPtr delbar = compose({Mb, coordinate_del(c, false), Mf});
    if (!t.empty()) {
      del = add(del, twist_wedge(c, t, true));
      delbar = add(delbar, twist_wedge(c, t, false));
    }
    return std::make_pair(del, delbar);
  };
  const auto [del, delbar] = build(tw);
  // adjoints come from the partner twist, as for the spinor operators
  const auto [pdel, pdelbar] = tw.empty() ? std::make_pair(del, delbar) : build(tw.partner());
  return {del, delbar, weighted_adjoint(pdel, c.volume), weighted_adjoint(pdelbar, c.volume)};
}

inline FormOps assemble_form_ops(const OpContext& c, FormRoute route, const Twist& tw = {}) {
  return route == FormRoute::Lemma ? assemble_form_ops_lemma(c, tw) : assemble_form_ops_spectral(c, tw);
}

// Lichnerowicz-Novikov differential d_theta = d - theta∧ (spectral route).
inline OpPtr d_theta(const OpContext& c, const ThetaTwist& th) {
  return assemble_form_ops_spectral(c, Twist::from_theta(*c.grid, th)).d();
}

}  // namespace cdlab
