#pragma once

#include "cdlab/geometry/connection.hpp"
#include "cdlab/ops/fiber.hpp"
#include "cdlab/ops/linear_op.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdlab {

// Frame, connection and torsion coefficients unpacked into scalar fields for operator assembly.
struct OpContext {
  std::shared_ptr<const ConnectionTorsionGrid> ct;
  std::shared_ptr<const FrameFieldGrid> fr;
  std::shared_ptr<const Grid> grid;
  int n = 1;
  int dim = 4;
  std::vector<ScalarField> F;      // F[a * n + j] = F(a, j)
  std::vector<ScalarField> gamma;  // gamma[(dir * n + k) * n + j]
  std::vector<ScalarField> tor;    // tor[(r * n + s) * n + m] = T^m_rs
  ScalarField volume;
  std::vector<Multivector> eps, epsbar;

  std::size_t npts() const { return grid->npts(); }

  // Coefficient of d/dz_a (dir < n) or d/dzbar_a (dir >= n) in the frame vector of direction dir.
  ScalarField dir_coeff(int dir, int a) const {
    if (dir < n) return F[a * n + dir];
    ScalarField f = F[a * n + dir - n];
    for (auto& v : f) v = std::conj(v);
    return f;
  }
  int dir_deriv(int dir, int a) const { return dir < n ? a : n + a; }
  static int conj_dir(int dir, int n) { return dir < n ? dir + n : dir - n; }
  const ScalarField& gam(int dir, int k, int j) const { return gamma[(dir * n + k) * n + j]; }
  const ScalarField& T(int r, int s, int m) const { return tor[(r * n + s) * n + m]; }
  // Exact Clifford vector of direction dir.
  const Multivector& vec(int dir) const { return dir < n ? eps[dir] : epsbar[dir - n]; }
};

inline std::shared_ptr<const OpContext> make_context(std::shared_ptr<const ConnectionTorsionGrid> ct) {
  auto c = std::make_shared<OpContext>();
  c->ct = ct;
  c->fr = ct->frames;
  c->grid = ct->frames->grid;
  const int n = ct->n;
  c->n = n;
  c->dim = fiber::dim(n);
  const std::size_t np = c->grid->npts();
  c->F.assign(n * n, ScalarField(np));
  c->gamma.assign(2 * n * n * n, ScalarField(np));
  c->tor.assign(n * n * n, ScalarField(np));
  c->volume = c->fr->volume;
  for (std::size_t i = 0; i < np; ++i) {
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j) c->F[a * n + j][i] = c->fr->F[i](a, j);
    for (int d = 0; d < 2 * n; ++d)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) c->gamma[(d * n + k) * n + j][i] = ct->gam(i, d, k, j);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int m = 0; m < n; ++m) c->tor[(r * n + s) * n + m][i] = ct->T(i, r, s, m);
  }
  for (const auto& g : complex_generators(n)) {
    c->eps.push_back(g.eps);
    c->epsbar.push_back(g.eps_bar);
  }
  return c;
}

// Closed real 1-form theta = sum_a period[a] dx_a + df, with f a finite real Fourier sum.
struct ThetaTwist {
  struct Mode {
    std::vector<int> k;  // integer wave vector, one entry per real axis
    double cos_amp = 0, sin_amp = 0;
  };
  std::vector<double> period;
  std::vector<Mode> f_modes;

  bool is_exact() const {
    for (double p : period)
      if (p != 0.0) return false;
    return true;
  }
  int band() const {
    int b = 0;
    for (const auto& m : f_modes)
      for (int k : m.k) b = std::max(b, std::abs(k));
    return b;
  }
  ScalarField f(const Grid& g) const {
    ScalarField out(g.npts(), 0.0);
    for (const auto& m : f_modes) {
      if (static_cast<int>(m.k.size()) != g.real_dim()) throw std::invalid_argument("ThetaTwist: mode dimension");
      for (std::size_t i = 0; i < g.npts(); ++i) {
        double ph = 0;
        for (int a = 0; a < g.real_dim(); ++a) ph += m.k[a] * g.coord(a, i);
        ph *= 2 * std::numbers::pi;
        out[i] += m.cos_amp * std::cos(ph) + m.sin_amp * std::sin(ph);
      }
    }
    return out;
  }
  // Components theta_a on dx_a; d theta = 0 holds by construction.
  std::vector<ScalarField> components(const Grid& g) const {
    if (!period.empty() && static_cast<int>(period.size()) != g.real_dim())
      throw std::invalid_argument("ThetaTwist: period vector must have one entry per real axis");
    const ScalarField fv = f(g);
    std::vector<ScalarField> th;
    for (int a = 0; a < g.real_dim(); ++a) {
      ScalarField d = g.dx(fv, a);
      const double c = period.empty() ? 0.0 : period[a];
      for (auto& v : d) v = cd(v.real() + c, 0.0);
      th.push_back(std::move(d));
    }
    return th;
  }
};

// Complex connection 1-form alpha of a Hermitian line bundle W = trivial, D^W = d + alpha.
// A theta-twist of the V bundle uses alpha = -theta; a unitary U(1) twist uses alpha = i A with A real.
struct Twist {
  std::vector<ScalarField> alpha;  // coefficients on dx_a; empty: untwisted
  ScalarField weight;              // density of the natural Hermitian metric of W (empty: 1)

  bool empty() const { return alpha.empty(); }

  static Twist none() { return {}; }
  static Twist from_theta(const Grid& g, const ThetaTwist& th) {
    Twist t;
    for (auto& c : th.components(g)) {
      for (auto& v : c) v = -v;
      t.alpha.push_back(std::move(c));
    }
    // nabla^{-theta} is metric for h(1,1) = exp(-2 f) when theta = df
    if (th.is_exact() && !th.f_modes.empty()) {
      const ScalarField f = th.f(g);
      t.weight.resize(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) t.weight[i] = std::exp(-2.0 * f[i].real());
    }
    return t;
  }
  static Twist unitary(std::vector<ScalarField> A) {
    Twist t;
    for (auto& c : A) {
      for (auto& v : c) v = cd(0.0, v.real());
      t.alpha.push_back(std::move(c));
    }
    return t;
  }
  // -conj(alpha): the twist whose operators are adjoint to ours in the trivial metric.
  Twist partner() const {
    Twist t;
    for (const auto& c : alpha) {
      ScalarField d(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) d[i] = -std::conj(c[i]);
      t.alpha.push_back(std::move(d));
    }
    t.weight = weight.empty() ? ScalarField{} : ScalarField(weight.size(), 1.0);
    if (!weight.empty())
      for (std::size_t i = 0; i < weight.size(); ++i) t.weight[i] = 1.0 / weight[i];
    return t;
  }
  // alpha evaluated on eps_dir (dir < n) or epsbar_{dir-n}.
  ScalarField on_frame(const OpContext& c, int dir) const {
    ScalarField out(c.npts(), 0.0);
    if (empty()) return out;
    const int n = c.n;
    for (std::size_t i = 0; i < c.npts(); ++i) {
      cd s = 0;
      for (int a = 0; a < 2 * n; ++a) {
        const cd v = dir < n ? c.fr->V[i](a, dir) : std::conj(c.fr->V[i](a, dir - n));
        s += v * alpha[a][i];
      }
      out[i] = s;
    }
    return out;
  }
};

// Total density for the L2 product of twisted sections: volume times the line-bundle weight.
inline ScalarField section_density(const OpContext& c, const Twist& t = {}) {
  ScalarField w = c.volume;
  if (!t.weight.empty())
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= t.weight[i];
  return w;
}

}  // namespace cdlab
