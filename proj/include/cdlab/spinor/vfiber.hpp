#pragma once

#include "cdlab/spinor/fock.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace cdlab {

// V = S_down ⊗ S_up. Basis |C> ⊗ |B> stored at index C | (B << n); bidegree p = n - |C|, q = |B|.
struct VFiber {
  int n = 1;
  std::vector<ExactScalar> c;

  VFiber() = default;
  explicit VFiber(int n_) : n(n_), c(std::size_t{1} << (2 * n_)) {}
  static VFiber basis(int n, std::uint32_t down, std::uint32_t up, const ExactScalar& v = ExactScalar(1)) {
    VFiber x(n);
    x.c.at(down | (up << n)) = v;
    return x;
  }
  static VFiber tensor(const SpinorFiber& phi, const SpinorFiber& psi) {
    VFiber x(phi.n);
    for (std::uint32_t a = 0; a < phi.c.size(); ++a) {
      if (phi.c[a].is_zero()) continue;
      for (std::uint32_t b = 0; b < psi.c.size(); ++b)
        if (!psi.c[b].is_zero()) x.c[a | (b << phi.n)] = phi.c[a] * psi.c[b];
    }
    return x;
  }
  std::uint32_t down(std::uint32_t idx) const { return idx & ((1u << n) - 1); }
  std::uint32_t up(std::uint32_t idx) const { return idx >> n; }
  int p_of(std::uint32_t idx) const { return n - std::popcount(down(idx)); }
  int q_of(std::uint32_t idx) const { return std::popcount(up(idx)); }
  bool is_zero() const {
    for (const auto& x : c)
      if (!x.is_zero()) return false;
    return true;
  }
  bool is_bidegree(int p, int q) const {
    for (std::uint32_t i = 0; i < c.size(); ++i)
      if (!c[i].is_zero() && (p_of(i) != p || q_of(i) != q)) return false;
    return true;
  }
  VFiber& operator+=(const VFiber& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c.at(i);
    return *this;
  }
  VFiber& operator-=(const VFiber& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c.at(i);
    return *this;
  }
  friend VFiber operator+(VFiber a, const VFiber& b) { return a += b; }
  friend VFiber operator-(VFiber a, const VFiber& b) { return a -= b; }
  friend VFiber operator*(const ExactScalar& s, VFiber a) {
    for (auto& x : a.c) x = s * x;
    return a;
  }
  friend bool operator==(const VFiber& a, const VFiber& b) { return a.n == b.n && a.c == b.c; }
};

inline ExactScalar hermitian(const VFiber& a, const VFiber& b) {
  ExactScalar s;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    if (!a.c[i].is_zero() && !b.c.at(i).is_zero()) s += a.c[i] * b.c[i].conj();
  return s;
}

inline VFiber vacuum_v(int n) { return VFiber::basis(n, (1u << n) - 1, 0); }

enum class Side { L, R };

// w ._L acts on S_down. w ._R acts on S_up with the sign (-1)^{p deg w} on parity-homogeneous parts.
inline VFiber v_mul(Side side, const Multivector& w, const VFiber& xi) {
  if (w.n() != xi.n) throw std::invalid_argument("v_mul: dimension mismatch");
  const int n = xi.n;
  VFiber out(n);
  for (const auto& [mask, coef] : w.terms()) {
    const bool odd = std::popcount(mask) & 1;
    for (std::uint32_t idx = 0; idx < xi.c.size(); ++idx) {
      if (xi.c[idx].is_zero()) continue;
      std::uint32_t d = xi.down(idx), u = xi.up(idx);
      int k;
      if (side == Side::L) {
        auto [t, kk] = detail::blade_on_basis(mask, d);
        d = t;
        k = kk;
      } else {
        auto [t, kk] = detail::blade_on_basis(mask, u);
        u = t;
        k = kk + ((odd && (xi.p_of(idx) & 1)) ? 2 : 0);
      }
      out.c[d | (u << n)] += detail::phase(k) * coef * xi.c[idx];
    }
  }
  return out;
}

// Image of the basis form eps^A ∧ epsbar^B under the spinor isometry: a single basis vector times a scalar.
struct SigmaImage {
  std::uint32_t target;
  ExactScalar factor;
};

inline std::vector<SigmaImage> sigma_table(int n) {
  const std::uint32_t d = 1u << n;
  std::vector<SigmaImage> tab(std::size_t{d} * d);
  for (std::uint32_t a = 0; a < d; ++a)
    for (std::uint32_t b = 0; b < d; ++b) {
      SpinorFiber phi = form_action(FormFiber::basis(n, a, 0), phi_vacuum(n));
      SpinorFiber psi = form_action(FormFiber::basis(n, 0, b), psi_vacuum(n));
      VFiber x = VFiber::tensor(phi, psi);
      const int k = std::popcount(a) + std::popcount(b);
      for (std::uint32_t idx = 0; idx < x.c.size(); ++idx)
        if (!x.c[idx].is_zero()) tab[a | (b << n)] = {idx, ExactScalar::pow_sqrt2(-k) * x.c[idx]};
    }
  return tab;
}

// Global isometry from forms to V; each (p,q) part goes to V^{p,q}.
inline VFiber sigma_iso(const FormFiber& eta) {
  const auto tab = sigma_table(eta.n);
  VFiber out(eta.n);
  for (std::uint32_t i = 0; i < eta.c.size(); ++i)
    if (!eta.c[i].is_zero()) out.c[tab[i].target] += tab[i].factor * eta.c[i];
  return out;
}

inline VFiber sigma_iso(const FormFiber& eta, int p, int q) {
  if (!eta.is_bidegree(p, q)) throw std::invalid_argument("sigma_iso: input not of the declared bidegree");
  return sigma_iso(eta);
}

inline FormFiber sigma_inverse(const VFiber& xi) {
  const auto tab = sigma_table(xi.n);
  FormFiber out(xi.n);
  for (std::uint32_t i = 0; i < tab.size(); ++i) {
    const auto& c = xi.c[tab[i].target];
    if (!c.is_zero()) out.c[i] = c / tab[i].factor;
  }
  return out;
}

// Pairing S_down x S_up -> C normalized by phi(psi) = g(nu, mubar) when phi = nu.phi0 and psi = mubar.psi0.
// Nonzero only between |full \ B> and |B>; returns the value indexed by B.
inline std::vector<ExactScalar> duality_pairing(int n) {
  const std::uint32_t d = 1u << n;
  std::vector<ExactScalar> pr(d);
  for (std::uint32_t b = 0; b < d; ++b) {
    SpinorFiber phi = form_action(FormFiber::basis(n, b, 0), phi_vacuum(n));
    SpinorFiber psi = form_action(FormFiber::basis(n, 0, b), psi_vacuum(n));
    const ExactScalar x = phi.c[(d - 1) ^ b];
    const ExactScalar y = psi.c[b];
    pr[b] = (x * y).inverse();
  }
  return pr;
}

// Per-n cache of duality_pairing; the table is immutable once built.
inline const std::vector<ExactScalar>& cached_duality_pairing(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<ExactScalar>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, duality_pairing(n)).first;
  return it->second;
}

inline ExactScalar pair(const SpinorFiber& phi, const SpinorFiber& psi) {
  const auto& pr = cached_duality_pairing(phi.n);
  const std::uint32_t full = (1u << phi.n) - 1;
  ExactScalar s;
  for (std::uint32_t b = 0; b <= full; ++b) s += phi.c[full ^ b] * psi.c.at(b) * pr[b];
  return s;
}

// chi(phi ⊗ psi) = (psi' -> phi(psi') psi), as a dense row-major matrix on S_up.
inline std::vector<ExactScalar> chi_iso(const VFiber& xi) {
  const int n = xi.n;
  const std::uint32_t d = 1u << n, full = d - 1;
  const auto& pr = cached_duality_pairing(n);
  std::vector<ExactScalar> m(std::size_t{d} * d);
  for (std::uint32_t idx = 0; idx < xi.c.size(); ++idx) {
    if (xi.c[idx].is_zero()) continue;
    const std::uint32_t col = full ^ xi.down(idx);
    m[xi.up(idx) * d + col] += xi.c[idx] * pr[col];
  }
  return m;
}

inline VFiber chi_inverse(int n, const std::vector<ExactScalar>& m) {
  const std::uint32_t d = 1u << n, full = d - 1;
  const auto& pr = cached_duality_pairing(n);
  VFiber xi(n);
  for (std::uint32_t row = 0; row < d; ++row)
    for (std::uint32_t col = 0; col < d; ++col) {
      const auto& v = m.at(row * d + col);
      if (!v.is_zero()) xi.c[(full ^ col) | (row << n)] = v / pr[col];
    }
  return xi;
}

inline std::vector<ExactScalar> matmul(const std::vector<ExactScalar>& a, const std::vector<ExactScalar>& b, std::size_t d) {
  std::vector<ExactScalar> r(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      if (a[i * d + k].is_zero()) continue;
      for (std::size_t j = 0; j < d; ++j)
        if (!b[k * d + j].is_zero()) r[i * d + j] += a[i * d + k] * b[k * d + j];
    }
  return r;
}

// Algebra product pulled back through chi.
inline VFiber v_product(const VFiber& x, const VFiber& y) {
  const std::size_t d = std::size_t{1} << x.n;
  return chi_inverse(x.n, matmul(chi_iso(x), chi_iso(y), d));
}

// Expansion of an endomorphism of S in Clifford blades, via the trace form.
inline Multivector endomorphism_to_multivector(int n, const std::vector<ExactScalar>& m) {
  const std::uint32_t d = 1u << n;
  Multivector out(n);
  const ExactScalar inv_d = ExactScalar::rational(1, static_cast<long>(d));
  for (std::uint32_t mask = 0; mask < (1u << (2 * n)); ++mask) {
    // tr(c(e_A)^{-1} M); c(e_A)^{-1} = ± c(e_A) since e_A^2 = ±1.
    ExactScalar tr;
    for (std::uint32_t col = 0; col < d; ++col) {
      auto [t, k] = detail::blade_on_basis(mask, col);
      // row t of c(e_A) has i^k at column col; (c(e_A)^dagger M)_{col,col} = conj(i^k) M[t, col]
      if (!m[t * d + col].is_zero()) tr += detail::phase(-k) * m[t * d + col];
    }
    if (!tr.is_zero()) out.add_term(mask, inv_d * tr);
  }
  return out;
}

// Checks both identities of the one-form product lemma at a point.
inline bool one_form_product_check(const FormFiber& lambda, const FormFiber& mubar, const FormFiber& nu) {
  const int n = lambda.n;
  for (std::uint32_t i = 0; i < lambda.c.size(); ++i)
    if (!lambda.c[i].is_zero() && std::popcount(i) != 1) throw std::invalid_argument("one_form_product_check: lambda must be a 1-form");
  FormFiber l10(n), l01(n);
  for (int j = 0; j < n; ++j) {
    l10.c[1u << j] = lambda.c[1u << j];
    l01.c[1u << (n + j)] = lambda.c[1u << (n + j)];
  }
  const auto v = sharp(lambda);
  std::vector<ExactScalar> v10(2 * n), v01(2 * n);
  for (int j = 0; j < n; ++j) {
    v10[j] = v[j];
    v01[n + j] = v[n + j];
  }
  const SpinorFiber psi0 = psi_vacuum(n), phi0 = phi_vacuum(n);
  const Multivector lm = form_to_multivector(lambda);
  const SpinorFiber lhs1 = clifford_action(lm, form_action(mubar, psi0));
  const SpinorFiber rhs1 = form_action(wedge(l01, mubar), psi0) - ExactScalar(2) * form_action(interior(v01, mubar), psi0);
  const SpinorFiber lhs2 = clifford_action(lm, form_action(nu, phi0));
  const SpinorFiber rhs2 = form_action(wedge(l10, nu), phi0) - ExactScalar(2) * form_action(interior(v10, nu), phi0);
  return lhs1 == rhs1 && lhs2 == rhs2;
}

}  // namespace cdlab
