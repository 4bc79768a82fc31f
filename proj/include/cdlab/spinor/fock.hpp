#pragma once

#include "cdlab/clifford/multivector.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cdlab {

// Fock model of the spinor module: basis |B>, B a subset of {1..n} as a bitmask.
// c(e_{2s-1}) = a_s - a_s^+, c(e_{2s}) = -i (a_s + a_s^+), hence
// c(eps_s) = -sqrt2 a_s^+ and c(eps_bar_s) = sqrt2 a_s; the vacuum |0> is killed by every c(eps_bar_s).
struct SpinorFiber {
  int n = 1;
  std::vector<ExactScalar> c;

  SpinorFiber() = default;
  explicit SpinorFiber(int n_) : n(n_), c(std::size_t{1} << n_) {}
  static SpinorFiber basis(int n, std::uint32_t mask, const ExactScalar& v = ExactScalar(1)) {
    SpinorFiber s(n);
    s.c.at(mask) = v;
    return s;
  }
  std::size_t dim() const { return c.size(); }
  bool is_zero() const {
    for (const auto& x : c)
      if (!x.is_zero()) return false;
    return true;
  }
  SpinorFiber& operator+=(const SpinorFiber& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c.at(i);
    return *this;
  }
  SpinorFiber& operator-=(const SpinorFiber& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c.at(i);
    return *this;
  }
  friend SpinorFiber operator+(SpinorFiber a, const SpinorFiber& b) { return a += b; }
  friend SpinorFiber operator-(SpinorFiber a, const SpinorFiber& b) { return a -= b; }
  friend SpinorFiber operator*(const ExactScalar& s, SpinorFiber a) {
    for (auto& x : a.c) x = s * x;
    return a;
  }
  friend bool operator==(const SpinorFiber& a, const SpinorFiber& b) { return a.n == b.n && a.c == b.c; }
};

// Canonical vacuum psi0 = |empty> and anticanonical vacuum phi0 = |full>.
inline SpinorFiber psi_vacuum(int n) { return SpinorFiber::basis(n, 0); }
inline SpinorFiber phi_vacuum(int n) { return SpinorFiber::basis(n, (1u << n) - 1); }

// Hermitian product, linear in the first slot.
inline ExactScalar hermitian(const SpinorFiber& a, const SpinorFiber& b) {
  ExactScalar s;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    if (!a.c[i].is_zero() && !b.c.at(i).is_zero()) s += a.c[i] * b.c[i].conj();
  return s;
}

namespace detail {

inline ExactScalar phase(int k) {
  switch (k & 3) {
    case 0: return ExactScalar(1);
    case 1: return ExactScalar::i();
    case 2: return ExactScalar(-1);
    default: return -ExactScalar::i();
  }
}

// Generator e_j (1-based) on the basis vector |b>: returns (target, power of i).
inline std::pair<std::uint32_t, int> generator_on_basis(int j, std::uint32_t b) {
  const int s = (j - 1) / 2;
  const std::uint32_t bit = 1u << s;
  const int jw = std::popcount(b & (bit - 1)) & 1;  // Jordan-Wigner sign of a_s, a_s^+
  const bool occupied = b & bit;
  int k = jw ? 2 : 0;
  if ((j & 1) == 1) {
    if (!occupied) k += 2;  // -a^+
  } else {
    k += 3;  // -i
  }
  return {b ^ bit, k & 3};
}

// Monomial action of a blade: c(e_A)|b> = i^k |b'>.
inline std::pair<std::uint32_t, int> blade_on_basis(std::uint32_t mask, std::uint32_t b) {
  int k = 0;
  for (int j = 31; j >= 0; --j) {
    if (!(mask >> j & 1u)) continue;
    auto [t, kk] = generator_on_basis(j + 1, b);
    b = t;
    k += kk;
  }
  return {b, k & 3};
}

}  // namespace detail

inline SpinorFiber clifford_action(const Multivector& w, const SpinorFiber& psi) {
  if (w.n() != psi.n) throw std::invalid_argument("clifford_action: dimension mismatch");
  SpinorFiber out(psi.n);
  for (const auto& [mask, coef] : w.terms())
    for (std::uint32_t b = 0; b < psi.c.size(); ++b) {
      if (psi.c[b].is_zero()) continue;
      auto [t, k] = detail::blade_on_basis(mask, b);
      out.c[t] += detail::phase(k) * coef * psi.c[b];
    }
  return out;
}

// Dense representation matrix, row-major: M[r * dim + col].
inline std::vector<ExactScalar> clifford_matrix(const Multivector& w) {
  const std::size_t d = std::size_t{1} << w.n();
  std::vector<ExactScalar> m(d * d);
  for (const auto& [mask, coef] : w.terms())
    for (std::uint32_t b = 0; b < d; ++b) {
      auto [t, k] = detail::blade_on_basis(mask, b);
      m[t * d + b] += detail::phase(k) * coef;
    }
  return m;
}

struct OmegaEigenspace {
  ExactScalar eigenvalue;
  std::vector<std::uint32_t> basis;  // Fock basis masks spanning the eigenspace
};

// Eigenspaces of the Kahler element acting on S; the operator is diagonal in the Fock basis.
inline std::vector<OmegaEigenspace> omega_eigendecomposition(int n) {
  const Multivector w = kahler_element(n);
  const std::uint32_t d = 1u << n;
  std::vector<OmegaEigenspace> out;
  for (int k = 0; k <= n; ++k) {
    OmegaEigenspace e{ExactScalar(2L * k - n) * ExactScalar::i(), {}};
    for (std::uint32_t b = 0; b < d; ++b) {
      SpinorFiber v = clifford_action(w, SpinorFiber::basis(n, b));
      SpinorFiber expect = e.eigenvalue * SpinorFiber::basis(n, b);
      if (v == expect) e.basis.push_back(b);
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Complexified exterior algebra in a unitary coframe. Basis eps^A ∧ epsbar^B is stored at
// index A | (B << n); as a 2n-bit word the holomorphic indices come first.
struct FormFiber {
  int n = 1;
  std::vector<ExactScalar> c;

  FormFiber() = default;
  explicit FormFiber(int n_) : n(n_), c(std::size_t{1} << (2 * n_)) {}
  static FormFiber basis(int n, std::uint32_t a, std::uint32_t b, const ExactScalar& v = ExactScalar(1)) {
    FormFiber f(n);
    f.c.at(a | (b << n)) = v;
    return f;
  }
  std::uint32_t holo(std::uint32_t idx) const { return idx & ((1u << n) - 1); }
  std::uint32_t antiholo(std::uint32_t idx) const { return idx >> n; }
  bool is_zero() const {
    for (const auto& x : c)
      if (!x.is_zero()) return false;
    return true;
  }
  bool is_bidegree(int p, int q) const {
    for (std::uint32_t i = 0; i < c.size(); ++i)
      if (!c[i].is_zero() && (std::popcount(holo(i)) != p || std::popcount(antiholo(i)) != q)) return false;
    return true;
  }
  FormFiber& operator+=(const FormFiber& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c.at(i);
    return *this;
  }
  friend FormFiber operator+(FormFiber a, const FormFiber& b) { return a += b; }
  friend FormFiber operator-(FormFiber a, const FormFiber& b) {
    for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] -= b.c.at(i);
    return a;
  }
  friend FormFiber operator*(const ExactScalar& s, FormFiber a) {
    for (auto& x : a.c) x = s * x;
    return a;
  }
  friend bool operator==(const FormFiber& a, const FormFiber& b) { return a.n == b.n && a.c == b.c; }
};

inline ExactScalar hermitian(const FormFiber& a, const FormFiber& b) {
  ExactScalar s;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    if (!a.c[i].is_zero() && !b.c.at(i).is_zero()) s += a.c[i] * b.c[i].conj();
  return s;
}

inline FormFiber wedge(const FormFiber& x, const FormFiber& y) {
  FormFiber r(x.n);
  for (std::uint32_t i = 0; i < x.c.size(); ++i) {
    if (x.c[i].is_zero()) continue;
    for (std::uint32_t j = 0; j < y.c.size(); ++j) {
      if (y.c[j].is_zero() || (i & j)) continue;
      ExactScalar v = x.c[i] * y.c[j];
      if (detail::reorder_sign(i, j) < 0) v = -v;
      r.c[i | j] += v;
    }
  }
  return r;
}

// Interior product by the vector sum_j x_j eps_j + y_j epsbar_j, given as the 2n-vector (x, y).
inline FormFiber interior(const std::vector<ExactScalar>& vec, const FormFiber& f) {
  FormFiber r(f.n);
  for (std::uint32_t i = 0; i < f.c.size(); ++i) {
    if (f.c[i].is_zero()) continue;
    for (int k = 0; k < 2 * f.n; ++k) {
      if (!(i >> k & 1u) || vec.at(k).is_zero()) continue;
      ExactScalar v = vec[k] * f.c[i];
      if (std::popcount(i & ((1u << k) - 1)) & 1) v = -v;
      r.c[i ^ (1u << k)] += v;
    }
  }
  return r;
}

// Bilinear metric pairing g(nu, mubar) for nu of type (p,0) and mubar of type (0,p).
inline ExactScalar metric_pairing(const FormFiber& nu, const FormFiber& mubar) {
  ExactScalar s;
  for (std::uint32_t a = 0; a < (1u << nu.n); ++a) s += nu.c.at(a) * mubar.c.at(a << nu.n);
  return s;
}

// Metric dual of a 1-form given in the (eps^j, epsbar^j) coframe, as (x, y) vector coefficients.
inline std::vector<ExactScalar> sharp(const FormFiber& lambda) {
  const int n = lambda.n;
  std::vector<ExactScalar> v(2 * n);
  for (int j = 0; j < n; ++j) {
    v[n + j] = lambda.c.at(1u << j);          // eps^j  -> epsbar_j
    v[j] = lambda.c.at(1u << (n + j));        // epsbar^j -> eps_j
  }
  return v;
}

// Clifford image of a form: eps^a -> epsbar_a, epsbar^b -> eps_b, wedges preserved.
inline Multivector form_to_multivector(const FormFiber& f) {
  const int n = f.n;
  const auto gens = complex_generators(n);
  Multivector out(n);
  for (std::uint32_t idx = 0; idx < f.c.size(); ++idx) {
    if (f.c[idx].is_zero()) continue;
    Multivector m(n, ExactScalar(1));
    for (int k = 0; k < 2 * n; ++k) {
      if (!(idx >> k & 1u)) continue;
      m = wedge(m, k < n ? gens[k].eps_bar : gens[k - n].eps);
    }
    out += f.c[idx] * m;
  }
  return out;
}

// Clifford multiplication by a form.
inline SpinorFiber form_action(const FormFiber& f, const SpinorFiber& s) {
  return clifford_action(form_to_multivector(f), s);
}

// alpha^k(mubar) = 2^{-k/2} mubar . psi0, lands in S^k.
inline SpinorFiber alpha_iso(int k, const FormFiber& mubar) {
  if (!mubar.is_bidegree(0, k)) throw std::invalid_argument("alpha_iso: input is not of type (0,k)");
  return ExactScalar::pow_sqrt2(-k) * form_action(mubar, psi_vacuum(mubar.n));
}

// beta^k(nu) = 2^{-k/2} nu . phi0, lands in S^{n-k}.
inline SpinorFiber beta_iso(int k, const FormFiber& nu) {
  if (!nu.is_bidegree(k, 0)) throw std::invalid_argument("beta_iso: input is not of type (k,0)");
  return ExactScalar::pow_sqrt2(-k) * form_action(nu, phi_vacuum(nu.n));
}

}  // namespace cdlab
