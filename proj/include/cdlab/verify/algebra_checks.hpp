#pragma once

// Exact-arithmetic certification of the fiber algebra. Every comparison is equality in Q(i, sqrt2).
// n <= 3: exhaustive over bases. n >= 4: randomized with a fixed seed.

#include "cdlab/spinor/vfiber.hpp"

#include <bit>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace cdlab::algebra {

struct Tally {
  std::string id;
  long cases = 0;
  long failures = 0;
  std::string first_failure;
  bool exhaustive = true;

  void record(bool ok, const std::function<std::string()>& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first_failure = what();
  }
};

namespace detail {

inline ExactScalar random_scalar(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-4, 4);
  return ExactScalar(mpq_class(d(rng), 1 + (d(rng) & 3)), d(rng), d(rng), mpq_class(d(rng), 2));
}
inline Multivector random_vector(int n, std::mt19937_64& rng) {
  Multivector v(n);
  for (int j = 1; j <= 2 * n; ++j) v.add_term(1u << (j - 1), random_scalar(rng));
  return v;
}
inline Multivector random_multivector(int n, std::mt19937_64& rng, int terms = 6) {
  Multivector m(n);
  std::uniform_int_distribution<std::uint32_t> blade(0, (1u << (2 * n)) - 1);
  for (int t = 0; t < terms; ++t) m.add_term(blade(rng), random_scalar(rng));
  return m;
}
inline FormFiber random_form(int n, int p, int q, std::mt19937_64& rng) {
  FormFiber f(n);
  for (std::uint32_t i = 0; i < f.c.size(); ++i)
    if (std::popcount(f.holo(i)) == p && std::popcount(f.antiholo(i)) == q) f.c[i] = random_scalar(rng);
  return f;
}
inline std::string idx(std::initializer_list<long> v) {
  std::string s = "(";
  for (long x : v) s += (s.size() > 1 ? "," : "") + std::to_string(x);
  return s + ")";
}

}  // namespace detail

// e_j e_k + e_k e_j = -2 delta_jk in the algebra and on spinors.
inline Tally clifford_relations(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "clifford_relations";
  const Multivector zero(n), m2(n, ExactScalar(-2));
  if (n <= 3) {
    const std::size_t d = std::size_t{1} << n;
    std::vector<ExactScalar> neg2(d * d);
    for (std::size_t i = 0; i < d; ++i) neg2[i * d + i] = ExactScalar(-2);
    for (int j = 1; j <= 2 * n; ++j)
      for (int k = 1; k <= 2 * n; ++k) {
        const Multivector ej = Multivector::generator(n, j), ek = Multivector::generator(n, k);
        t.record(ej * ek + ek * ej == (j == k ? m2 : zero), [&] { return "algebra " + detail::idx({j, k}); });
        const auto cj = clifford_matrix(ej), ck = clifford_matrix(ek);
        auto a = matmul(cj, ck, d), b = matmul(ck, cj, d);
        for (std::size_t i = 0; i < d * d; ++i) a[i] += b[i];
        t.record(a == (j == k ? neg2 : std::vector<ExactScalar>(d * d)), [&] { return "spinor " + detail::idx({j, k}); });
      }
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  for (long c = 0; c < random_cases; ++c) {
    const Multivector v = detail::random_vector(n, rng), w = detail::random_vector(n, rng);
    ExactScalar b;
    for (int j = 1; j <= 2 * n; ++j) b += v.coeff(1u << (j - 1)) * w.coeff(1u << (j - 1));
    t.record(v * w + w * v == Multivector(n, ExactScalar(-2) * b), [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

// Clifford product of a vector with any element equals wedge minus contraction.
inline Tally graded_isomorphism(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "graded_isomorphism";
  if (n <= 3) {
    for (int j = 1; j <= 2 * n; ++j)
      for (std::uint32_t b = 0; b < (1u << (2 * n)); ++b) {
        const Multivector v = Multivector::generator(n, j), w = Multivector::blade(n, b);
        t.record(ext_mul(v, w) == clifford_mul(v, w), [&] { return detail::idx({j, b}); });
      }
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  for (long c = 0; c < random_cases; ++c) {
    const Multivector v = detail::random_vector(n, rng), w = detail::random_multivector(n, rng);
    t.record(ext_mul(v, w) == clifford_mul(v, w), [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

// Anticommutators of the complex generators: {eps, eps} = {epsbar, epsbar} = 0, {eps_r, epsbar_s} = -2 delta.
inline Tally complex_anticommutators(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "complex_anticommutators";
  const auto g = complex_generators(n);
  const Multivector zero(n);
  if (n <= 3) {
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        t.record(g[r].eps * g[s].eps + g[s].eps * g[r].eps == zero, [&] { return "eps eps " + detail::idx({r, s}); });
        t.record(g[r].eps_bar * g[s].eps_bar + g[s].eps_bar * g[r].eps_bar == zero,
                 [&] { return "epsbar epsbar " + detail::idx({r, s}); });
        t.record(g[r].eps * g[s].eps_bar + g[s].eps_bar * g[r].eps == Multivector(n, ExactScalar(r == s ? -2 : 0)),
                 [&] { return "eps epsbar " + detail::idx({r, s}); });
      }
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  for (long c = 0; c < random_cases; ++c) {
    Multivector u(n), w(n);
    ExactScalar expect;
    for (int j = 0; j < n; ++j) {
      const ExactScalar a = detail::random_scalar(rng), b = detail::random_scalar(rng);
      u += a * g[j].eps;
      w += b * g[j].eps_bar;
      expect += a * b;
    }
    t.record(u * w + w * u == Multivector(n, ExactScalar(-2) * expect) && (u * u).is_zero() && (w * w).is_zero(),
             [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

// Kahler form action: eigenvalue (2k - n) i on the C(n, k)-dimensional degree-k part.
inline Tally omega_eigenstructure(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "omega_eigenstructure";
  const Multivector om = kahler_element(n);
  const auto es = omega_eigendecomposition(n);
  t.record(static_cast<int>(es.size()) == n + 1, [] { return std::string("eigenspace count"); });
  long binom = 1;
  for (int k = 0; k <= n && k < static_cast<int>(es.size()); ++k) {
    const ExactScalar lam = ExactScalar(2L * k - n) * ExactScalar::i();
    t.record(es[k].eigenvalue == lam, [&] { return "eigenvalue k=" + std::to_string(k); });
    t.record(static_cast<long>(es[k].basis.size()) == binom, [&] { return "multiplicity k=" + std::to_string(k); });
    if (n <= 3 || random_cases == 0) {
      for (auto b : es[k].basis) {
        const SpinorFiber s = SpinorFiber::basis(n, b);
        t.record(clifford_action(om, s) == lam * s, [&] { return "basis vector " + std::to_string(b); });
      }
    }
    binom = binom * (n - k) / (k + 1);
  }
  if (n > 3) {
    t.exhaustive = false;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kd(0, n);
    for (long c = 0; c < random_cases; ++c) {
      const int k = kd(rng);
      SpinorFiber s(n);
      for (auto b : es[k].basis) s.c[b] = detail::random_scalar(rng);
      t.record(clifford_action(om, s) == ExactScalar(2L * k - n) * ExactScalar::i() * s,
               [&] { return "random case " + std::to_string(c); });
    }
  }
  return t;
}

// One-form product identities on both vacua.
inline Tally one_form_products(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "one_form_products";
  const std::uint32_t d = 1u << n;
  if (n <= 3) {
    for (int j = 0; j < 2 * n; ++j)
      for (std::uint32_t b = 0; b < d; ++b)
        for (std::uint32_t a = 0; a < d; ++a) {
          FormFiber lam(n);
          lam.c[1u << j] = ExactScalar(1);
          t.record(one_form_product_check(lam, FormFiber::basis(n, 0, b), FormFiber::basis(n, a, 0)),
                   [&] { return detail::idx({j, a, b}); });
        }
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(0, n);
  for (long c = 0; c < random_cases; ++c) {
    FormFiber lam = detail::random_form(n, 1, 0, rng) + detail::random_form(n, 0, 1, rng);
    t.record(one_form_product_check(lam, detail::random_form(n, 0, deg(rng), rng), detail::random_form(n, deg(rng), 0, rng)),
             [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

// chi is a linear bijection V -> End(S): two-sided inverse on bases (or random elements for large n).
inline Tally chi_bijection(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "chi_bijection";
  const std::uint32_t d = 1u << n;
  if (n <= 3) {
    for (std::uint32_t i = 0; i < d * d; ++i) {
      const VFiber x = VFiber::basis(n, i & (d - 1), i >> n);
      t.record(chi_inverse(n, chi_iso(x)) == x, [&] { return "V basis " + std::to_string(i); });
      std::vector<ExactScalar> m(std::size_t{d} * d);
      m[i] = ExactScalar(1);
      t.record(chi_iso(chi_inverse(n, m)) == m, [&] { return "End basis " + std::to_string(i); });
    }
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, d * d - 1);
  for (long c = 0; c < random_cases; ++c) {
    VFiber x(n);
    for (int s = 0; s < 4; ++s) x.c[pick(rng)] = detail::random_scalar(rng);
    std::vector<ExactScalar> m(std::size_t{d} * d);
    for (int s = 0; s < 4; ++s) m[pick(rng)] = detail::random_scalar(rng);
    t.record(chi_inverse(n, chi_iso(x)) == x && chi_iso(chi_inverse(n, m)) == m,
             [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

// Closed form of the algebra product of decomposable elements:
// (nu1.phi0 ⊗ mu1.psi0)(nu2.phi0 ⊗ mu2.psi0) = sqrt2^{p2+q1} g(nu1, mu2) sigma(nu2 ∧ mu1), zero unless p1 = q2.
inline Tally product_closed_form(int n, long random_cases, std::uint64_t seed) {
  Tally t;
  t.id = "product_closed_form";
  const std::uint32_t d = 1u << n;
  const auto tab = sigma_table(n);
  auto decomposable = [&](const FormFiber& nu, const FormFiber& mu) {
    return VFiber::tensor(form_action(nu, phi_vacuum(n)), form_action(mu, psi_vacuum(n)));
  };
  auto sigma = [&](const FormFiber& eta) {
    VFiber out(n);
    for (std::uint32_t i = 0; i < eta.c.size(); ++i)
      if (!eta.c[i].is_zero()) out.c[tab[i].target] += tab[i].factor * eta.c[i];
    return out;
  };
  auto check = [&](const FormFiber& nu1, const FormFiber& mu1, const FormFiber& nu2, const FormFiber& mu2, int p1, int q1,
                   int p2, int q2) {
    const ExactScalar g = p1 == q2 ? metric_pairing(nu1, mu2) : ExactScalar(0);
    const VFiber expect = ExactScalar::pow_sqrt2(p2 + q1) * g * sigma(wedge(nu2, mu1));
    return v_product(decomposable(nu1, mu1), decomposable(nu2, mu2)) == expect;
  };
  if (n <= 3) {
    for (std::uint32_t a1 = 0; a1 < d; ++a1)
      for (std::uint32_t b1 = 0; b1 < d; ++b1)
        for (std::uint32_t a2 = 0; a2 < d; ++a2)
          for (std::uint32_t b2 = 0; b2 < d; ++b2)
            t.record(check(FormFiber::basis(n, a1, 0), FormFiber::basis(n, 0, b1), FormFiber::basis(n, a2, 0),
                           FormFiber::basis(n, 0, b2), std::popcount(a1), std::popcount(b1), std::popcount(a2),
                           std::popcount(b2)),
                     [&] { return detail::idx({a1, b1, a2, b2}); });
    return t;
  }
  t.exhaustive = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(0, n);
  for (long c = 0; c < random_cases; ++c) {
    const int p1 = deg(rng), q1 = deg(rng), p2 = deg(rng);
    const int q2 = c % 2 ? p1 : deg(rng);
    t.record(check(detail::random_form(n, p1, 0, rng), detail::random_form(n, 0, q1, rng), detail::random_form(n, p2, 0, rng),
                   detail::random_form(n, 0, q2, rng), p1, q1, p2, q2),
             [&] { return "random case " + std::to_string(c); });
  }
  return t;
}

inline std::vector<Tally> run_all(int n, long random_cases, std::uint64_t seed) {
  return {clifford_relations(n, random_cases, seed),      graded_isomorphism(n, random_cases, seed + 1),
          complex_anticommutators(n, random_cases, seed + 2), omega_eigenstructure(n, random_cases, seed + 3),
          one_form_products(n, random_cases, seed + 4),   chi_bijection(n, random_cases, seed + 5),
          product_closed_form(n, random_cases, seed + 6)};
}

}  // namespace cdlab::algebra
