#pragma once

#include "cdlab/clifford/exact_scalar.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cdlab {

// Basis blade e_{i1}...e_{ik} with i1 < ... < ik; bit (j-1) of mask stands for e_j.
struct Blade {
  std::uint32_t mask = 0;
  int grade() const { return std::popcount(mask); }
  friend bool operator<(Blade a, Blade b) { return a.mask < b.mask; }
  friend bool operator==(Blade a, Blade b) { return a.mask == b.mask; }
};

namespace detail {

// Sign from bringing e_A e_B into sorted order: each generator of B passes the larger ones of A.
inline int reorder_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  for (std::uint32_t bb = b; bb; bb &= bb - 1) {
    int j = std::countr_zero(bb);
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

// e_A e_B = sign * e_{A xor B}; repeated generators square to -1.
inline int blade_product_sign(std::uint32_t a, std::uint32_t b) {
  int s = reorder_sign(a, b);
  if (std::popcount(a & b) & 1) s = -s;
  return s;
}

}  // namespace detail

class Multivector {
 public:
  using Terms = std::map<std::uint32_t, ExactScalar>;

  explicit Multivector(int n) : n_(n) {
    if (n < 1 || n > 15) throw std::invalid_argument("Multivector: n out of range");
  }
  Multivector(int n, const ExactScalar& scalar) : Multivector(n) { add_term(0, scalar); }

  static Multivector generator(int n, int j) {
    if (j < 1 || j > 2 * n) throw std::invalid_argument("Multivector: generator index out of range");
    Multivector m(n);
    m.add_term(1u << (j - 1), ExactScalar(1));
    return m;
  }
  static Multivector blade(int n, std::uint32_t mask, const ExactScalar& c = ExactScalar(1)) {
    Multivector m(n);
    m.add_term(mask, c);
    return m;
  }

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  ExactScalar coeff(std::uint32_t mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? ExactScalar() : it->second;
  }

  void add_term(std::uint32_t mask, const ExactScalar& c) {
    if (mask >> dim()) throw std::invalid_argument("Multivector: blade index exceeds 2n");
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(mask, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  bool is_homogeneous(int k) const {
    for (const auto& [m, c] : terms_)
      if (std::popcount(m) != k) return false;
    return true;
  }

  Multivector conj() const {
    Multivector r(n_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, c.conj());
    return r;
  }

  Multivector& operator+=(const Multivector& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Multivector& operator-=(const Multivector& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator-(const Multivector& a) { return ExactScalar(-1) * a; }
  friend Multivector operator*(const ExactScalar& s, const Multivector& a) {
    Multivector r(a.n_);
    if (s.is_zero()) return r;
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, s * c);
    return r;
  }
  friend bool operator==(const Multivector& a, const Multivector& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Multivector& a, const Multivector& b) { return !(a == b); }

  void check_same(const Multivector& o) const {
    if (o.n_ != n_) throw std::invalid_argument("Multivector: dimension mismatch");
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += c.str();
      for (int j = 0; j < dim(); ++j)
        if (m >> j & 1u) s += "e" + std::to_string(j + 1);
    }
    return s;
  }

 private:
  int n_;
  Terms terms_;
};

inline Multivector clifford_mul(const Multivector& a, const Multivector& b) {
  a.check_same(b);
  Multivector r(a.n());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      ExactScalar c = ca * cb;
      if (detail::blade_product_sign(ma, mb) < 0) c = -c;
      r.add_term(ma ^ mb, c);
    }
  return r;
}

inline Multivector operator*(const Multivector& a, const Multivector& b) { return clifford_mul(a, b); }

// Exterior product of arbitrary multivectors.
inline Multivector wedge(const Multivector& a, const Multivector& b) {
  a.check_same(b);
  Multivector r(a.n());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      ExactScalar c = ca * cb;
      if (detail::reorder_sign(ma, mb) < 0) c = -c;
      r.add_term(ma | mb, c);
    }
  return r;
}

// Metric contraction v ⌟ w for a grade-1 v, with g(e_j, e_k) = delta_jk.
inline Multivector contract(const Multivector& v, const Multivector& w) {
  v.check_same(w);
  if (!v.is_homogeneous(1)) throw std::invalid_argument("contract: first argument must have grade 1");
  Multivector r(v.n());
  for (const auto& [mv, cv] : v.terms())
    for (const auto& [mw, cw] : w.terms()) {
      if (!(mv & mw)) continue;
      int before = std::popcount(mw & (mv - 1));
      ExactScalar c = cv * cw;
      if (before & 1) c = -c;
      r.add_term(mw ^ mv, c);
    }
  return r;
}

// v·w = v∧w − v⌟w for grade-1 v.
inline Multivector ext_mul(const Multivector& v, const Multivector& w) {
  if (!v.is_homogeneous(1)) throw std::invalid_argument("ext_mul: first argument must have grade 1");
  return wedge(v, w) - contract(v, w);
}

inline Multivector grade_project(const Multivector& a, int k) {
  if (k < 0 || k > a.dim()) throw std::invalid_argument("grade_project: grade out of range");
  Multivector r(a.n());
  for (const auto& [m, c] : a.terms())
    if (std::popcount(m) == k) r.add_term(m, c);
  return r;
}

// Parity projections (even: eo = 0, odd: eo = 1).
inline Multivector parity_project(const Multivector& a, int eo) {
  Multivector r(a.n());
  for (const auto& [m, c] : a.terms())
    if ((std::popcount(m) & 1) == eo) r.add_term(m, c);
  return r;
}

struct ComplexGenerator {
  Multivector eps;      // (e_{2s-1} - i e_{2s}) / sqrt2
  Multivector eps_bar;  // (e_{2s-1} + i e_{2s}) / sqrt2
};

inline std::vector<ComplexGenerator> complex_generators(int n) {
  if (n < 1) throw std::invalid_argument("complex_generators: n must be positive");
  std::vector<ComplexGenerator> out;
  const ExactScalar h = ExactScalar::inv_sqrt2();
  const ExactScalar ih = ExactScalar::i() * h;
  for (int s = 1; s <= n; ++s) {
    Multivector e1 = Multivector::generator(n, 2 * s - 1);
    Multivector e2 = Multivector::generator(n, 2 * s);
    out.push_back({h * e1 - ih * e2, h * e1 + ih * e2});
  }
  return out;
}

// Kahler form Σ e_{2s-1} e_{2s} as a Clifford element.
inline Multivector kahler_element(int n) {
  Multivector w(n);
  for (int s = 1; s <= n; ++s) w += clifford_mul(Multivector::generator(n, 2 * s - 1), Multivector::generator(n, 2 * s));
  return w;
}

}  // namespace cdlab
