#pragma once

#include "cdlab/geometry/grid.hpp"
#include "cdlab/spinor/vfiber.hpp"

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

// Numeric (complex double) fiber matrices on the V fiber and on the form fiber.
// Both fibers have dimension 4^n. V index: down | (up << n). Form index: A | (B << n) for eps^A ∧ epsbar^B.
namespace cdlab::fiber {

using Mat = Eigen::MatrixXcd;

inline int dim(int n) { return 1 << (2 * n); }

inline cd to_cd(const ExactScalar& s) { return s.to_complex(); }

// Matrix of w acting on V by the left or right Clifford multiplication.
inline Mat clifford(Side side, const Multivector& w) {
  const int n = w.n(), d = dim(n);
  Mat m = Mat::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    VFiber b(n);
    b.c[col] = ExactScalar(1);
    const VFiber img = v_mul(side, w, b);
    for (int row = 0; row < d; ++row)
      if (!img.c[row].is_zero()) m(row, col) = to_cd(img.c[row]);
  }
  return m;
}

struct CliffordGenerators {
  std::vector<Mat> eps, epsbar;  // c(eps_j), c(epsbar_j)
};

inline CliffordGenerators generators(Side side, int n) {
  CliffordGenerators g;
  for (const auto& cg : complex_generators(n)) {
    g.eps.push_back(clifford(side, cg.eps));
    g.epsbar.push_back(clifford(side, cg.eps_bar));
  }
  return g;
}

// Bidegree of a V basis index and of a form basis index.
inline std::pair<int, int> v_bidegree(int n, int idx) {
  const std::uint32_t mask = (1u << n) - 1;
  return {n - std::popcount(static_cast<std::uint32_t>(idx) & mask), std::popcount(static_cast<std::uint32_t>(idx) >> n)};
}
inline std::pair<int, int> form_bidegree(int n, int idx) {
  const std::uint32_t mask = (1u << n) - 1;
  return {std::popcount(static_cast<std::uint32_t>(idx) & mask), std::popcount(static_cast<std::uint32_t>(idx) >> n)};
}

// Spinor isometry from forms to V as a monomial matrix, and its inverse.
inline Mat sigma(int n) {
  const int d = dim(n);
  Mat m = Mat::Zero(d, d);
  const auto tab = sigma_table(n);
  for (int i = 0; i < d; ++i) m(tab[i].target, i) = to_cd(tab[i].factor);
  return m;
}

namespace detail {
inline int parity_below(std::uint32_t set, int j) { return std::popcount(set & ((1u << j) - 1)) & 1; }
}  // namespace detail

// eps^j ∧ (holomorphic factor), eps^j 0-based
inline Mat wedge_holo(int n, int j) {
  const int d = dim(n);
  Mat m = Mat::Zero(d, d);
  const std::uint32_t bit = 1u << j;
  for (int idx = 0; idx < d; ++idx) {
    const std::uint32_t A = idx & ((1u << n) - 1);
    if (A & bit) continue;
    m(idx | bit, idx) = detail::parity_below(A, j) ? -1.0 : 1.0;
  }
  return m;
}

// epsbar^j ∧, passing over the holomorphic block
inline Mat wedge_anti(int n, int j) {
  const int d = dim(n);
  Mat m = Mat::Zero(d, d);
  const std::uint32_t bit = 1u << (j + n);
  for (int idx = 0; idx < d; ++idx) {
    const std::uint32_t A = idx & ((1u << n) - 1), B = static_cast<std::uint32_t>(idx) >> n;
    if (idx & bit) continue;
    const int s = (std::popcount(A) + detail::parity_below(B, j)) & 1;
    m(idx | bit, idx) = s ? -1.0 : 1.0;
  }
  return m;
}

// Interior products by eps_j and epsbar_j are the adjoints of the wedges (unitary coframe).
inline Mat interior_holo(int n, int j) { return wedge_holo(n, j).adjoint(); }
inline Mat interior_anti(int n, int j) { return wedge_anti(n, j).adjoint(); }

// Form-bundle versions of the Clifford products, used where a 1-form acts by wedge or contraction.
struct FormGenerators {
  std::vector<Mat> wedge_h, wedge_a, int_h, int_a;
};
inline FormGenerators form_generators(int n) {
  FormGenerators g;
  for (int j = 0; j < n; ++j) {
    g.wedge_h.push_back(wedge_holo(n, j));
    g.wedge_a.push_back(wedge_anti(n, j));
    g.int_h.push_back(interior_holo(n, j));
    g.int_a.push_back(interior_anti(n, j));
  }
  return g;
}

// Determinant of the |I| x |J| minor of M with rows I and columns J (bitmasks).
inline cd minor_det(const Eigen::MatrixXcd& M, std::uint32_t I, std::uint32_t J) {
  const int k = std::popcount(I);
  if (k != std::popcount(J)) return 0.0;
  if (k == 0) return 1.0;
  Eigen::MatrixXcd sub(k, k);
  int r = 0;
  for (int i = 0; i < M.rows(); ++i) {
    if (!(I >> i & 1u)) continue;
    int c = 0;
    for (int j = 0; j < M.cols(); ++j)
      if (J >> j & 1u) sub(r, c++) = M(i, j);
    ++r;
  }
  return sub.determinant();
}

// Change of basis on forms induced by eps^j = sum_a P(j, a) theta^a: maps coefficients on eps^A ∧ epsbar^B
// to coefficients on theta^A' ∧ thetabar^B'. P = Finv gives frame -> dz coordinates, P = F the inverse.
inline Mat exterior_power(int n, const Eigen::MatrixXcd& P) {
  const int d = dim(n);
  const std::uint32_t full = (1u << n) - 1;
  Mat m = Mat::Zero(d, d);
  const Eigen::MatrixXcd Pc = P.conjugate();
  for (std::uint32_t A = 0; A <= full; ++A)
    for (std::uint32_t Ap = 0; Ap <= full; ++Ap) {
      if (std::popcount(A) != std::popcount(Ap)) continue;
      const cd h = minor_det(P, A, Ap);
      if (h == 0.0) continue;
      for (std::uint32_t B = 0; B <= full; ++B)
        for (std::uint32_t Bp = 0; Bp <= full; ++Bp) {
          if (std::popcount(B) != std::popcount(Bp)) continue;
          const cd a = minor_det(Pc, B, Bp);
          if (a == 0.0) continue;
          m(Ap | (Bp << n), A | (B << n)) = h * a;
        }
    }
  return m;
}

}  // namespace cdlab::fiber
