#pragma once

// Brute-force cohomology counts on the flat torus by diagonalizing symbol complexes mode by mode.
// Only the fiber exterior algebra and the grid wavenumbers are used; no operator assembly code.

#include "cdlab/geometry/grid.hpp"
#include "cdlab/ops/fiber.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cdlab::oracle {

using Mat = Eigen::MatrixXcd;

// Constant complex 1-form sum_a alpha[a] dx_a split into dz and dzbar coefficients.
struct Split {
  std::vector<cd> hol, anti;
};
inline Split split(int n, const std::vector<cd>& alpha) {
  Split s{std::vector<cd>(n, 0.0), std::vector<cd>(n, 0.0)};
  if (alpha.empty()) return s;
  const cd I(0, 1);
  for (int j = 0; j < n; ++j) {
    s.hol[j] = 0.5 * (alpha[2 * j] - I * alpha[2 * j + 1]);
    s.anti[j] = 0.5 * (alpha[2 * j] + I * alpha[2 * j + 1]);
  }
  return s;
}

inline int nullity(const Mat& M, double rel = 1e-10) {
  if (M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel * scale) ++rank;
  return static_cast<int>(M.cols()) - rank;
}

// Symbols at mode i of d/dz wedge and d/dzbar wedge, plus the twist.
struct ModeSymbols {
  Mat del, delbar;
};
inline ModeSymbols symbols(const Grid& g, std::size_t i, const fiber::FormGenerators& fg, const Split& tw) {
  const int n = g.n();
  const int d = fiber::dim(n);
  ModeSymbols s{Mat::Zero(d, d), Mat::Zero(d, d)};
  for (int j = 0; j < n; ++j) {
    s.del += (g.dz_symbol(j, i) + tw.hol[j]) * fg.wedge_h[j];
    s.delbar += (g.dzbar_symbol(j, i) + tw.anti[j]) * fg.wedge_a[j];
  }
  return s;
}

// Restriction of the columns of M to the form components of bidegree (p, q).
inline Mat restrict_cols(const Mat& M, int n, int p, int q) {
  std::vector<Eigen::Index> cols;
  for (int idx = 0; idx < fiber::dim(n); ++idx)
    if (fiber::form_bidegree(n, idx) == std::make_pair(p, q)) cols.push_back(idx);
  Mat out(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = M.col(cols[c]);
  return out;
}

inline std::vector<std::size_t> band_modes(const Grid& g, int band) {
  const std::vector<int> bands(g.real_dim(), band);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.npts(); ++i)
    if (g.in_band(i, bands)) out.push_back(i);
  return out;
}

// Total dimension of the cohomology of d + alpha∧ (alpha a constant 1-form in dx coordinates).
inline int derham_total(const Grid& g, int band, const std::vector<cd>& alpha = {}) {
  const int n = g.n();
  const auto fg = fiber::form_generators(n);
  const Split tw = split(n, alpha);
  int total = 0;
  for (std::size_t i : band_modes(g, band)) {
    const auto s = symbols(g, i, fg, tw);
    const Mat S = s.del + s.delbar;
    Mat st(2 * S.rows(), S.cols());
    st << S, Mat(S.adjoint());
    total += nullity(st);
  }
  return total;
}

// Total dimension of the cohomology of delbar + alpha^{0,1}∧.
inline int dolbeault_total(const Grid& g, int band, const std::vector<cd>& alpha = {}) {
  const int n = g.n();
  const auto fg = fiber::form_generators(n);
  const Split tw = split(n, alpha);
  int total = 0;
  for (std::size_t i : band_modes(g, band)) {
    const Mat S = symbols(g, i, fg, tw).delbar;
    Mat st(2 * S.rows(), S.cols());
    st << S, Mat(S.adjoint());
    total += nullity(st);
  }
  return total;
}

// Bott-Chern (aeppli = false) or Aeppli dimensions per bidegree, indexed p * (n + 1) + q.
inline std::vector<int> bc_aeppli_per_bidegree(const Grid& g, int band, bool aeppli) {
  const int n = g.n();
  const auto fg = fiber::form_generators(n);
  const Split none = split(n, {});
  std::vector<int> out((n + 1) * (n + 1), 0);
  for (std::size_t i : band_modes(g, band)) {
    const auto s = symbols(g, i, fg, none);
    const Mat dd = s.del * s.delbar;
    Mat st(3 * s.del.rows(), s.del.cols());
    if (!aeppli)
      st << s.del, s.delbar, Mat(dd.adjoint());
    else
      st << Mat(s.del.adjoint()), Mat(s.delbar.adjoint()), dd;
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q) out[p * (n + 1) + q] += nullity(restrict_cols(st, n, p, q));
  }
  return out;
}

}  // namespace cdlab::oracle
