#pragma once

#include "cdlab/geometry/torus.hpp"

#include <Eigen/Dense>

#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cdlab {

struct NotPositiveDefinite : std::runtime_error {
  std::vector<double> point;
  NotPositiveDefinite(const std::string& m, std::vector<double> p) : std::runtime_error(m), point(std::move(p)) {}
};

// Unitary frame field from Gram-Schmidt of dz_1, ..., dz_n (in that order).
// eps_j = sum_a F(a, j) d/dz_a; the real frame e_{2j-1} = (eps_j + epsbar_j)/sqrt2, e_{2j} = i(eps_j - epsbar_j)/sqrt2.
struct FrameFieldGrid {
  std::shared_ptr<const Grid> grid;
  int n = 1;
  std::vector<Eigen::MatrixXcd> H;     // h_{j kbar}
  std::vector<Eigen::MatrixXcd> F;     // frame matrix, upper triangular
  std::vector<Eigen::MatrixXcd> Finv;
  std::vector<Eigen::MatrixXd> g;      // real metric in the coordinates x_1..x_{2n}
  std::vector<Eigen::MatrixXd> ginv;
  std::vector<Eigen::MatrixXd> E;      // columns: real unitary frame e_k in coordinates
  std::vector<Eigen::MatrixXcd> V;     // columns: eps_j in real coordinates (2n x n)
  ScalarField volume;                  // det h, density of dvol relative to dx

  std::size_t npts() const { return grid->npts(); }

  ScalarField frame_entry(int a, int j) const {
    ScalarField f(npts());
    for (std::size_t i = 0; i < npts(); ++i) f[i] = F[i](a, j);
    return f;
  }
};

// Complex structure on coordinates: J d/dx_{2j-1} = d/dx_{2j}.
inline Eigen::MatrixXd complex_structure(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    J(2 * j + 1, 2 * j) = 1.0;
    J(2 * j, 2 * j + 1) = -1.0;
  }
  return J;
}

inline Eigen::MatrixXd real_metric_from_h(const Eigen::MatrixXcd& h) {
  const int n = static_cast<int>(h.rows());
  Eigen::MatrixXd g(2 * n, 2 * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      g(2 * a, 2 * b) = h(a, b).real();
      g(2 * a + 1, 2 * b + 1) = h(a, b).real();
      g(2 * a, 2 * b + 1) = h(a, b).imag();
      g(2 * a + 1, 2 * b) = -h(a, b).imag();
    }
  return g;
}

inline FrameFieldGrid build_frames(const TorusHermitianStructure& s, std::shared_ptr<const Grid> grid) {
  if (grid->n() != s.n) throw std::invalid_argument("build_frames: grid and manifold dimension differ");
  for (int a = 0; a < grid->real_dim(); ++a)
    if (grid->dims()[a] < 2 * s.band_limit + 2) throw std::invalid_argument("build_frames: grid does not resolve the metric band (need N >= 2B+2)");
  const int n = s.n;
  FrameFieldGrid fr;
  fr.grid = grid;
  fr.n = n;
  const std::size_t np = grid->npts();
  fr.H.resize(np);
  fr.F.resize(np);
  fr.Finv.resize(np);
  fr.g.resize(np);
  fr.ginv.resize(np);
  fr.E.resize(np);
  fr.V.resize(np);
  fr.volume.resize(np);
  const double r2 = std::sqrt(2.0);
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < np; ++i) {
    for (int a = 0; a < 2 * n; ++a) x[a] = grid->coord(a, i);
    const Eigen::MatrixXcd h = s.evaluate(x);
    fr.H[i] = h;
    // g(eps_j, epsbar_k) = (F^T G Fbar)_{jk} = delta with G = h/2, i.e. G^T = L L^H and F = L^{-H}.
    Eigen::LLT<Eigen::MatrixXcd> llt((0.5 * h.transpose()).eval());
    if (llt.info() != Eigen::Success || h.diagonal().real().minCoeff() <= 0) {
      std::ostringstream os;
      os << "metric is not positive definite at x = (";
      for (int a = 0; a < 2 * n; ++a) os << (a ? ", " : "") << x[a];
      os << ")";
      throw NotPositiveDefinite(os.str(), x);
    }
    const Eigen::MatrixXcd L = llt.matrixL();
    const Eigen::MatrixXcd Linv = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd::Identity(n, n));
    fr.F[i] = Linv.adjoint();
    fr.Finv[i] = L.adjoint();
    fr.g[i] = real_metric_from_h(h);
    fr.ginv[i] = fr.g[i].inverse();
    fr.volume[i] = h.determinant().real();
    Eigen::MatrixXcd V(2 * n, n);
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j) {
        V(2 * a, j) = 0.5 * fr.F[i](a, j);
        V(2 * a + 1, j) = cd(0, -0.5) * fr.F[i](a, j);
      }
    fr.V[i] = V;
    Eigen::MatrixXd E(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
      E.col(2 * j) = r2 * V.col(j).real();
      E.col(2 * j + 1) = -r2 * V.col(j).imag();
    }
    fr.E[i] = E;
  }
  return fr;
}

}  // namespace cdlab
