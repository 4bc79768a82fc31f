#pragma once

#include "cdlab/geometry/frames.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace cdlab {

// Chern connection, torsion, contorsion and Lee form on the grid.
// Real tensors use coordinate indices; frame quantities use the complex frame (eps_j, epsbar_j).
struct ConnectionTorsionGrid {
  std::shared_ptr<const FrameFieldGrid> frames;
  int n = 1;
  int D = 2;  // real dimension

  // Christoffel symbols: nabla_{d_a} d_b = sum_c Gam[a][b][c] d_c.
  std::vector<double> levi_civita, chern;
  std::vector<double> domega;     // d omega_{abc}
  std::vector<double> contorsion; // S_{abc} = g(S(d_a, d_b), d_c)
  std::vector<double> torsion;    // T^c_{ab}
  std::vector<double> lee;        // theta_a = sum_j T(d_a, e_j, e_j)

  // Frame connection: nabla_X eps_j = sum_k Gam(X)_{kj} eps_k with X = eps_m (dir m) or epsbar_m (dir n + m).
  std::vector<cd> gamma;
  // T(eps_r, eps_s) = sum_m tor[r][s][m] eps_m.
  std::vector<cd> tor;

  // Largest epsbar-component of nabla eps_j and of T(eps_r, eps_s); both vanish for the Chern connection.
  double type_residual = 0;
  double torsion_type_residual = 0;

  std::size_t npts() const { return frames->npts(); }
  double& real3(std::vector<double>& t, std::size_t i, int a, int b, int c) const {
    return t[((i * D + a) * D + b) * D + c];
  }
  double real3(const std::vector<double>& t, std::size_t i, int a, int b, int c) const {
    return t[((i * D + a) * D + b) * D + c];
  }
  cd gam(std::size_t i, int dir, int k, int j) const { return gamma[((i * 2 * n + dir) * n + k) * n + j]; }
  cd& gam(std::size_t i, int dir, int k, int j) { return gamma[((i * 2 * n + dir) * n + k) * n + j]; }
  Eigen::MatrixXcd gamma_matrix(std::size_t i, int dir) const {
    Eigen::MatrixXcd m(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) m(k, j) = gam(i, dir, k, j);
    return m;
  }
  cd T(std::size_t i, int r, int s, int m) const { return tor[((i * n + r) * n + s) * n + m]; }
  cd& T(std::size_t i, int r, int s, int m) { return tor[((i * n + r) * n + s) * n + m]; }
};

namespace detail {

inline std::vector<ScalarField> real_field_derivatives(const Grid& grid, const ScalarField& f) {
  std::vector<ScalarField> out;
  for (int a = 0; a < grid.real_dim(); ++a) out.push_back(grid.dx(f, a));
  return out;
}

// Complex frame matrix [V, conj V]: columns eps_1..eps_n, epsbar_1..epsbar_n in real coordinates.
inline Eigen::MatrixXcd full_complex_frame(const Eigen::MatrixXcd& V) {
  const int n = static_cast<int>(V.cols());
  Eigen::MatrixXcd W(2 * n, 2 * n);
  W.leftCols(n) = V;
  W.rightCols(n) = V.conjugate();
  return W;
}

}  // namespace detail

// Relative L2 size of the inverse metric and frame beyond the second-highest resolvable shell of each axis.
// Neither is band-limited in general, so a large value means derivatives will alias.
inline double metric_aliasing_indicator(const FrameFieldGrid& fr) {
  const Grid& grid = *fr.grid;
  const int D = grid.real_dim();
  double worst = 0;
  std::vector<int> band(D);
  for (int a = 0; a < D; ++a) band[a] = std::max(0, grid.max_band(a) - 1);
  for (int a = 0; a < D; ++a)
    for (int b = a; b < D; ++b) {
      ScalarField f(fr.npts());
      for (std::size_t i = 0; i < fr.npts(); ++i) f[i] = fr.ginv[i](a, b);
      worst = std::max(worst, std::sqrt(grid.energy_outside(f, band)));
    }
  for (int a = 0; a < fr.n; ++a)
    for (int j = 0; j < fr.n; ++j) worst = std::max(worst, std::sqrt(grid.energy_outside(fr.frame_entry(a, j), band)));
  return worst;
}

inline ConnectionTorsionGrid chern_connection(std::shared_ptr<const FrameFieldGrid> frames, double alias_threshold = 1e-11) {
  const FrameFieldGrid& fr = *frames;
  const Grid& grid = *fr.grid;
  if (metric_aliasing_indicator(fr) > alias_threshold)
    throw std::runtime_error("chern_connection: grid too coarse for the metric (spectral energy in top modes)");
  ConnectionTorsionGrid ct;
  ct.frames = frames;
  const int n = fr.n, D = 2 * n;
  ct.n = n;
  ct.D = D;
  const std::size_t np = fr.npts();
  const Eigen::MatrixXd J = complex_structure(n);

  // spectral derivatives of g and omega = g(J., .)
  std::vector<std::vector<ScalarField>> dg(D * D), dom(D * D);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      ScalarField g(np), om(np);
      for (std::size_t i = 0; i < np; ++i) {
        g[i] = fr.g[i](a, b);
        om[i] = (J.col(a).transpose() * fr.g[i].col(b))(0, 0);
      }
      dg[a * D + b] = detail::real_field_derivatives(grid, g);
      dom[a * D + b] = detail::real_field_derivatives(grid, om);
    }

  const std::size_t D3 = static_cast<std::size_t>(D) * D * D;
  ct.levi_civita.assign(np * D3, 0);
  ct.chern.assign(np * D3, 0);
  ct.domega.assign(np * D3, 0);
  ct.contorsion.assign(np * D3, 0);
  ct.torsion.assign(np * D3, 0);
  ct.lee.assign(np * D, 0);
  for (std::size_t i = 0; i < np; ++i) {
    const Eigen::MatrixXd& gi = fr.ginv[i];
    auto DG = [&](int c, int a, int b) { return dg[a * D + b][c][i].real(); };  // d_c g_ab
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c) {
          double s = 0;
          for (int d = 0; d < D; ++d) s += 0.5 * gi(c, d) * (DG(a, b, d) + DG(b, a, d) - DG(d, a, b));
          ct.real3(ct.levi_civita, i, a, b, c) = s;
          ct.real3(ct.domega, i, a, b, c) =
              dom[b * D + c][a][i].real() + dom[c * D + a][b][i].real() + dom[a * D + b][c][i].real();
        }
    // S(X,Y,Z) = -1/2 d omega(JX, Y, Z)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c) {
          double s = 0;
          for (int d = 0; d < D; ++d) s += J(d, a) * ct.real3(ct.domega, i, d, b, c);
          ct.real3(ct.contorsion, i, a, b, c) = -0.5 * s;
        }
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c) {
          double sup_ab = 0, sup_ba = 0;
          for (int d = 0; d < D; ++d) {
            sup_ab += gi(c, d) * ct.real3(ct.contorsion, i, a, b, d);
            sup_ba += gi(c, d) * ct.real3(ct.contorsion, i, b, a, d);
          }
          ct.real3(ct.chern, i, a, b, c) = ct.real3(ct.levi_civita, i, a, b, c) + sup_ab;
          ct.real3(ct.torsion, i, a, b, c) = sup_ab - sup_ba;
        }
    for (int a = 0; a < D; ++a) {
      double s = 0;
      for (int b = 0; b < D; ++b) s += ct.real3(ct.torsion, i, a, b, b);
      ct.lee[i * D + a] = s;
    }
  }

  // frame connection: nabla_X eps_j = X(V_bj) d_b + X^a V_bj Gam^c_ab d_c
  std::vector<std::vector<ScalarField>> dV(D * n);
  for (int b = 0; b < D; ++b)
    for (int j = 0; j < n; ++j) {
      ScalarField v(np);
      for (std::size_t i = 0; i < np; ++i) v[i] = fr.V[i](b, j);
      dV[b * n + j] = detail::real_field_derivatives(grid, v);
    }
  ct.gamma.assign(np * 2 * n * n * n, 0);
  ct.tor.assign(np * n * n * n, 0);
  for (std::size_t i = 0; i < np; ++i) {
    const Eigen::MatrixXcd W = detail::full_complex_frame(fr.V[i]);
    const Eigen::MatrixXcd Winv = W.inverse();
    for (int dir = 0; dir < 2 * n; ++dir) {
      const Eigen::VectorXcd X = W.col(dir);
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd Y = Eigen::VectorXcd::Zero(D);
        for (int b = 0; b < D; ++b)
          for (int a = 0; a < D; ++a) Y(b) += X(a) * dV[b * n + j][a][i];
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c) Y(c) += X(a) * fr.V[i](b, j) * ct.real3(ct.chern, i, a, b, c);
        const Eigen::VectorXcd comp = Winv * Y;
        for (int k = 0; k < n; ++k) ct.gam(i, dir, k, j) = comp(k);
        for (int k = 0; k < n; ++k) ct.type_residual = std::max(ct.type_residual, std::abs(comp(n + k)));
      }
    }
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        Eigen::VectorXcd Y = Eigen::VectorXcd::Zero(D);
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c) Y(c) += fr.V[i](a, r) * fr.V[i](b, s) * ct.real3(ct.torsion, i, a, b, c);
        const Eigen::VectorXcd comp = Winv * Y;
        for (int m = 0; m < n; ++m) {
          ct.T(i, r, s, m) = comp(m);
          ct.torsion_type_residual = std::max(ct.torsion_type_residual, std::abs(comp(n + m)));
        }
      }
  }
  return ct;
}

// Independent route: Chern connection of T^{1,0} from theta = dG G^{-1}, no Levi-Civita involved.
// Returns the frame connection in the same layout as ConnectionTorsionGrid::gamma.
inline std::vector<cd> holomorphic_chern_gamma(const FrameFieldGrid& fr) {
  const Grid& grid = *fr.grid;
  const int n = fr.n;
  const std::size_t np = fr.npts();
  // dG_{bd}/dz_a with G = h/2
  std::vector<ScalarField> dzG(n * n * n), dzF(n * n * n), dzbF(n * n * n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      ScalarField G(np), Fe(np);
      for (std::size_t i = 0; i < np; ++i) {
        G[i] = 0.5 * fr.H[i](b, d);
        Fe[i] = fr.F[i](b, d);
      }
      for (int a = 0; a < n; ++a) {
        dzG[(a * n + b) * n + d] = grid.dz(G, a);
        dzF[(a * n + b) * n + d] = grid.dz(Fe, a);
        dzbF[(a * n + b) * n + d] = grid.dzbar(Fe, a);
      }
    }
  std::vector<cd> out(np * 2 * n * n * n);
  for (std::size_t i = 0; i < np; ++i) {
    const Eigen::MatrixXcd Ginv = (0.5 * fr.H[i]).inverse();
    const Eigen::MatrixXcd& F = fr.F[i];
    const Eigen::MatrixXcd& Fi = fr.Finv[i];
    // Christoffel Gam^c_{ab} = sum_d d_a G_{bd} Ginv_{dc}
    std::vector<cd> chr(n * n * n, 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          cd s = 0;
          for (int d = 0; d < n; ++d) s += dzG[(a * n + b) * n + d][i] * Ginv(d, c);
          chr[(a * n + b) * n + c] = s;
        }
    for (int dir = 0; dir < 2 * n; ++dir) {
      const bool holo = dir < n;
      const int m = holo ? dir : dir - n;
      // X = eps_m = sum_b F_bm d_b, or X = epsbar_m = sum_b conj(F_bm) dbar_b
      Eigen::MatrixXcd Y(n, n);  // Y(c, j): d_c-component of nabla_X eps_j
      for (int c = 0; c < n; ++c)
        for (int j = 0; j < n; ++j) {
          cd s = 0;
          for (int b = 0; b < n; ++b) {
            if (holo) {
              s += F(b, m) * dzF[(b * n + c) * n + j][i];
              for (int a = 0; a < n; ++a) s += F(b, m) * chr[(b * n + a) * n + c] * F(a, j);
            } else {
              s += std::conj(F(b, m)) * dzbF[(b * n + c) * n + j][i];
            }
          }
          Y(c, j) = s;
        }
      const Eigen::MatrixXcd Gm = Fi * Y;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) out[((i * 2 * n + dir) * n + k) * n + j] = Gm(k, j);
    }
  }
  return out;
}

// Lee form by the second route: theta = -J d^* omega with d^* the L2 adjoint of d (spectral divergence).
inline std::vector<double> lee_form_codifferential(const ConnectionTorsionGrid& ct) {
  const FrameFieldGrid& fr = *ct.frames;
  const Grid& grid = *fr.grid;
  const int D = ct.D;
  const std::size_t np = fr.npts();
  const Eigen::MatrixXd J = complex_structure(ct.n);
  // V^{ab} = sqrt(g) omega^{ab}; (d^* omega)^b = -(1/sqrt g) d_a V^{ab}
  std::vector<ScalarField> up(D * D, ScalarField(np));
  for (std::size_t i = 0; i < np; ++i) {
    Eigen::MatrixXd om(D, D);
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) om(a, b) = (J.col(a).transpose() * fr.g[i].col(b))(0, 0);
    const Eigen::MatrixXd omu = fr.ginv[i] * om * fr.ginv[i].transpose();
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) up[a * D + b][i] = fr.volume[i].real() * omu(a, b);
  }
  std::vector<ScalarField> div(D, ScalarField(np, 0));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      ScalarField d = grid.dx(up[a * D + b], a);
      for (std::size_t i = 0; i < np; ++i) div[b][i] += d[i];
    }
  std::vector<double> out(np * D);
  for (std::size_t i = 0; i < np; ++i) {
    Eigen::VectorXd vup(D);
    for (int b = 0; b < D; ++b) vup(b) = -div[b][i].real() / fr.volume[i].real();
    const Eigen::VectorXd dstar = fr.g[i] * vup;  // lower the index
    // J acts on 1-forms by (J lambda)(X) = lambda(JX)
    for (int a = 0; a < D; ++a) {
      double s = 0;
      for (int b = 0; b < D; ++b) s += dstar(b) * J(b, a);
      out[i * D + a] = -s;
    }
  }
  return out;
}

}  // namespace cdlab
