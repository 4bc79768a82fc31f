#include "cdlab/geometry/connection.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace cdlab;

namespace {

struct Built {
  std::shared_ptr<Grid> grid;
  std::shared_ptr<FrameFieldGrid> frames;
  ConnectionTorsionGrid ct;
};

// Geometry builds are shared across tests; keyed by a short label.
const Built& build(const std::string& label, const TorusHermitianStructure& s, std::vector<int> dims) {
  static std::map<std::string, Built> cache;
  auto it = cache.find(label);
  if (it != cache.end()) return it->second;
  Built b;
  b.grid = std::make_shared<Grid>(s.n, dims);
  b.frames = std::make_shared<FrameFieldGrid>(build_frames(s, b.grid));
  b.ct = chern_connection(b.frames);
  return cache.emplace(label, std::move(b)).first->second;
}

// Diagonal examples have non-polynomial frames, so the varying axis gets a finer grid.
const Built& flat2() { return build("flat2", TorusHermitianStructure::flat(2), {8, 8, 8, 8}); }
const Built& kahler() { return build("kahler", examples::kahler_diagonal(0.1), {24, 4, 4, 4}); }
const Built& nk_diag() { return build("nkdiag", examples::nonkahler_diagonal(0.1), {4, 4, 24, 4}); }
const Built& nk_unip() { return build("nkunip", examples::nonkahler_unipotent(0.1), {12, 12, 12, 12}); }

std::vector<const Built*> all_examples() { return {&flat2(), &kahler(), &nk_diag(), &nk_unip()}; }
std::vector<const Built*> nonkahler_examples() { return {&nk_diag(), &nk_unip()}; }

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Torsion of the Chern connection from the holomorphic Christoffel route, frame components T^m_{rs}.
std::vector<cd> oracle_torsion(const FrameFieldGrid& fr, const std::vector<cd>& gam) {
  const Grid& grid = *fr.grid;
  const int n = fr.n;
  const std::size_t np = fr.npts();
  std::vector<ScalarField> dzF(n * n * n);  // d_{z_a} F_{cj}
  for (int c = 0; c < n; ++c)
    for (int j = 0; j < n; ++j) {
      ScalarField f(np);
      for (std::size_t i = 0; i < np; ++i) f[i] = fr.F[i](c, j);
      for (int a = 0; a < n; ++a) dzF[(a * n + c) * n + j] = grid.dz(f, a);
    }
  auto G = [&](std::size_t i, int dir, int k, int j) { return gam[((i * 2 * n + dir) * n + k) * n + j]; };
  std::vector<cd> out(np * n * n * n);
  for (std::size_t i = 0; i < np; ++i)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        // Lie bracket [eps_r, eps_s] in coordinates d_{z_c}
        Eigen::VectorXcd br = Eigen::VectorXcd::Zero(n);
        for (int c = 0; c < n; ++c)
          for (int a = 0; a < n; ++a)
            br(c) += fr.F[i](a, r) * dzF[(a * n + c) * n + s][i] - fr.F[i](a, s) * dzF[(a * n + c) * n + r][i];
        const Eigen::VectorXcd brf = fr.Finv[i] * br;
        for (int m = 0; m < n; ++m) out[((i * n + r) * n + s) * n + m] = G(i, r, m, s) - G(i, s, m, r) - brf(m);
      }
  return out;
}

}  // namespace

TEST(Frames, FlatFrameIsScaledCoordinateFrame) {
  const auto& b = flat2();
  for (std::size_t i = 0; i < b.frames->npts(); ++i) {
    EXPECT_LT((b.frames->F[i] - std::sqrt(2.0) * Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-14);
    EXPECT_LT((b.frames->E[i] - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-14);
  }
}

TEST(Frames, DiagonalPerturbationStaysDiagonal) {
  TorusHermitianStructure s;
  s.n = 2;
  s.band_limit = 1;
  s.add_hermitian_pair(0, 0, {0, 1, 0, 0}, 0.05);
  auto grid = std::make_shared<Grid>(2, 6);
  const auto fr = build_frames(s, grid);
  for (std::size_t i = 0; i < fr.npts(); ++i) {
    const double h11 = 1 + 0.1 * std::cos(2 * M_PI * grid->coord(1, i));
    EXPECT_NEAR(std::abs(fr.F[i](0, 0) - std::sqrt(2.0 / h11)), 0, 1e-14);
    EXPECT_NEAR(std::abs(fr.F[i](0, 1)), 0, 1e-15);
    EXPECT_NEAR(std::abs(fr.F[i](1, 0)), 0, 1e-15);
    EXPECT_NEAR(std::abs(fr.F[i](1, 1) - std::sqrt(2.0)), 0, 1e-14);
  }
}

TEST(Frames, UnitaryAndJAdapted) {
  const Eigen::MatrixXd J = complex_structure(2);
  for (const Built* b : all_examples()) {
    const auto& fr = *b->frames;
    for (std::size_t i = 0; i < fr.npts(); ++i) {
      const Eigen::MatrixXd& E = fr.E[i];
      EXPECT_LT((E.transpose() * fr.g[i] * E - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
      for (int j = 0; j < 2; ++j) EXPECT_LT((J * E.col(2 * j) - E.col(2 * j + 1)).norm(), 1e-12);
      // g(eps_j, epsbar_k) = delta_jk and g(eps_j, eps_k) = 0
      const Eigen::MatrixXcd& V = fr.V[i];
      const Eigen::MatrixXcd herm = V.transpose() * fr.g[i] * V.conjugate();
      const Eigen::MatrixXcd same = V.transpose() * fr.g[i] * V;
      EXPECT_LT((herm - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(same.cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Frames, RejectsUnderResolvedGridAndIndefiniteMetric) {
  auto s = examples::nonkahler_unipotent();
  EXPECT_THROW(build_frames(s, std::make_shared<Grid>(2, 4)), std::invalid_argument);
  TorusHermitianStructure bad;
  bad.n = 1;
  bad.band_limit = 1;
  bad.add_hermitian_pair(0, 0, {1, 0}, 0.75);  // h = 1 + 1.5 cos(2 pi x1)
  try {
    build_frames(bad, std::make_shared<Grid>(1, 8));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    ASSERT_EQ(e.point.size(), 2u);
    EXPECT_LT(1 + 1.5 * std::cos(2 * M_PI * e.point[0]), 0);
  }
}

TEST(Connection, FlatIsTrivial) {
  const auto& ct = flat2().ct;
  EXPECT_LT(max_abs(ct.chern), 1e-14);
  EXPECT_LT(max_abs(ct.torsion), 1e-14);
  EXPECT_LT(max_abs(ct.contorsion), 1e-14);
  EXPECT_LT(max_abs(ct.lee), 1e-14);
  for (cd z : ct.gamma) EXPECT_LT(std::abs(z), 1e-14);
}

TEST(Connection, RefusesAliasedGrid) {
  {
    auto fr = std::make_shared<FrameFieldGrid>(build_frames(examples::nonkahler_diagonal(0.1), std::make_shared<Grid>(2, 12)));
    EXPECT_THROW(chern_connection(fr), std::runtime_error);
  }
  // 1/(1 + 0.9 cos) has slowly decaying spectrum: the inverse metric cannot be resolved on a 6-point grid
  TorusHermitianStructure s;
  s.n = 1;
  s.band_limit = 1;
  s.add_hermitian_pair(0, 0, {0, 1}, 0.45);
  auto grid = std::make_shared<Grid>(1, 6);
  auto fr = std::make_shared<FrameFieldGrid>(build_frames(s, grid));
  EXPECT_THROW(chern_connection(fr), std::runtime_error);
}

TEST(Connection, KahlerHasNoTorsion) {
  const auto& ct = kahler().ct;
  EXPECT_LT(max_abs(ct.domega), 1e-10);
  EXPECT_LT(max_abs(ct.torsion), 1e-10);
  EXPECT_LT(max_abs(ct.lee), 1e-9);
  // but the connection itself is not trivial
  EXPECT_GT(max_abs(ct.chern), 1e-2);
}

TEST(Connection, NonKahlerTorsionIdentities) {
  const Eigen::MatrixXd J = complex_structure(2);
  for (const Built* b : nonkahler_examples()) {
    const auto& ct = b->ct;
    const auto& fr = *b->frames;
    const int D = 4;
    double tnorm = max_abs(ct.torsion);
    EXPECT_GT(tnorm, 1e-2);
    double r1 = 0, r2 = 0, r3 = 0, scale = 0;
    for (std::size_t i = 0; i < fr.npts(); ++i) {
      // lowered torsion T(X,Y,Z)
      auto Tlow = [&](int a, int bb, int c) {
        double s = 0;
        for (int d = 0; d < D; ++d) s += ct.real3(ct.torsion, i, a, bb, d) * fr.g[i](d, c);
        return s;
      };
      auto S = [&](int a, int bb, int c) { return ct.real3(ct.contorsion, i, a, bb, c); };
      auto dw = [&](int a, int bb, int c) { return ct.real3(ct.domega, i, a, bb, c); };
      for (int a = 0; a < D; ++a)
        for (int bb = 0; bb < D; ++bb)
          for (int c = 0; c < D; ++c) {
            scale = std::max(scale, std::abs(Tlow(a, bb, c)));
            r1 = std::max(r1, std::abs(Tlow(a, bb, c) - (S(a, bb, c) - S(bb, a, c))));
            r2 = std::max(r2, std::abs(2 * S(a, bb, c) - (Tlow(a, bb, c) - Tlow(bb, c, a) + Tlow(c, a, bb))));
            double jdw = 0;
            for (int d = 0; d < D; ++d) jdw += J(d, a) * dw(d, bb, c) + J(d, bb) * dw(a, d, c);
            r3 = std::max(r3, std::abs(Tlow(a, bb, c) + 0.5 * jdw));
          }
    }
    EXPECT_LT(r1 / scale, 1e-10);
    EXPECT_LT(r2 / scale, 1e-10);
    EXPECT_LT(r3 / scale, 1e-10);
  }
}

TEST(Connection, TorsionIsComplexBilinear) {
  const Eigen::MatrixXd J = complex_structure(2);
  for (const Built* b : nonkahler_examples()) {
    const auto& ct = b->ct;
    double res = 0;
    for (std::size_t i = 0; i < ct.npts(); ++i) {
      Eigen::MatrixXd Tm[4];
      for (int a = 0; a < 4; ++a) {
        Tm[a].resize(4, 4);  // column b holds T(d_a, d_b)
        for (int bb = 0; bb < 4; ++bb)
          for (int c = 0; c < 4; ++c) Tm[a](c, bb) = ct.real3(ct.torsion, i, a, bb, c);
      }
      for (int a = 0; a < 4; ++a) {
        // T(J d_a, .) = sum_d J(d,a) T(d_d, .)
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(4, 4);
        for (int d = 0; d < 4; ++d) lhs += J(d, a) * Tm[d];
        const Eigen::MatrixXd rhs = Tm[a] * J;
        res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
        res = std::max(res, (lhs - J * Tm[a]).cwiseAbs().maxCoeff());
      }
    }
    EXPECT_LT(res, 1e-10);
    EXPECT_LT(ct.torsion_type_residual, 1e-10);
  }
}

TEST(Connection, MetricCompatibleOnRandomFields) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (const Built* b : all_examples()) {
    const auto& ct = b->ct;
    const auto& fr = *b->frames;
    const Grid& grid = *fr.grid;
    const std::size_t np = fr.npts();
    // random real vector fields, band 1 along axes fine enough that g(Y, Z) stays resolved
    auto resolved = [&](std::size_t i) {
      for (int a = 0; a < 4; ++a)
        if (std::abs(grid.wavenumber(a, i)) > (grid.dims()[a] >= 8 ? 1 : 0)) return false;
      return true;
    };
    auto random_field = [&]() {
      std::vector<ScalarField> v(4, ScalarField(np, 0));
      for (int c = 0; c < 4; ++c) {
        ScalarField spec(np, 0);
        for (std::size_t i = 0; i < np; ++i)
          if (resolved(i)) spec[i] = cd(nd(rng), nd(rng));
        grid.backward(spec.data(), v[c].data());
        for (auto& x : v[c]) x = x.real();
      }
      return v;
    };
    const auto Y = random_field(), Z = random_field();
    ScalarField gyz(np);
    for (std::size_t i = 0; i < np; ++i) {
      cd s = 0;
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) s += fr.g[i](c, d) * Y[c][i] * Z[d][i];
      gyz[i] = s;
    }
    double res = 0, scale = 0;
    for (int a = 0; a < 4; ++a) {
      const ScalarField lhs = grid.dx(gyz, a);
      std::vector<ScalarField> dY(4), dZ(4);
      for (int c = 0; c < 4; ++c) {
        dY[c] = grid.dx(Y[c], a);
        dZ[c] = grid.dx(Z[c], a);
      }
      for (std::size_t i = 0; i < np; ++i) {
        Eigen::Vector4d nY, nZ, y, z;
        for (int c = 0; c < 4; ++c) {
          y(c) = Y[c][i].real();
          z(c) = Z[c][i].real();
          nY(c) = dY[c][i].real();
          nZ(c) = dZ[c][i].real();
        }
        for (int bb = 0; bb < 4; ++bb)
          for (int c = 0; c < 4; ++c) {
            nY(c) += y(bb) * ct.real3(ct.chern, i, a, bb, c);
            nZ(c) += z(bb) * ct.real3(ct.chern, i, a, bb, c);
          }
        const double rhs = nY.dot(fr.g[i] * z) + y.dot(fr.g[i] * nZ);
        res = std::max(res, std::abs(lhs[i].real() - rhs));
        scale = std::max(scale, std::abs(lhs[i].real()));
      }
    }
    EXPECT_LT(res, 1e-8 * std::max(1.0, scale));
  }
}

TEST(Connection, PreservesComplexStructure) {
  const Eigen::MatrixXd J = complex_structure(2);
  for (const Built* b : all_examples()) {
    const auto& ct = b->ct;
    double res = 0;
    for (std::size_t i = 0; i < ct.npts(); ++i)
      for (int a = 0; a < 4; ++a) {
        Eigen::Matrix4d G;  // G(c, b) = Gam^c_{ab}
        for (int bb = 0; bb < 4; ++bb)
          for (int c = 0; c < 4; ++c) G(c, bb) = ct.real3(ct.chern, i, a, bb, c);
        res = std::max(res, (G * J - J * G).cwiseAbs().maxCoeff());
      }
    EXPECT_LT(res, 1e-8);
    EXPECT_LT(ct.type_residual, 1e-8);
  }
}

TEST(Connection, FrameConnectionIsSkewHermitian) {
  for (const Built* b : all_examples()) {
    const auto& ct = b->ct;
    double res = 0;
    for (std::size_t i = 0; i < ct.npts(); ++i)
      for (int m = 0; m < 2; ++m) {
        const Eigen::MatrixXcd A = ct.gamma_matrix(i, m), Bb = ct.gamma_matrix(i, 2 + m);
        res = std::max(res, (Bb.conjugate() + A.transpose()).cwiseAbs().maxCoeff());
      }
    EXPECT_LT(res, 1e-10);
  }
}

TEST(Connection, AgreesWithHolomorphicChristoffelRoute) {
  for (const Built* b : all_examples()) {
    const auto oracle = holomorphic_chern_gamma(*b->frames);
    double res = 0;
    for (std::size_t k = 0; k < oracle.size(); ++k) res = std::max(res, std::abs(oracle[k] - b->ct.gamma[k]));
    EXPECT_LT(res, 1e-10);
    const auto tor = oracle_torsion(*b->frames, oracle);
    double tres = 0;
    for (std::size_t k = 0; k < tor.size(); ++k) tres = std::max(tres, std::abs(tor[k] - b->ct.tor[k]));
    EXPECT_LT(tres, 1e-10);
  }
}

TEST(LeeForm, FlatAndKahlerVanish) {
  EXPECT_LT(max_abs(flat2().ct.lee), 1e-14);
  EXPECT_LT(max_abs(lee_form_codifferential(flat2().ct)), 1e-14);
  EXPECT_LT(max_abs(kahler().ct.lee), 1e-9);
  EXPECT_LT(max_abs(lee_form_codifferential(kahler().ct)), 1e-9);
}

TEST(LeeForm, TraceRouteMatchesCodifferentialRoute) {
  for (const Built* b : nonkahler_examples()) {
    const auto& ct = b->ct;
    const auto other = lee_form_codifferential(ct);
    double res = 0, scale = max_abs(ct.lee);
    for (std::size_t k = 0; k < other.size(); ++k) res = std::max(res, std::abs(other[k] - ct.lee[k]));
    EXPECT_GT(scale, 1e-3);
    EXPECT_LT(res / scale, 1e-8);
    // complex trace of the frame torsion: theta(eps_r) = sum_m T^m_{rm}
    double cres = 0;
    for (std::size_t i = 0; i < ct.npts(); ++i)
      for (int r = 0; r < 2; ++r) {
        cd lhs = 0, rhs = 0;
        for (int a = 0; a < 4; ++a) lhs += b->frames->V[i](a, r) * ct.lee[i * 4 + a];
        for (int m = 0; m < 2; ++m) rhs += ct.T(i, r, m, m);
        cres = std::max(cres, std::abs(lhs - rhs));
      }
    EXPECT_LT(cres / scale, 1e-10);
  }
}

TEST(Parser, RoundTripsBuiltInExample) {
  const auto s = examples::nonkahler_unipotent(0.1);
  const auto p = parse_manifold_string(s.to_text());
  EXPECT_EQ(p.n, 2);
  EXPECT_EQ(p.band_limit, 2);
  ASSERT_EQ(p.terms.size(), s.terms.size());
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  EXPECT_LT((p.evaluate(x) - s.evaluate(x)).norm(), 1e-15);
}

TEST(Parser, AcceptsCommentsAndBlankLines) {
  const auto p = parse_manifold_string("# torus\n\nn = 1  # one complex dim\nband_limit = 1\nterm = 1 1 1 0 0.05 0\nterm = 1 1 -1 0 0.05 0\n");
  EXPECT_EQ(p.n, 1);
  EXPECT_EQ(p.terms.size(), 2u);
}

TEST(Parser, DiagnosticsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_manifold_string(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  EXPECT_EQ(line_of("n = 2\nband_limit = 1\ncolour = red\n"), 3);
  EXPECT_EQ(line_of("n = 2\nn = 2\nband_limit = 1\n"), 2);
  EXPECT_EQ(line_of("n = two\nband_limit = 1\n"), 1);
  EXPECT_EQ(line_of("n = 1\nband_limit = 1\nterm = 1 1 2 0 0.1 0\n"), 3);
  EXPECT_EQ(line_of("n = 1\nband_limit = 1\nterm = 1 2 1 0 0.1 0\n"), 3);
  EXPECT_EQ(line_of("n = 1\nband_limit = 1\nterm = 1 1 1 0 0.1\n"), 3);
  EXPECT_EQ(line_of("n = 1\nband_limit\n"), 2);
  EXPECT_EQ(line_of("band_limit = 1\n"), 1);
  EXPECT_NE(line_of("n = 1\nband_limit = 1\nterm = 1 1 1 0 0.1 0\n"), -1);  // missing Hermitian partner
  EXPECT_EQ(line_of("n = 1\nband_limit = 1\nterm = 1 1 1 0 0.05 0\nterm = 1 1 -1 0 0.05 0\n"), -1);
}
