#include <gtest/gtest.h>

#include "cdlab/spinor/vfiber.hpp"

#include <random>

using namespace cdlab;

namespace {

ExactScalar random_scalar(std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-3, 3);
  return ExactScalar(d(rng), d(rng), d(rng), mpq_class(d(rng), 2));
}

SpinorFiber random_spinor(int n, std::mt19937& rng) {
  SpinorFiber s(n);
  for (auto& x : s.c) x = random_scalar(rng);
  return s;
}

VFiber random_v(int n, std::mt19937& rng) {
  VFiber s(n);
  for (auto& x : s.c) x = random_scalar(rng);
  return s;
}

FormFiber random_form(int n, int p, int q, std::mt19937& rng) {
  FormFiber f(n);
  for (std::uint32_t i = 0; i < f.c.size(); ++i)
    if (std::popcount(f.holo(i)) == p && std::popcount(f.antiholo(i)) == q) f.c[i] = random_scalar(rng);
  return f;
}

Multivector random_complex_vector(int n, std::mt19937& rng) {
  Multivector v(n);
  for (int j = 1; j <= 2 * n; ++j) v.add_term(1u << (j - 1), random_scalar(rng));
  return v;
}

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Exact rank by Gaussian elimination over Q(i)[sqrt2].
std::size_t exact_rank(std::vector<std::vector<ExactScalar>> rows) {
  std::size_t rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c].is_zero()) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    const ExactScalar inv = rows[rank][c].inverse();
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c].is_zero()) continue;
      const ExactScalar f = rows[r][c] * inv;
      for (std::size_t k = c; k < cols; ++k)
        if (!rows[rank][k].is_zero()) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST(CliffordAction, VacuumAnnihilation) {
  for (int n = 1; n <= 4; ++n) {
    const auto g = complex_generators(n);
    for (int j = 0; j < n; ++j) {
      EXPECT_TRUE(clifford_action(g[j].eps_bar, psi_vacuum(n)).is_zero());
      EXPECT_FALSE(clifford_action(g[j].eps, psi_vacuum(n)).is_zero());
      EXPECT_TRUE(clifford_action(g[j].eps, phi_vacuum(n)).is_zero());
    }
  }
}

TEST(CliffordAction, FockOperators) {
  // c(eps_1) = -sqrt2 a^+ sends |0> to -sqrt2 |1>.
  const auto g = complex_generators(1);
  EXPECT_EQ(clifford_action(g[0].eps, psi_vacuum(1)), SpinorFiber::basis(1, 1, -ExactScalar::sqrt2()));
  EXPECT_EQ(clifford_action(g[0].eps_bar, SpinorFiber::basis(1, 1)), SpinorFiber::basis(1, 0, ExactScalar::sqrt2()));
}

TEST(CliffordAction, ComplexAnticommutatorOnRandomSpinor) {
  std::mt19937 rng(11);
  for (int n = 1; n <= 3; ++n) {
    const auto g = complex_generators(n);
    SpinorFiber psi = random_spinor(n, rng);
    for (int j = 0; j < n; ++j)
      EXPECT_EQ(clifford_action(g[j].eps * g[j].eps_bar + g[j].eps_bar * g[j].eps, psi), ExactScalar(-2) * psi);
  }
}

TEST(CliffordAction, RepresentationMatricesSatisfyRelations) {
  for (int n = 1; n <= 3; ++n) {
    const std::size_t d = std::size_t{1} << n;
    std::vector<std::vector<ExactScalar>> mats;
    for (int j = 1; j <= 2 * n; ++j) mats.push_back(clifford_matrix(Multivector::generator(n, j)));
    for (int j = 0; j < 2 * n; ++j)
      for (int k = 0; k < 2 * n; ++k) {
        auto ab = matmul(mats[j], mats[k], d), ba = matmul(mats[k], mats[j], d);
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < d; ++c) {
            ExactScalar expect = (j == k && r == c) ? ExactScalar(-2) : ExactScalar(0);
            EXPECT_EQ(ab[r * d + c] + ba[r * d + c], expect);
          }
      }
  }
}

TEST(CliffordAction, IsAlgebraHomomorphism) {
  std::mt19937 rng(12);
  for (int n = 1; n <= 3; ++n) {
    Multivector a = random_complex_vector(n, rng) * random_complex_vector(n, rng);
    Multivector b = random_complex_vector(n, rng);
    SpinorFiber psi = random_spinor(n, rng);
    EXPECT_EQ(clifford_action(a * b, psi), clifford_action(a, clifford_action(b, psi)));
  }
}

TEST(CliffordAction, RealVectorSquare) {
  std::mt19937 rng(13);
  for (int n = 1; n <= 3; ++n) {
    Multivector v(n);
    ExactScalar q;
    std::uniform_int_distribution<int> d(-4, 4);
    for (int j = 1; j <= 2 * n; ++j) {
      ExactScalar c(d(rng));
      q += c * c;
      v.add_term(1u << (j - 1), c);
    }
    SpinorFiber psi = random_spinor(n, rng);
    EXPECT_EQ(clifford_action(v, clifford_action(v, psi)), -q * psi);
  }
}

TEST(CliffordAction, RejectsMismatch) {
  EXPECT_THROW(clifford_action(Multivector(2), SpinorFiber(1)), std::invalid_argument);
}

TEST(Omega, EigenvaluesAndMultiplicities) {
  for (int n = 1; n <= 4; ++n) {
    auto es = omega_eigendecomposition(n);
    ASSERT_EQ(es.size(), static_cast<std::size_t>(n + 1));
    std::size_t total = 0;
    for (int k = 0; k <= n; ++k) {
      EXPECT_EQ(es[k].eigenvalue, ExactScalar(2L * k - n) * ExactScalar::i());
      EXPECT_EQ(static_cast<long>(es[k].basis.size()), binom(n, k));
      for (auto b : es[k].basis) EXPECT_EQ(std::popcount(b), k);
      total += es[k].basis.size();
    }
    EXPECT_EQ(total, std::size_t{1} << n);
  }
  auto e2 = omega_eigendecomposition(2);
  EXPECT_EQ(e2[0].eigenvalue, ExactScalar(-2) * ExactScalar::i());
  auto e1 = omega_eigendecomposition(1);
  EXPECT_EQ(e1[0].eigenvalue, -ExactScalar::i());
  EXPECT_EQ(e1[1].eigenvalue, ExactScalar::i());
}

TEST(Omega, MatrixOracleIsDiagonalInFockBasis) {
  // Independent construction: sum of products of generator matrices.
  for (int n = 1; n <= 3; ++n) {
    const std::size_t d = std::size_t{1} << n;
    std::vector<ExactScalar> w(d * d);
    for (int s = 1; s <= n; ++s) {
      auto m = matmul(clifford_matrix(Multivector::generator(n, 2 * s - 1)), clifford_matrix(Multivector::generator(n, 2 * s)), d);
      for (std::size_t i = 0; i < d * d; ++i) w[i] += m[i];
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        ExactScalar expect = r == c ? ExactScalar(2L * std::popcount(static_cast<unsigned>(r)) - n) * ExactScalar::i() : ExactScalar(0);
        EXPECT_EQ(w[r * d + c], expect);
      }
  }
}

TEST(Omega, VacuumIsCommonKernel) {
  // S^0 is one-dimensional and killed by every eps_bar.
  for (int n = 1; n <= 3; ++n) {
    const auto g = complex_generators(n);
    const std::uint32_t d = 1u << n;
    for (std::uint32_t b = 0; b < d; ++b) {
      bool killed = true;
      for (int j = 0; j < n; ++j) killed = killed && clifford_action(g[j].eps_bar, SpinorFiber::basis(n, b)).is_zero();
      EXPECT_EQ(killed, b == 0);
    }
  }
}

TEST(SkewAdjointness, SpinorAndVFiber) {
  std::mt19937 rng(14);
  for (int n = 1; n <= 3; ++n) {
    for (int t = 0; t < 3; ++t) {
      Multivector v = random_complex_vector(n, rng);
      const std::uint32_t d = 1u << n;
      for (std::uint32_t a = 0; a < d; ++a)
        for (std::uint32_t b = 0; b < d; ++b) {
          SpinorFiber s1 = SpinorFiber::basis(n, a), s2 = SpinorFiber::basis(n, b);
          EXPECT_EQ(hermitian(clifford_action(v, s1), s2) + hermitian(s1, clifford_action(v.conj(), s2)), ExactScalar(0));
        }
      VFiber x = random_v(n, rng), y = random_v(n, rng);
      for (Side side : {Side::L, Side::R})
        EXPECT_EQ(hermitian(v_mul(side, v, x), y) + hermitian(x, v_mul(side, v.conj(), y)), ExactScalar(0));
    }
  }
}

TEST(SkewAdjointness, RealVectorsAreIsometries) {
  std::mt19937 rng(15);
  const int n = 2;
  Multivector v = Multivector::generator(n, 1) + ExactScalar(2) * Multivector::generator(n, 3);
  SpinorFiber a = random_spinor(n, rng), b = random_spinor(n, rng);
  EXPECT_EQ(hermitian(clifford_action(v, a), clifford_action(v, b)), ExactScalar(5) * hermitian(a, b));
}

TEST(AlphaBeta, NormalizationAndIsometry) {
  EXPECT_EQ(alpha_iso(0, FormFiber::basis(2, 0, 0)), psi_vacuum(2));
  for (int n = 1; n <= 3; ++n) {
    const std::uint32_t d = 1u << n;
    for (std::uint32_t a = 0; a < d; ++a) {
      const int k = std::popcount(a);
      SpinorFiber s = alpha_iso(k, FormFiber::basis(n, 0, a));
      EXPECT_EQ(hermitian(s, s), ExactScalar(1));
      SpinorFiber t = beta_iso(k, FormFiber::basis(n, a, 0));
      EXPECT_EQ(hermitian(t, t), ExactScalar(1));
      // omega eigenvalues: alpha lands in S^k, beta in S^{n-k}
      EXPECT_EQ(clifford_action(kahler_element(n), s), ExactScalar(2L * k - n) * ExactScalar::i() * s);
      EXPECT_EQ(clifford_action(kahler_element(n), t), ExactScalar(2L * (n - k) - n) * ExactScalar::i() * t);
    }
  }
  EXPECT_THROW(alpha_iso(1, FormFiber::basis(2, 1, 0)), std::invalid_argument);
  EXPECT_THROW(beta_iso(1, FormFiber::basis(2, 0, 1)), std::invalid_argument);
}

TEST(AlphaBeta, IsometryOnRandomForms) {
  std::mt19937 rng(16);
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k) {
      FormFiber f = random_form(n, 0, k, rng), g = random_form(n, 0, k, rng);
      EXPECT_EQ(hermitian(alpha_iso(k, f), alpha_iso(k, g)), hermitian(f, g));
    }
}

TEST(AlphaBeta, GlobalPhaseInvariance) {
  // Rotating the vacuum by a unit phase leaves every norm unchanged.
  const ExactScalar u(mpq_class(3, 5), 0, mpq_class(4, 5), 0);
  const int n = 2;
  for (std::uint32_t a = 0; a < 4; ++a) {
    const int k = std::popcount(a);
    SpinorFiber s = ExactScalar::pow_sqrt2(-k) * form_action(FormFiber::basis(n, 0, a), u * psi_vacuum(n));
    EXPECT_EQ(hermitian(s, s), ExactScalar(1));
  }
}

TEST(VFiber, Dimensions) {
  for (int n = 1; n <= 3; ++n) {
    VFiber x(n);
    EXPECT_EQ(x.c.size(), std::size_t{1} << (2 * n));
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q) {
        long cnt = 0;
        for (std::uint32_t i = 0; i < x.c.size(); ++i) cnt += (x.p_of(i) == p && x.q_of(i) == q);
        EXPECT_EQ(cnt, binom(n, p) * binom(n, q));
      }
  }
}

TEST(VMul, OmegaLeftEigenvalue) {
  for (int n = 1; n <= 3; ++n) {
    VFiber probe(n);
    for (std::uint32_t i = 0; i < probe.c.size(); ++i) {
      VFiber b = VFiber::basis(n, probe.down(i), probe.up(i));
      EXPECT_EQ(v_mul(Side::L, kahler_element(n), b), ExactScalar(n - 2L * probe.p_of(i)) * ExactScalar::i() * b);
    }
  }
}

TEST(VMul, CliffordRelationsBothSides) {
  std::mt19937 rng(17);
  for (int n = 1; n <= 3; ++n) {
    VFiber xi = random_v(n, rng);
    for (Side side : {Side::L, Side::R}) {
      for (int j = 1; j <= 2 * n; ++j)
        for (int k = 1; k <= 2 * n; ++k) {
          Multivector ej = Multivector::generator(n, j), ek = Multivector::generator(n, k);
          VFiber s = v_mul(side, ej, v_mul(side, ek, xi)) + v_mul(side, ek, v_mul(side, ej, xi));
          EXPECT_EQ(s, j == k ? ExactScalar(-2) * xi : VFiber(n));
        }
      // module property for products of mixed parity
      Multivector a = random_complex_vector(n, rng) * random_complex_vector(n, rng) + random_complex_vector(n, rng);
      Multivector b = random_complex_vector(n, rng);
      EXPECT_EQ(v_mul(side, a * b, xi), v_mul(side, a, v_mul(side, b, xi)));
      Multivector v = Multivector::generator(n, 1) + ExactScalar(3) * Multivector::generator(n, 2 * n);
      EXPECT_EQ(v_mul(side, v, v_mul(side, v, xi)), ExactScalar(-10) * xi);
    }
  }
}

TEST(VMul, LeftAndRightGradedCommute) {
  std::mt19937 rng(18);
  for (int n = 1; n <= 3; ++n) {
    VFiber xi = random_v(n, rng);
    Multivector e1 = Multivector::generator(n, 1), e2 = Multivector::generator(n, 2);
    // odd elements anticommute across the two factors
    EXPECT_EQ(v_mul(Side::L, e1, v_mul(Side::R, e2, xi)), ExactScalar(-1) * v_mul(Side::R, e2, v_mul(Side::L, e1, xi)));
    // an even element commutes with everything
    Multivector ev = e1 * e2 + ExactScalar(2) * Multivector(n, ExactScalar(1));
    EXPECT_EQ(v_mul(Side::L, ev, v_mul(Side::R, e2, xi)), v_mul(Side::R, e2, v_mul(Side::L, ev, xi)));
    EXPECT_EQ(v_mul(Side::L, e1, v_mul(Side::R, ev, xi)), v_mul(Side::R, ev, v_mul(Side::L, e1, xi)));
  }
}

TEST(VMul, RightSignOnVectors) {
  // On vectors the right action is (-1)^p times the plain action on S_up.
  const int n = 2;
  const Multivector e3 = Multivector::generator(n, 3);
  for (std::uint32_t dn = 0; dn < 4; ++dn) {
    SpinorFiber phi = SpinorFiber::basis(n, dn), psi = SpinorFiber::basis(n, 1);
    const int p = n - std::popcount(dn);
    EXPECT_EQ(v_mul(Side::R, e3, VFiber::tensor(phi, psi)), ExactScalar(p % 2 ? -1 : 1) * VFiber::tensor(phi, clifford_action(e3, psi)));
  }
}

TEST(Sigma, VacuumIsometryInverse) {
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(sigma_iso(FormFiber::basis(n, 0, 0)), vacuum_v(n));
  std::mt19937 rng(19);
  for (int n = 1; n <= 3; ++n) {
    const std::uint32_t d = 1u << n;
    for (std::uint32_t a = 0; a < d; ++a)
      for (std::uint32_t b = 0; b < d; ++b) {
        const int p = std::popcount(a), q = std::popcount(b);
        VFiber x = sigma_iso(FormFiber::basis(n, a, b), p, q);
        EXPECT_EQ(hermitian(x, x), ExactScalar(1));
        EXPECT_TRUE(x.is_bidegree(p, q));
      }
    FormFiber eta = random_form(n, 1, n - 1, rng) + random_form(n, 0, 1, rng);
    EXPECT_EQ(sigma_inverse(sigma_iso(eta)), eta);
    EXPECT_EQ(hermitian(sigma_iso(eta), sigma_iso(eta)), hermitian(eta, eta));
    EXPECT_THROW(sigma_iso(eta, 1, n - 1), std::invalid_argument);
  }
}

TEST(Pairing, MatchesMetricOnForms) {
  std::mt19937 rng(20);
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k) {
      FormFiber nu = random_form(n, k, 0, rng), mu = random_form(n, 0, k, rng);
      EXPECT_EQ(pair(form_action(nu, phi_vacuum(n)), form_action(mu, psi_vacuum(n))), metric_pairing(nu, mu));
    }
}

TEST(Chi, VacuumIsRankOneEvaluation) {
  const int n = 2;
  auto m = chi_iso(vacuum_v(n));
  const std::size_t d = 4;
  for (std::uint32_t b = 0; b < d; ++b) {
    // chi(xi0) psi' = phi0(psi') psi0
    SpinorFiber in = SpinorFiber::basis(n, b), out(n);
    for (std::size_t r = 0; r < d; ++r) out.c[r] = m[r * d + b];
    EXPECT_EQ(out, pair(phi_vacuum(n), in) * psi_vacuum(n));
  }
  EXPECT_EQ(pair(phi_vacuum(n), psi_vacuum(n)), ExactScalar(1));
}

TEST(Chi, BijectionAndBigrading) {
  for (int n = 1; n <= 3; ++n) {
    const std::size_t dim = std::size_t{1} << (2 * n);
    std::vector<std::vector<ExactScalar>> rows;
    for (std::uint32_t i = 0; i < dim; ++i) rows.push_back(chi_iso(VFiber::basis(n, i & ((1u << n) - 1), i >> n)));
    EXPECT_EQ(exact_rank(rows), dim);
    // chi_inverse is a two-sided inverse
    for (std::uint32_t i = 0; i < dim; ++i) EXPECT_EQ(chi_inverse(n, rows[i]), VFiber::basis(n, i & ((1u << n) - 1), i >> n));
  }
}

TEST(Chi, ClosedFormProduct) {
  std::mt19937 rng(21);
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 6; ++t) {
      std::uniform_int_distribution<int> deg(0, n);
      const int p1 = deg(rng), q1 = deg(rng), p2 = deg(rng);
      const int q2 = t % 2 ? p1 : deg(rng);
      FormFiber nu1 = random_form(n, p1, 0, rng), mu1 = random_form(n, 0, q1, rng);
      FormFiber nu2 = random_form(n, p2, 0, rng), mu2 = random_form(n, 0, q2, rng);
      VFiber x1 = VFiber::tensor(form_action(nu1, phi_vacuum(n)), form_action(mu1, psi_vacuum(n)));
      VFiber x2 = VFiber::tensor(form_action(nu2, phi_vacuum(n)), form_action(mu2, psi_vacuum(n)));
      ExactScalar g = p1 == q2 ? metric_pairing(nu1, mu2) : ExactScalar(0);
      VFiber expect = ExactScalar::pow_sqrt2(p2 + q1) * g * sigma_iso(wedge(nu2, mu1));
      EXPECT_EQ(v_product(x1, x2), expect);
    }
}

TEST(Chi, EndomorphismToMultivectorRoundTrip) {
  std::mt19937 rng(22);
  for (int n = 1; n <= 2; ++n) {
    VFiber x = random_v(n, rng);
    auto m = chi_iso(x);
    Multivector w = endomorphism_to_multivector(n, m);
    EXPECT_EQ(clifford_matrix(w), m);
  }
}

TEST(OneFormProduct, Examples) {
  const int n = 2;
  // lambda = e^1 = (eps^1 + epsbar^1)/sqrt2
  FormFiber e1 = ExactScalar::inv_sqrt2() * (FormFiber::basis(n, 1, 0) + FormFiber::basis(n, 0, 1));
  EXPECT_TRUE(one_form_product_check(e1, FormFiber::basis(n, 0, 1), FormFiber::basis(n, 1, 0)));
  EXPECT_TRUE(one_form_product_check(FormFiber::basis(n, 1, 0), FormFiber::basis(n, 0, 2), FormFiber::basis(n, 2, 0)));
  EXPECT_THROW(one_form_product_check(FormFiber::basis(n, 1, 1), FormFiber::basis(n, 0, 1), FormFiber::basis(n, 1, 0)), std::invalid_argument);
}

TEST(OneFormProduct, ExhaustiveN2) {
  const int n = 2;
  for (int j = 0; j < 2 * n; ++j)
    for (std::uint32_t b = 0; b < 4; ++b)
      for (std::uint32_t a = 0; a < 4; ++a) {
        FormFiber lam(n);
        lam.c[1u << j] = ExactScalar(1);
        EXPECT_TRUE(one_form_product_check(lam, FormFiber::basis(n, 0, b), FormFiber::basis(n, a, 0)));
      }
  // real 1-forms e^k
  for (int k = 1; k <= 2 * n; ++k) {
    const int s = (k - 1) / 2;
    FormFiber lam(n);
    const ExactScalar h = ExactScalar::inv_sqrt2();
    if (k % 2) {
      lam.c[1u << s] = h;
      lam.c[1u << (n + s)] = h;
    } else {
      lam.c[1u << s] = -ExactScalar::i() * h;
      lam.c[1u << (n + s)] = ExactScalar::i() * h;
    }
    for (std::uint32_t b = 0; b < 4; ++b) EXPECT_TRUE(one_form_product_check(lam, FormFiber::basis(n, 0, b), FormFiber::basis(n, b, 0)));
  }
}
