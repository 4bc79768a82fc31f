#include <gtest/gtest.h>

#include "cdlab/clifford/multivector.hpp"

#include <random>

using namespace cdlab;

namespace {

ExactScalar random_scalar(std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-3, 3);
  return ExactScalar(mpq_class(d(rng), 1 + (d(rng) & 1)), d(rng), d(rng), mpq_class(d(rng), 2));
}

Multivector random_mv(int n, std::mt19937& rng, int max_terms = 6) {
  Multivector m(n);
  std::uniform_int_distribution<std::uint32_t> blade(0, (1u << (2 * n)) - 1);
  for (int t = 0; t < max_terms; ++t) m.add_term(blade(rng), random_scalar(rng));
  return m;
}

Multivector random_vector(int n, std::mt19937& rng) {
  Multivector m(n);
  for (int j = 1; j <= 2 * n; ++j) m.add_term(1u << (j - 1), random_scalar(rng));
  return m;
}

// Word-rewriting oracle: sort a generator word by adjacent transpositions, cancel e_j e_j = -1.
std::pair<int, std::uint32_t> reduce_word(std::vector<int> w) {
  int sign = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] == w[i + 1]) {
        w.erase(w.begin() + i, w.begin() + i + 2);
        sign = -sign;
        changed = true;
        break;
      }
      if (w[i] > w[i + 1]) {
        std::swap(w[i], w[i + 1]);
        sign = -sign;
        changed = true;
      }
    }
  }
  std::uint32_t mask = 0;
  for (int j : w) mask |= 1u << (j - 1);
  return {sign, mask};
}

std::vector<int> word_of(std::uint32_t mask) {
  std::vector<int> w;
  for (int j = 0; j < 32; ++j)
    if (mask >> j & 1u) w.push_back(j + 1);
  return w;
}

}  // namespace

TEST(ExactScalar, FieldOperations) {
  const ExactScalar r2 = ExactScalar::sqrt2();
  EXPECT_EQ(r2 * r2, ExactScalar(2));
  EXPECT_EQ(ExactScalar::i() * ExactScalar::i(), ExactScalar(-1));
  EXPECT_EQ(r2 * ExactScalar::inv_sqrt2(), ExactScalar(1));
  std::mt19937 rng(7);
  for (int t = 0; t < 50; ++t) {
    ExactScalar x = random_scalar(rng);
    if (x.is_zero()) continue;
    EXPECT_EQ(x * x.inverse(), ExactScalar(1));
    EXPECT_EQ(x.conj().re(), x.re());
    EXPECT_EQ(x.conj().im(), -x.im());
  }
  for (int k = -5; k <= 5; ++k) EXPECT_EQ(ExactScalar::pow_sqrt2(k) * ExactScalar::pow_sqrt2(-k), ExactScalar(1));
  EXPECT_EQ(ExactScalar::pow_sqrt2(3), ExactScalar(2) * r2);
  EXPECT_THROW(ExactScalar().inverse(), std::domain_error);
}

TEST(CliffordMul, GeneratorSquaresToMinusOne) {
  const Multivector e1 = Multivector::generator(1, 1);
  EXPECT_EQ(clifford_mul(e1, e1), Multivector(1, ExactScalar(-1)));
}

TEST(CliffordMul, UnitIsNeutral) {
  std::mt19937 rng(1);
  const Multivector one(3, ExactScalar(1));
  for (int t = 0; t < 10; ++t) {
    Multivector a = random_mv(3, rng);
    EXPECT_EQ(clifford_mul(one, a), a);
    EXPECT_EQ(clifford_mul(a, one), a);
  }
}

TEST(CliffordMul, BivectorSquare) {
  const Multivector e12 = clifford_mul(Multivector::generator(1, 1), Multivector::generator(1, 2));
  EXPECT_EQ(clifford_mul(e12, e12), Multivector(1, ExactScalar(-1)));
}

TEST(CliffordMul, BladeTableMatchesWordRewriting) {
  for (int n = 1; n <= 2; ++n)
    for (std::uint32_t a = 0; a < (1u << (2 * n)); ++a)
      for (std::uint32_t b = 0; b < (1u << (2 * n)); ++b) {
        std::vector<int> w = word_of(a), wb = word_of(b);
        w.insert(w.end(), wb.begin(), wb.end());
        auto [s, m] = reduce_word(w);
        EXPECT_EQ(clifford_mul(Multivector::blade(n, a), Multivector::blade(n, b)), Multivector::blade(n, m, ExactScalar(s)));
      }
}

TEST(CliffordMul, Associative) {
  std::mt19937 rng(2);
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 10; ++t) {
      Multivector a = random_mv(n, rng), b = random_mv(n, rng), c = random_mv(n, rng);
      EXPECT_EQ(clifford_mul(clifford_mul(a, b), c), clifford_mul(a, clifford_mul(b, c)));
    }
}

TEST(CliffordMul, RejectsDimensionMismatch) {
  EXPECT_THROW(clifford_mul(Multivector(1), Multivector(2)), std::invalid_argument);
}

TEST(CliffordMul, VectorSquareIsMinusNorm) {
  std::mt19937 rng(3);
  for (int n = 1; n <= 4; ++n)
    for (int t = 0; t < 5; ++t) {
      Multivector v = random_vector(n, rng);
      ExactScalar q;
      for (const auto& [m, c] : v.terms()) q += c * c;
      EXPECT_EQ(clifford_mul(v, v), Multivector(n, -q));
    }
}

TEST(ExtMul, OrthogonalPair) {
  const Multivector e1 = Multivector::generator(2, 1), e2 = Multivector::generator(2, 2);
  EXPECT_EQ(ext_mul(e1, e2), Multivector::blade(2, 0b11));
}

TEST(ExtMul, ParallelPair) {
  const Multivector e1 = Multivector::generator(1, 1);
  EXPECT_EQ(contract(e1, e1), Multivector(1, ExactScalar(1)));
  EXPECT_TRUE(wedge(e1, e1).is_zero());
  EXPECT_EQ(ext_mul(e1, e1), Multivector(1, ExactScalar(-1)));
}

TEST(ExtMul, MatchesCliffordMulExhaustiveSmall) {
  for (int n = 1; n <= 2; ++n)
    for (int j = 1; j <= 2 * n; ++j)
      for (std::uint32_t b = 0; b < (1u << (2 * n)); ++b) {
        Multivector v = Multivector::generator(n, j), w = Multivector::blade(n, b);
        EXPECT_EQ(ext_mul(v, w), clifford_mul(v, w));
      }
  const Multivector v = Multivector::generator(2, 1) + Multivector::generator(2, 2);
  std::mt19937 rng(4);
  for (int t = 0; t < 10; ++t) {
    Multivector w = grade_project(random_mv(2, rng, 10), 2);
    EXPECT_EQ(ext_mul(v, w), clifford_mul(v, w));
  }
}

TEST(ExtMul, MatchesCliffordMulRandomized) {
  std::mt19937 rng(5);
  for (int n = 1; n <= 4; ++n)
    for (int t = 0; t < 20; ++t) {
      Multivector v = random_vector(n, rng), w = random_mv(n, rng, 8);
      EXPECT_EQ(ext_mul(v, w), clifford_mul(v, w));
    }
}

TEST(ExtMul, RejectsNonVector) {
  EXPECT_THROW(ext_mul(Multivector::blade(2, 0b11), Multivector::generator(2, 1)), std::invalid_argument);
}

TEST(ComplexGenerators, AnticommutatorTable) {
  for (int n = 1; n <= 4; ++n) {
    auto g = complex_generators(n);
    const Multivector zero(n), m2(n, ExactScalar(-2));
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        EXPECT_EQ(g[r].eps * g[s].eps + g[s].eps * g[r].eps, zero);
        EXPECT_EQ(g[r].eps_bar * g[s].eps_bar + g[s].eps_bar * g[r].eps_bar, zero);
        EXPECT_EQ(g[r].eps * g[s].eps_bar + g[s].eps_bar * g[r].eps, r == s ? m2 : zero);
      }
  }
}

TEST(ComplexGenerators, ConjugationSwaps) {
  for (const auto& g : complex_generators(3)) {
    EXPECT_EQ(g.eps.conj(), g.eps_bar);
    EXPECT_EQ(g.eps_bar.conj(), g.eps);
  }
}

TEST(GradeProject, Examples) {
  const Multivector e1 = Multivector::generator(1, 1), e2 = Multivector::generator(1, 2);
  const Multivector x = Multivector(1, ExactScalar(1)) + e1 * e2;
  EXPECT_EQ(grade_project(x, 2), wedge(e1, e2));
  const auto g = complex_generators(2);
  EXPECT_EQ(grade_project(g[0].eps, 1), g[0].eps);
  const Multivector y = clifford_mul(e1, wedge(e1, e2));
  EXPECT_EQ(grade_project(y, 1), -e2);
  EXPECT_EQ(grade_project(y, 1), -contract(e1, wedge(e1, e2)));
  EXPECT_THROW(grade_project(x, 3), std::invalid_argument);
  EXPECT_THROW(grade_project(x, -1), std::invalid_argument);
}

TEST(GradeProject, PartitionOfUnity) {
  std::mt19937 rng(6);
  for (int n = 1; n <= 3; ++n) {
    Multivector a = random_mv(n, rng, 12), s(n);
    for (int k = 0; k <= 2 * n; ++k) s += grade_project(a, k);
    EXPECT_EQ(s, a);
  }
}

TEST(Multivector, RejectsOutOfRangeBlade) {
  EXPECT_THROW(Multivector::generator(1, 3), std::invalid_argument);
  EXPECT_THROW(Multivector::blade(1, 0b100), std::invalid_argument);
}
