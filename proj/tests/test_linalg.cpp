#include "dwell/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "dwell/matrix.hpp"
#include "test_util.hpp"

using dwell::Matrix;
using dwell::SpdMatrix;
using testutil::Rng;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

// Closed form of the spiral-pair mode-1 exponential:
// e^{A1 t} = e^{-0.1 t} [[cos(s2 t), sin(s2 t)/s2 ... ]] with s2 = sqrt(2).
Matrix spiral_mode1_expm(double t) {
  const double s2 = std::sqrt(2.0);
  const double c = std::cos(s2 * t), s = std::sin(s2 * t);
  Matrix m = Matrix::from_rows({{c, s2 / 2.0 * s}, {-s2 * s, c}});
  return std::exp(-0.1 * t) * m;
}

}  // namespace

TEST(Expm, ZeroMatrixGivesIdentity) {
  Matrix z(2, 2);
  EXPECT_EQ(max_abs_diff(dwell::expm(z, 3.7), Matrix::identity(2)), 0.0);
  EXPECT_EQ(max_abs_diff(dwell::expm(z, 0.0), Matrix::identity(2)), 0.0);
}

TEST(Expm, AtZeroTimeIsIdentity) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testutil::random_matrix(rng, rng.uniform_int(1, 5), 3.0);
    EXPECT_EQ(max_abs_diff(dwell::expm(a, 0.0), Matrix::identity(a.rows())), 0.0);
  }
}

TEST(Expm, SpiralPairClosedForm) {
  const Matrix a1 = testutil::spiral_pair_a1();
  for (double t : {0.1, 0.7, testutil::spiral_pair_t1(), 2.1, 10.0, 50.0}) {
    EXPECT_LT(max_abs_diff(dwell::expm(a1, t), spiral_mode1_expm(t)), 1e-12 * std::max(1.0, spiral_mode1_expm(t).max_abs()))
        << "t = " << t;
  }
}

TEST(Expm, SemigroupProperty) {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = rng.uniform_int(2, 4);
    Matrix a = testutil::random_matrix(rng, n, 1.0);
    const double t1 = rng.uniform(-2.0, 2.0), t2 = rng.uniform(-2.0, 2.0);
    Matrix lhs = dwell::expm(a, t1 + t2);
    Matrix rhs = dwell::expm(a, t1) * dwell::expm(a, t2);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10 * std::max(1.0, lhs.max_abs()));
  }
}

TEST(Expm, InverseProperty) {
  Rng rng(33);
  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 100; ++trial) {
    const int n = rng.uniform_int(2, 4);
    Matrix a = testutil::random_matrix(rng, n, 2.0);
    const double t = rng.uniform(0.0, 5.0);
    Matrix fwd = dwell::expm(a, t);
    Matrix bwd = dwell::expm(a * -1.0, t);
    // The identity is only representable when the factors do not wipe out
    // the unit scale; skip severely ill-conditioned products.
    if (fwd.norm_one() * bwd.norm_one() > 1e6) continue;
    ++checked;
    EXPECT_LT(max_abs_diff(bwd * fwd, Matrix::identity(n)), 1e-9);
  }
  EXPECT_GE(checked, 50);
}

TEST(Expm, LargeArgumentAccuracy) {
  // ||At|| up to ~1e3 against the closed form.
  const Matrix a1 = testutil::spiral_pair_a1();
  const double t = 400.0;
  Matrix ref = spiral_mode1_expm(t);
  EXPECT_LT(max_abs_diff(dwell::expm(a1, t), ref), 1e-12);
}

TEST(Expm, RejectsNonSquare) {
  Matrix a(2, 3);
  EXPECT_THROW(dwell::expm(a, 1.0), std::invalid_argument);
}

TEST(LyapSolve, DiagonalClosedForm) {
  // A = -I, Q = 2I: -2P = -2I so P = I.
  Matrix a = -1.0 * Matrix::identity(2);
  SpdMatrix q(2.0 * Matrix::identity(2));
  SpdMatrix p = dwell::lyap_solve(a, q);
  EXPECT_LT(max_abs_diff(p.matrix(), Matrix::identity(2)), 1e-12);
}

TEST(LyapSolve, JordanBlockClosedForm) {
  Matrix a = Matrix::from_rows({{-1.0, 1.0}, {0.0, -1.0}});
  SpdMatrix p = dwell::lyap_solve(a, SpdMatrix(Matrix::identity(2)));
  Matrix expected = Matrix::from_rows({{0.5, 0.25}, {0.25, 0.75}});
  EXPECT_LT(max_abs_diff(p.matrix(), expected), 1e-10);
  Matrix residual = a.transposed() * p.matrix() + p.matrix() * a + Matrix::identity(2);
  EXPECT_LE(residual.norm_inf(), 1e-9);
}

TEST(LyapSolve, RandomHurwitzIsSpd) {
  Rng rng(44);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = rng.uniform_int(2, 5);
    Matrix a = testutil::random_hurwitz(rng, n);
    SpdMatrix p = dwell::lyap_solve(a, SpdMatrix(Matrix::identity(n)));
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      if (dwell::norm2(x) < 1e-6) continue;
      EXPECT_GT(p.quad(x), 0.0);
    }
    Matrix residual = a.transposed() * p.matrix() + p.matrix() * a + Matrix::identity(n);
    EXPECT_LE(residual.norm_inf(), 1e-9);
  }
}

TEST(LyapSolve, RejectsNonHurwitz) {
  Matrix a = Matrix::from_rows({{0.5, 0.0}, {0.0, -1.0}});
  try {
    dwell::lyap_solve(a, SpdMatrix(Matrix::identity(2)));
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos);
  }
}

TEST(GenEigMax, IdenticalAndScaled) {
  Rng rng(55);
  SpdMatrix p(testutil::random_spd(rng, 3));
  EXPECT_NEAR(dwell::gen_eig_max(p, p), 1.0, 1e-10);
  SpdMatrix four(4.0 * Matrix::identity(3));
  SpdMatrix one(Matrix::identity(3));
  EXPECT_NEAR(dwell::gen_eig_max(four, one), 4.0, 1e-12);
}

TEST(GenEigMax, BracketingOracle) {
  // Smallest factor g with P <= g Q: Cholesky of (g + eps) Q - P must
  // succeed and of (g - eps) Q - P must fail.
  Rng rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(2, 4);
    SpdMatrix p(testutil::random_spd(rng, n));
    SpdMatrix q(testutil::random_spd(rng, n));
    const double g = dwell::gen_eig_max(p, q);
    Matrix upper = (g + 1e-8) * q.matrix() - p.matrix();
    EXPECT_NO_THROW(dwell::cholesky_factor(upper.symmetrized()));
    Matrix lower = (g - 1e-6) * q.matrix() - p.matrix();
    EXPECT_THROW(dwell::cholesky_factor(lower.symmetrized()), std::domain_error);
  }
}

TEST(GenEigMax, ReciprocalPairProduct) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 4);
    SpdMatrix p(testutil::random_spd(rng, n));
    SpdMatrix q(testutil::random_spd(rng, n));
    EXPECT_GE(dwell::gen_eig_max(p, q) * dwell::gen_eig_max(q, p), 1.0 - 1e-10);
  }
}

TEST(SymmetricEigs, KnownSpectra) {
  auto e1 = dwell::symmetric_eigs(Matrix::from_rows({{3.0, 0.0}, {0.0, 1.0}}));
  EXPECT_NEAR(e1[0], 3.0, 1e-13);
  EXPECT_NEAR(e1[1], 1.0, 1e-13);
  auto e2 = dwell::symmetric_eigs(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
  EXPECT_NEAR(e2[0], 1.0, 1e-13);
  EXPECT_NEAR(e2[1], -1.0, 1e-13);
}

TEST(SymmetricEigs, MatchesCharacteristicRoots2x2) {
  Rng rng(88);
  for (int trial = 0; trial < 300; ++trial) {
    Matrix s = testutil::random_symmetric(rng, 2, 5.0);
    const double a = s(0, 0), b = s(0, 1), d = s(1, 1);
    const double mean = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    auto eig = dwell::symmetric_eigs(s);
    EXPECT_NEAR(eig[0], mean + rad, 1e-9);
    EXPECT_NEAR(eig[1], mean - rad, 1e-9);
  }
}

TEST(SymmetricEigs, MatchesCharacteristicRoots3x3) {
  // Trigonometric closed form for symmetric 3x3 spectra as the oracle.
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    Matrix s = testutil::random_symmetric(rng, 3, 3.0);
    const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
    Matrix b = s - q * Matrix::identity(3);
    double p2 = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p2 += b(i, j) * b(i, j);
    const double p = std::sqrt(p2 / 6.0);
    double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                  b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                  b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    if (p < 1e-12) continue;
    double r = detb / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double l0 = q + 2.0 * p * std::cos(phi);
    const double l2 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double l1 = 3.0 * q - l0 - l2;
    auto eig = dwell::symmetric_eigs(s);
    EXPECT_NEAR(eig[0], l0, 1e-9);
    EXPECT_NEAR(eig[1], l1, 1e-9);
    EXPECT_NEAR(eig[2], l2, 1e-9);
  }
}

TEST(SymmetricEigs, TraceAndDeterminantConsistency) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 3);
    Matrix s = testutil::random_symmetric(rng, n, 2.0);
    auto eig = dwell::symmetric_eigs(s);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += s(i, i);
    double sum = 0.0, prod = 1.0;
    for (double l : eig) {
      sum += l;
      prod *= l;
    }
    const double det = n == 2 ? s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0)
                              : s(0, 0) * (s(1, 1) * s(2, 2) - s(1, 2) * s(2, 1)) -
                                    s(0, 1) * (s(1, 0) * s(2, 2) - s(1, 2) * s(2, 0)) +
                                    s(0, 2) * (s(1, 0) * s(2, 1) - s(1, 1) * s(2, 0));
    EXPECT_NEAR(sum, trace, 1e-8 * std::max(1.0, std::abs(trace)));
    EXPECT_NEAR(prod, det, 1e-8 * std::max(1.0, std::abs(det)));
  }
}

TEST(SymmetricEigs, RejectsAsymmetric) {
  Matrix s = Matrix::from_rows({{1.0, 2.0}, {0.0, 1.0}});
  EXPECT_THROW(dwell::symmetric_eigs(s), std::invalid_argument);
}

TEST(EigvalsGeneral, SpiralPairSpectrum) {
  auto eig = dwell::eigvals_general(testutil::spiral_pair_a1());
  ASSERT_EQ(eig.size(), 2u);
  std::sort(eig.begin(), eig.end(), [](auto a, auto b) { return a.imag() > b.imag(); });
  EXPECT_NEAR(eig[0].real(), -0.1, 1e-8);
  EXPECT_NEAR(eig[0].imag(), std::sqrt(2.0), 1e-8);
  EXPECT_NEAR(eig[1].real(), -0.1, 1e-8);
  EXPECT_NEAR(eig[1].imag(), -std::sqrt(2.0), 1e-8);
}

TEST(EigvalsGeneral, DiagonalAndCompanion) {
  auto e1 = dwell::eigvals_general(Matrix::from_rows({{-1.0, 0.0}, {0.0, -2.0}}));
  std::vector<double> re{e1[0].real(), e1[1].real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -2.0, 1e-10);
  EXPECT_NEAR(re[1], -1.0, 1e-10);

  // Companion of s^2 + 3 s + 2 = (s+1)(s+2).
  auto e2 = dwell::eigvals_general(Matrix::from_rows({{0.0, 1.0}, {-2.0, -3.0}}));
  std::vector<double> re2{e2[0].real(), e2[1].real()};
  std::sort(re2.begin(), re2.end());
  EXPECT_NEAR(re2[0], -2.0, 1e-8);
  EXPECT_NEAR(re2[1], -1.0, 1e-8);
  EXPECT_NEAR(e2[0].imag(), 0.0, 1e-10);
}

TEST(EigvalsGeneral, RandomSpectraSatisfyCharPolyTrace) {
  Rng rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 8);
    Matrix a = testutil::random_matrix(rng, n, 2.0);
    auto eig = dwell::eigvals_general(a);
    ASSERT_EQ(static_cast<int>(eig.size()), n);
    std::complex<double> sum{0.0, 0.0};
    for (auto z : eig) sum += z;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a(i, i);
    EXPECT_NEAR(sum.real(), trace, 1e-7 * std::max(1.0, std::abs(trace)));
    EXPECT_NEAR(sum.imag(), 0.0, 1e-7);
  }
}

TEST(SpectralAbscissa, SpiralPair) {
  EXPECT_NEAR(dwell::spectral_abscissa(testutil::spiral_pair_a2()), -0.03, 1e-9);
}

TEST(SpdMatrix, RejectsIndefinite) {
  EXPECT_THROW(SpdMatrix(Matrix::from_rows({{1.0, 2.0}, {2.0, 1.0}})), std::domain_error);
}

TEST(EigvalsGeneral, TraceConsistencyAtDimensionCap) {
  Rng rng(654);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12 + rng.uniform_int(0, 8);  // up to the cap of 20
    Matrix a = testutil::random_matrix(rng, n, 1.0);
    auto eig = dwell::eigvals_general(a);
    ASSERT_EQ(static_cast<int>(eig.size()), n);
    std::complex<double> sum{0.0, 0.0};
    for (auto z : eig) sum += z;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a(i, i);
    EXPECT_NEAR(sum.real(), trace, 1e-6 * std::max(1.0, std::abs(trace)));
    EXPECT_NEAR(sum.imag(), 0.0, 1e-6);
  }
  Matrix too_big(21, 21);
  EXPECT_THROW(dwell::eigvals_general(too_big), std::invalid_argument);
}

TEST(LyapSolve, DimensionCapResidual) {
  Rng rng(655);
  Matrix a = testutil::random_hurwitz(rng, 20, 0.5);
  SpdMatrix q(testutil::random_spd(rng, 20, 0.5, 5.0));
  SpdMatrix p = dwell::lyap_solve(a, q);
  Matrix residual = a.transposed() * p.matrix() + p.matrix() * a + q.matrix();
  EXPECT_LE(residual.norm_inf(), 1e-9 * q.matrix().norm_inf());
}
