#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlsnet/field.hpp"
#include "oracles.hpp"

using namespace nlsnet;

TEST(Grid, SpacingAndEndpoints) {
  const auto g = make_grid(-10.0, 10.0, 4000);
  EXPECT_NEAR(g.dx(), 0.005, 1e-15);
  EXPECT_DOUBLE_EQ(g.point(3999), 10.0);
  EXPECT_NEAR(g.point(0), -10.0 + 0.005, 1e-13);

  const auto small = make_grid(0.0, 1.0, 2);
  EXPECT_DOUBLE_EQ(small.point(0), 0.5);
  EXPECT_DOUBLE_EQ(small.point(1), 1.0);

  const auto g3 = make_grid(-20.0, 80.0, 1024);
  EXPECT_DOUBLE_EQ(g3.dx(), 100.0 / 1024.0);
  EXPECT_NEAR(g3.dx() * 1024.0, 100.0, 1e-12);
}

TEST(Grid, LeftEndpointIsNotAGridPoint) {
  const auto g = make_grid(-1.0, 3.0, 16);
  for (double x : g.points()) EXPECT_GT(x, -1.0);
}

TEST(Grid, RejectsBadDomains) {
  EXPECT_THROW(make_grid(1.0, 1.0, 8), Error);
  EXPECT_THROW(make_grid(2.0, 1.0, 8), Error);
  EXPECT_THROW(make_grid(0.0, 1.0, 1), Error);
  EXPECT_THROW(make_grid(0.0, INFINITY, 8), Error);
  try {
    make_grid(0.0, 1.0, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_domain);
  }
}

TEST(Grid, WavenumberLayoutEvenAndOdd) {
  const auto even = wavenumbers(make_grid(0.0, 2.0 * std::numbers::pi, 8));
  const std::vector<double> e{0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t q = 0; q < 8; ++q) EXPECT_DOUBLE_EQ(even[q], e[q]);
  const auto odd = wavenumbers(make_grid(0.0, 2.0 * std::numbers::pi, 7));
  const std::vector<double> o{0, 1, 2, 3, -3, -2, -1};
  for (std::size_t q = 0; q < 7; ++q) EXPECT_DOUBLE_EQ(odd[q], o[q]);
}

TEST(WaveFieldTest, LengthMustMatchGrid) {
  const auto g = make_grid(0.0, 1.0, 4);
  EXPECT_THROW(WaveField(g, std::vector<cplx>(3)), Error);
  WaveField ok(g, std::vector<cplx>(4, 1.0));
  EXPECT_TRUE(ok.all_finite());
  ok.values[2] = cplx(NAN, 0.0);
  EXPECT_FALSE(ok.all_finite());
}

TEST(Transform, MatchesNaiveDft) {
  std::mt19937_64 rng(1);
  for (std::size_t M : {2u, 3u, 8u, 15u, 64u, 100u}) {
    const auto f = oracle::random_field(M, rng);
    SpectralTransform t(M);
    const auto fast = t.forward(f);
    const auto ref = oracle::naive_dft(f);
    EXPECT_LT(oracle::rel_diff(fast, ref), 1e-13) << "M=" << M;
  }
}

TEST(Transform, RoundTripAcrossSizes) {
  std::mt19937_64 rng(2);
  for (std::size_t M = 8; M <= 4096; M *= 2) {
    for (std::size_t extra : {0u, 1u}) {
      const std::size_t n = M + extra;
      const auto f = oracle::random_field(n, rng);
      SpectralTransform t(n);
      EXPECT_LT(oracle::rel_diff(t.inverse(t.forward(f)), f), 1e-12) << "M=" << n;
    }
  }
}

TEST(Transform, SizeMismatchThrows) {
  SpectralTransform t(8);
  std::vector<cplx> v(7);
  EXPECT_THROW(t.forward(v), Error);
}

TEST(Symbol, IdentityLeavesInputUnchanged) {
  std::mt19937_64 rng(3);
  const auto f = oracle::random_field(32, rng);
  SpectralSymbol one{std::vector<cplx>(32, 1.0)};
  EXPECT_LT(oracle::max_abs_diff(apply_symbol(f, one), f), 1e-14);
}

TEST(Symbol, PureModeIsEigenvector) {
  const auto g = make_grid(0.0, 2.0 * std::numbers::pi, 16);
  std::mt19937_64 rng(4);
  const auto m = oracle::random_field(16, rng);
  SpectralSymbol s{m};
  for (int k : {0, 1, 3, -5, 7}) {
    const auto f = sample_field(g, [&](double x) { return std::polar(1.0, k * x); });
    const auto out = apply_symbol(f, s);
    const std::size_t bin = k >= 0 ? k : 16 + k;
    for (std::size_t j = 0; j < 16; ++j) EXPECT_LT(std::abs(out.values[j] - m[bin] * f.values[j]), 1e-13);
  }
}

TEST(Symbol, UnitModulusPreservesNorm) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  for (std::size_t M : {16u, 33u, 256u}) {
    SpectralSymbol s{std::vector<cplx>(M)};
    for (auto& z : s.multipliers) z = std::polar(1.0, ang(rng));
    const auto f = oracle::random_field(M, rng);
    const auto out = apply_symbol(f, s);
    EXPECT_NEAR(oracle::l2(out) / oracle::l2(f), 1.0, 1e-12);
  }
}

TEST(Symbol, ProductEqualsComposition) {
  std::mt19937_64 rng(6);
  const std::size_t M = 64;
  SpectralSymbol s1{oracle::random_field(M, rng)}, s2{oracle::random_field(M, rng)};
  const auto f = oracle::random_field(M, rng);
  const auto a = apply_symbol(f, s1 * s2);
  const auto b = apply_symbol(apply_symbol(f, s1), s2);
  EXPECT_LT(oracle::rel_diff(a, b), 1e-12);
  EXPECT_THROW(s1 * SpectralSymbol{std::vector<cplx>(M - 1)}, Error);
}

TEST(Derivative, SpectralDerivativeOfSmoothPeriodic) {
  const auto g = make_grid(0.0, 2.0 * std::numbers::pi, 32);
  const auto f = sample_field(g, [](double x) { return std::exp(std::sin(x)); });
  const auto d1 = spectral_derivative(g, f.values, 1);
  const auto d2 = spectral_derivative(g, f.values, 2);
  for (std::size_t j = 0; j < g.M; ++j) {
    const double x = g.point(j), e = std::exp(std::sin(x));
    EXPECT_NEAR(d1[j].real(), std::cos(x) * e, 1e-11);
    EXPECT_NEAR(d2[j].real(), (std::cos(x) * std::cos(x) - std::sin(x)) * e, 1e-10);
    EXPECT_NEAR(d1[j].imag(), 0.0, 1e-12);
  }
}

TEST(Metrics, RelMisfitExamples) {
  std::mt19937_64 rng(7);
  const auto e = oracle::random_field(20, rng);
  std::vector<cplx> twice(e), neg(e);
  for (auto& z : twice) z *= 2.0;
  for (auto& z : neg) z = -z;
  EXPECT_EQ(rel_misfit(e, e), 0.0);
  EXPECT_NEAR(rel_misfit(twice, e), 0.5, 1e-15);
  EXPECT_NEAR(rel_misfit(neg, e), 2.0, 1e-15);
}

TEST(Metrics, RelMisfitScaleInvariant) {
  std::mt19937_64 rng(8);
  const auto f = oracle::random_field(40, rng);
  const auto g = oracle::random_field(40, rng);
  for (cplx alpha : {cplx(3.0, 0.0), cplx(-0.2, 1.7), cplx(0.0, -1e-3)}) {
    std::vector<cplx> af(f), ag(g);
    for (auto& z : af) z *= alpha;
    for (auto& z : ag) z *= alpha;
    EXPECT_NEAR(rel_misfit(af, ag), rel_misfit(f, g), 1e-12 * rel_misfit(f, g));
  }
}

TEST(Metrics, RelMisfitErrors) {
  std::vector<cplx> zero(4, 0.0), one(4, 1.0), three(3, 1.0);
  EXPECT_THROW(rel_misfit(one, zero), Error);
  EXPECT_THROW(rel_misfit(one, three), Error);
  try {
    rel_misfit(one, zero);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_reference);
  }
}

TEST(Metrics, RelErrVectorExamples) {
  const std::vector<double> v{1.0, -2.0, 3.5};
  std::vector<double> zero(3, 0.0), scaled(v);
  for (auto& x : scaled) x *= 1.1;
  EXPECT_EQ(rel_err_vector(v, v), 0.0);
  EXPECT_NEAR(rel_err_vector(zero, v), 1.0, 1e-15);
  EXPECT_NEAR(rel_err_vector(scaled, v), 0.1, 1e-12);
  EXPECT_THROW(rel_err_vector(v, zero), Error);
}
