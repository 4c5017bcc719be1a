#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlsnet/propagator.hpp"
#include "nlsnet/scenarios.hpp"
#include "oracles.hpp"

using namespace nlsnet;

namespace {

const cplx I(0.0, 1.0);

ProblemParams params(double beta, double gamma, std::vector<double> V, double dt, std::size_t N) {
  return {beta, gamma, std::move(V), dt, N};
}

}  // namespace

TEST(LinearSymbol, Examples) {
  const auto g = make_grid(0.0, 2.0 * std::numbers::pi, 8);
  const auto id = linear_symbol(0.0, g);
  for (const auto& m : id.multipliers) EXPECT_EQ(m, cplx(1.0, 0.0));
  const auto s = linear_symbol(0.1, g);
  EXPECT_EQ(s.multipliers[0], cplx(1.0, 0.0));
  EXPECT_LT(std::abs(s.multipliers[2] - std::exp(cplx(0.0, -0.4))), 1e-15);
  for (const auto& m : s.multipliers) EXPECT_NEAR(std::abs(m), 1.0, 1e-15);

  // One step on e^{2ix}: the plane wave picks up exp(-i eta k^2).
  const auto f = sample_field(g, [](double x) { return std::polar(1.0, 2.0 * x); });
  const auto out = apply_symbol(f, s);
  for (std::size_t j = 0; j < 8; ++j)
    EXPECT_LT(std::abs(out.values[j] - std::polar(1.0, 2.0 * g.point(j) - 0.4)), 1e-14);
}

TEST(DirectKernel, Entries) {
  const auto g = make_grid(0.0, 1.0, 10);  // dx = 0.1
  const double eta = 0.5;
  const auto K = direct_kernel(eta, g);
  const cplx amp = std::sqrt(1.0 / (std::numbers::pi * eta)) * std::polar(1.0, std::numbers::pi / 4.0);
  EXPECT_LT(std::abs(K[0] - amp * g.dx()), 1e-15);
  EXPECT_LT(std::abs(K[3] - amp * std::exp(cplx(0.0, -0.09 / 2.0)) * 0.1), 1e-15);
  EXPECT_THROW(direct_kernel(0.0, g), Error);
  try {
    direct_kernel(0.0, g);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_kernel);
  }
}

TEST(DirectKernel, AdjointIsConsistent) {
  // <K f, g> = <f, K^* g> for the zero-padded convolution.
  const auto grid = make_grid(-5.0, 5.0, 40);
  LinearOperator op(grid, {0.3, LinearMode::direct_kernel});
  std::mt19937_64 rng(9);
  const auto f = oracle::random_field(40, rng);
  const auto h = oracle::random_field(40, rng);
  const auto Kf = op.apply(f);
  const auto Kh = op.apply_adjoint(h);
  cplx lhs = 0.0, rhs = 0.0;
  for (std::size_t j = 0; j < 40; ++j) {
    lhs += Kf[j] * std::conj(h[j]);
    rhs += f[j] * std::conj(Kh[j]);
  }
  EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
}

TEST(NonlinearStep, Examples) {
  const auto g = make_grid(0.0, 1.0, 6);
  const std::vector<double> zero_h(6, 0.0);
  const WaveField zero(g, std::vector<cplx>(6, 0.0));
  for (const auto& z : nonlinear_step(zero, 3.0, zero_h).values) EXPECT_EQ(z, cplx(0.0, 0.0));

  const WaveField ones(g, std::vector<cplx>(6, 1.0));
  for (const auto& z : nonlinear_step(ones, std::numbers::pi, zero_h).values)
    EXPECT_LT(std::abs(z - cplx(-1.0, 0.0)), 1e-15);

  std::mt19937_64 rng(10);
  const WaveField f(g, oracle::random_field(6, rng));
  const std::vector<double> c0(6, 0.7);
  const auto out = nonlinear_step(f, 0.0, c0);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_LT(std::abs(out.values[j] - f.values[j] * std::polar(1.0, 0.7)), 1e-15);

  const auto r = nonlinear_step(f, 1.3, oracle::random_real(6, rng));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(std::abs(r.values[j]), std::abs(f.values[j]), 1e-15);
  EXPECT_THROW(nonlinear_step(f, 0.0, std::vector<double>(5)), Error);
}

TEST(Propagate, LinearPlaneWaveIsExact) {
  const auto g = make_grid(0.0, 2.0 * std::numbers::pi, 32);
  const int k = 3;
  const double beta = 0.7, T = 1.3;
  const auto f0 = sample_field(g, [&](double x) { return std::polar(1.0, k * x); });
  const auto out = propagate(f0, params(beta, 0.0, std::vector<double>(32, 0.0), T / 7, 7)).field;
  for (std::size_t j = 0; j < 32; ++j)
    EXPECT_LT(std::abs(out.values[j] - std::polar(1.0, k * g.point(j) - beta * k * k * T)), 1e-10);
}

TEST(Propagate, ConstantPotentialIsPhase) {
  const auto g = make_grid(-1.0, 1.0, 16);
  std::mt19937_64 rng(11);
  const WaveField f0(g, oracle::random_field(16, rng));
  const double c0 = 0.9, T = 2.0;
  const auto out = propagate(f0, params(0.0, 0.0, std::vector<double>(16, c0), T / 5, 5)).field;
  for (std::size_t j = 0; j < 16; ++j) EXPECT_LT(std::abs(out.values[j] - f0.values[j] * std::polar(1.0, c0 * T)), 1e-12);
}

TEST(Propagate, Example1ReferenceRefinement) {
  auto s = scenario_example1(true);  // M = 4000
  s.N = 200;
  const auto out = propagate(s.exact_at(0.0), s.params()).field;
  EXPECT_LE(rel_misfit(out, s.exact_at(s.T)), 1e-6);
}

TEST(Propagate, ConservesMass) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t M = trial % 2 ? 63 : 128;
    const auto g = make_grid(-3.0, 4.0, M);
    const WaveField f0(g, oracle::random_field(M, rng));
    const auto p = params(u(rng), u(rng), oracle::random_real(M, rng, 3.0), 0.05, 60);
    for (bool merged : {true, false}) {
      PropagateOptions o;
      o.merged = merged;
      const auto out = propagate(f0, p, false, o).field;
      EXPECT_NEAR(oracle::l2(out.values) / oracle::l2(f0.values), 1.0, 1e-12);
    }
  }
}

TEST(Propagate, MergedEqualsUnmerged) {
  std::mt19937_64 rng(13);
  const auto g = make_grid(0.0, 5.0, 96);
  const WaveField f0(g, oracle::random_field(96, rng));
  const auto p = params(-0.8, 1.1, oracle::random_real(96, rng), 0.03, 9);
  PropagateOptions un;
  un.merged = false;
  EXPECT_LT(oracle::rel_diff(propagate(f0, p).field.values, propagate(f0, p, false, un).field.values), 1e-12);
}

TEST(Propagate, TimeReversal) {
  std::mt19937_64 rng(14);
  const auto g = make_grid(-4.0, 4.0, 128);
  const auto f0 = sample_field(g, [](double x) { return std::exp(cplx(-x * x, 0.5 * x)); });
  const auto p = params(-1.0, 1.0, oracle::random_real(128, rng), 0.02, 25);
  const auto back = reverse_propagate(propagate(f0, p).field, p);
  EXPECT_LT(oracle::rel_diff(back.values, f0.values), 1e-10);
}

TEST(Propagate, TapeHoldsOneActivationPerLayer) {
  const auto g = make_grid(0.0, 1.0, 16);
  const WaveField f0(g, std::vector<cplx>(16, 1.0));
  const auto r = propagate(f0, params(1.0, 1.0, std::vector<double>(16, 0.0), 0.1, 5), true);
  ASSERT_TRUE(r.tape.has_value());
  EXPECT_EQ(r.tape->activation_inputs.size(), 5u);
  EXPECT_EQ(r.tape->final, r.field.values);
  EXPECT_FALSE(propagate(f0, params(1.0, 1.0, std::vector<double>(16, 0.0), 0.1, 5)).tape.has_value());
}

TEST(Propagate, ValidatesParameters) {
  const auto g = make_grid(0.0, 1.0, 8);
  const WaveField f0(g, std::vector<cplx>(8, 1.0));
  EXPECT_THROW(propagate(f0, params(1.0, 0.0, std::vector<double>(8, 0.0), 0.0, 1)), Error);
  EXPECT_THROW(propagate(f0, params(1.0, 0.0, std::vector<double>(8, 0.0), 0.1, 0)), Error);
  EXPECT_THROW(propagate(f0, params(1.0, 0.0, std::vector<double>(7, 0.0), 0.1, 1)), Error);
  std::vector<double> bad(8, 0.0);
  bad[3] = NAN;
  EXPECT_THROW(propagate(f0, params(1.0, 0.0, bad, 0.1, 1)), Error);
}

TEST(Propagate, NonfiniteInputIsReported) {
  const auto g = make_grid(0.0, 1.0, 8);
  std::vector<cplx> v(8, 1.0);
  v[2] = cplx(INFINITY, 0.0);
  const WaveField f0(g, v);
  PropagateOptions o;
  o.check_each_layer = true;
  try {
    propagate(f0, params(1.0, 0.0, std::vector<double>(8, 0.0), 0.1, 3), false, o);
    FAIL() << "expected nonfinite_field";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::nonfinite_field);
  }
}

TEST(FirstOrder, ExactCases) {
  std::mt19937_64 rng(15);
  const auto g = make_grid(0.0, 2.0 * std::numbers::pi, 32);
  const WaveField f0(g, oracle::random_field(32, rng));
  const auto lin = params(0.6, 0.0, std::vector<double>(32, 0.0), 0.4, 1);
  EXPECT_LT(oracle::rel_diff(first_order_propagate(f0, lin).values, propagate(f0, lin).field.values), 1e-13);
  const auto nl = params(0.0, 0.8, oracle::random_real(32, rng), 0.1, 6);
  EXPECT_LT(oracle::rel_diff(first_order_propagate(f0, nl).values, propagate(f0, nl).field.values), 1e-13);
}

TEST(FirstOrder, ErrorHalvesWithStep) {
  auto s = scenario_example1();
  s.M = 1024;
  double prev = 0.0;
  for (std::size_t N : {50u, 100u, 200u}) {
    s.N = N;
    const double e = std::sqrt(2.0 * rel_misfit(first_order_propagate(s.exact_at(0), s.params()), s.exact_at(s.T)));
    if (prev > 0.0) EXPECT_NEAR(prev / e, 2.0, 0.2);
    prev = e;
  }
}

TEST(Propagate, StrangErrorQuartersWithStep) {
  auto s = scenario_example1();
  s.M = 1024;
  double prev = 0.0;
  for (std::size_t N : {50u, 100u, 200u}) {
    s.N = N;
    const double e = std::sqrt(2.0 * rel_misfit(propagate(s.exact_at(0), s.params()).field, s.exact_at(s.T)));
    if (prev > 0.0) EXPECT_NEAR(std::log2(prev / e), 2.0, 0.2);
    prev = e;
  }
}

TEST(Propagate, DirectKernelModeRuns) {
  // The zero-padded kernel is not the periodic propagator; only check it
  // produces a finite field of the right size.
  const auto g = make_grid(-5.0, 5.0, 64);
  const auto f0 = sample_field(g, [](double x) { return std::exp(-x * x); });
  PropagateOptions o;
  o.mode = LinearMode::direct_kernel;
  const auto out = propagate(f0, params(1.0, 0.5, std::vector<double>(64, 0.0), 0.05, 2), false, o).field;
  EXPECT_EQ(out.size(), 64u);
  EXPECT_TRUE(out.all_finite());
}
