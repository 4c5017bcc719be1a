#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "nlsnet/adjoint.hpp"
#include "nlsnet/coupled.hpp"
#include "nlsnet/dictionary.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/propagator.hpp"
#include "nlsnet/trainer.hpp"

// Randomized self-checks shared by the `verify` command and the test suites.

namespace nlsnet::verification {

/// Smooth random complex field: a few low Fourier modes on top of a unit
/// offset, so no sample is close to zero.
inline WaveField random_smooth_field(const Grid1D& grid, std::mt19937_64& rng, int modes = 4) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<cplx> coef(2 * modes + 1);
  for (auto& c : coef) c = cplx(n01(rng), n01(rng)) * 0.25;
  const double k0 = 2.0 * std::numbers::pi / grid.length();
  return sample_field(grid, [&](double x) {
    cplx v(1.0, 0.0);
    for (int m = -modes; m <= modes; ++m) v += coef[m + modes] * std::polar(1.0, k0 * m * x);
    return v;
  });
}

inline std::vector<double> random_smooth_potential(const Grid1D& grid, std::mt19937_64& rng, int modes = 3) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> a(modes + 1), b(modes + 1);
  for (int m = 0; m <= modes; ++m) {
    a[m] = n01(rng);
    b[m] = n01(rng);
  }
  const double k0 = 2.0 * std::numbers::pi / grid.length();
  std::vector<double> V(grid.M);
  for (std::size_t i = 0; i < grid.M; ++i) {
    const double x = grid.point(i);
    for (int m = 0; m <= modes; ++m) V[i] += a[m] * std::cos(k0 * m * x) + b[m] * std::sin(k0 * m * x);
  }
  return V;
}

struct RandomInstance {
  InverseProblem problem;
  DictionaryMatrix phi;
  Coeffs c;
};

/// Random potential inverse problem on [0, 2 pi] with M samples and N layers.
/// Observations come from a different potential than the evaluation point,
/// so the residual and the gradient are both nonzero.
inline RandomInstance random_instance(std::size_t M, std::size_t N, std::uint64_t seed,
                                      const PropagateOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto grid = make_grid(0.0, 2.0 * std::numbers::pi, M);

  RandomInstance inst;
  inst.phi = assemble(default_library(), grid);
  inst.c.resize(inst.phi.cols());
  for (auto& v : inst.c) v = 0.5 * coef(rng);

  ProblemParams p;
  p.beta = 0.5 + 0.5 * u01(rng);
  p.gamma = coef(rng);
  p.dt = 0.1;
  p.N = N;
  p.V = random_smooth_potential(grid, rng);

  inst.problem.initial = random_smooth_field(grid, rng);
  inst.problem.params = p;
  inst.problem.options = opts;
  inst.problem.target = propagate(inst.problem.initial, p, false, opts).field;
  return inst;
}

inline std::vector<std::size_t> random_indices(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, n));
  std::sort(all.begin(), all.end());
  return all;
}

/// Adjoint gradient in V at a perturbed potential vs central differences of
/// the forward loss. `fd_options` lets the oracle run a different forward
/// model than the adjoint (used to show a miscoded forward map is caught).
inline double gradient_check_V(std::size_t M, std::size_t N, std::uint64_t seed, std::size_t probes = 10,
                               double step = 1e-5, const PropagateOptions& fd_options = {}) {
  auto inst = random_instance(M, N, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ProblemParams p = inst.problem.params;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& v : p.V) v += 0.3 * n01(rng);
  const auto rep = misfit_grad_V(inst.problem.initial, inst.problem.target, p);
  const FDSpec spec{step, random_indices(M, probes, rng)};
  const auto fd = fd_gradient(
      [&](std::span<const double> V) {
        ProblemParams q = p;
        q.V.assign(V.begin(), V.end());
        return rel_misfit(propagate(inst.problem.initial, q, false, fd_options).field, inst.problem.target);
      },
      p.V, spec);
  return max_relative_deviation(rep.grad, fd, spec.indices);
}

/// Same, in dictionary coefficients.
inline double gradient_check_coeffs(std::size_t M, std::size_t N, std::uint64_t seed, std::size_t probes = 10,
                                    double step = 1e-5, const PropagateOptions& fd_options = {}) {
  auto inst = random_instance(M, N, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  const auto rep = misfit_grad_coeffs(inst.problem.initial, inst.problem.target, inst.problem.params, inst.phi, inst.c);
  const FDSpec spec{step, random_indices(inst.c.size(), probes, rng)};
  const auto fd = fd_gradient(
      [&](std::span<const double> c) {
        ProblemParams q = inst.problem.params;
        q.V = synthesize(inst.phi, c);
        return rel_misfit(propagate(inst.problem.initial, q, false, fd_options).field, inst.problem.target);
      },
      inst.c, spec);
  return max_relative_deviation(rep.grad, fd, spec.indices);
}

/// Random coupled instance on [0, 2 pi] with couplings drawn in [0.3, 1]^2.
struct RandomCoupled {
  Example3Data data;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
};

inline RandomCoupled random_coupled(std::size_t M, std::size_t N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto grid = make_grid(0.0, 2.0 * std::numbers::pi, M);
  RandomCoupled out;
  CoupledParams p;
  p.alpha1 = u01(rng) - 0.5;
  p.alpha2 = u01(rng) - 0.5;
  p.zeta1 = 0.3 + 0.7 * u01(rng);
  p.zeta2 = 0.3 + 0.7 * u01(rng);
  p.V1 = random_smooth_potential(grid, rng);
  p.V2 = random_smooth_potential(grid, rng);
  p.dt = 0.1;
  p.N = N;
  p.coupling_sign = u01(rng) < 0.5 ? -1.0 : 1.0;
  out.data.initial = CoupledField(random_smooth_field(grid, rng), random_smooth_field(grid, rng));
  out.data.params = p;
  out.data.target = coupled_propagate(out.data.initial, p).field;
  out.zeta1 = 0.3 + 0.7 * u01(rng);
  out.zeta2 = 0.3 + 0.7 * u01(rng);
  return out;
}

inline double gradient_check_zetas(std::size_t M, std::size_t N, std::uint64_t seed, double step = 1e-5) {
  const auto inst = random_coupled(M, N, seed);
  const auto rep = coupled_grad_zetas(inst.data, inst.zeta1, inst.zeta2);
  const std::vector<double> z0{inst.zeta1, inst.zeta2};
  const auto fd = fd_gradient([&](std::span<const double> z) { return coupled_loss(z[0], z[1], inst.data); }, z0,
                              FDSpec{step, {}});
  return max_relative_deviation(rep.grad, fd, {});
}

/// Worst relative mass drift |(|S f| - |f|)| / |f| over `trials` random
/// fields and potentials.
inline double mass_drift(std::span<const std::size_t> sizes, std::size_t trials, std::size_t N, std::uint64_t seed,
                         const PropagateOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto grid = make_grid(-5.0, 5.0, sizes[t % sizes.size()]);
    ProblemParams p;
    p.beta = u01(rng) * 2.0 - 1.0;
    p.gamma = u01(rng) * 2.0 - 1.0;
    p.dt = 0.01;
    p.N = N;
    std::normal_distribution<double> n01(0.0, 1.0);
    p.V.resize(grid.M);
    for (auto& v : p.V) v = 5.0 * n01(rng);
    std::vector<cplx> vals(grid.M);
    for (auto& v : vals) v = cplx(n01(rng), n01(rng));
    const WaveField f0(grid, vals);
    const auto out = propagate(f0, p, false, opts).field;
    const double n0 = std::sqrt(norm_sq(f0.values));
    worst = std::max(worst, std::abs(std::sqrt(norm_sq(out.values)) - n0) / n0);
  }
  return worst;
}

/// Worst relative difference between merged and unmerged Strang layering.
inline double composition_defect(std::size_t trials, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto inst = random_instance(64 + 32 * (t % 3), 3 + t % 5, seed + t);
    PropagateOptions merged, unmerged;
    unmerged.merged = false;
    const auto a = propagate(inst.problem.initial, inst.problem.params, false, merged).field;
    const auto b = propagate(inst.problem.initial, inst.problem.params, false, unmerged).field;
    worst = std::max(worst, std::sqrt(2.0 * rel_misfit(a, b)));
  }
  return worst;
}

}  // namespace nlsnet::verification
