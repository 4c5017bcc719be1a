#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nlsnet/coupled.hpp"
#include "nlsnet/dictionary.hpp"
#include "nlsnet/error.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/parallel.hpp"
#include "nlsnet/propagator.hpp"

namespace nlsnet {

enum class ParamKind { v_samples, coeffs, zetas };

struct GradientReport {
  double loss = 0.0;
  std::vector<double> grad;
  ParamKind kind = ParamKind::v_samples;
};

// Conventions for the reverse sweep. A complex field u is treated as the real
// pair (Re u, Im u); the adjoint of a real loss L is carried as
// lambda = dL/dRe u + i dL/dIm u. For w = u e^{i phi} with real phi(u, h):
//   dL/dphi = Im(lambda_w conj(w)),
//   lambda_u = lambda_w e^{-i phi} + 2 u dL/d|u|^2.
// Complex-linear layers pull lambda back through their Hermitian adjoint.

namespace detail {

inline void require_finite_grad(std::span<const double> g) {
  for (double v : g)
    if (!std::isfinite(v)) throw Error(ErrorKind::nonfinite_gradient, "gradient has nonfinite entries");
}

inline std::vector<cplx> misfit_seed(std::span<const cplx> out, std::span<const cplx> target) {
  const double ref = norm_sq(target);
  std::vector<cplx> lambda(out.size());
  for (std::size_t j = 0; j < out.size(); ++j) lambda[j] = (out[j] - target[j]) / ref;
  return lambda;
}

}  // namespace detail

/// Data term e_psi = 1/2 |S(V) f0 - target|^2 / |target|^2 and its gradient in
/// every potential sample V_j.
inline GradientReport misfit_grad_V(const WaveField& f0, const WaveField& target, const ProblemParams& p,
                                    const PropagateOptions& opts = {}) {
  if (!(target.grid == f0.grid)) throw Error(ErrorKind::length_mismatch, "target grid differs");
  const auto fwd = propagate(f0, p, true, opts);
  const auto& tape = *fwd.tape;
  const double loss = rel_misfit(fwd.field, target);

  const Grid1D& grid = f0.grid;
  const double dt = p.dt;
  const LinearOperator half(grid, {p.beta * dt / 2.0, opts.mode});
  const LinearOperator full(grid, {p.beta * dt, opts.mode});
  const double g = opts.phase_sign * p.gamma * dt;
  const double h_per_V = opts.phase_sign * dt;

  std::vector<double> grad_h(grid.M, 0.0);
  auto lambda = detail::misfit_seed(tape.final, target.values);
  lambda = half.apply_adjoint(lambda);
  for (std::size_t layer = p.N; layer-- > 0;) {
    const auto& a = tape.activation_inputs[layer];
    for (std::size_t j = 0; j < grid.M; ++j) {
      const double phi = g * std::norm(a[j]) + h_per_V * p.V[j];
      const cplx rot = std::polar(1.0, phi);
      const cplx w = a[j] * rot;
      const double s = std::imag(lambda[j] * std::conj(w));
      grad_h[j] += s;
      lambda[j] = lambda[j] * std::conj(rot) + 2.0 * g * s * a[j];
    }
    if (layer == 0) break;
    if (opts.merged) {
      lambda = full.apply_adjoint(lambda);
    } else {
      lambda = half.apply_adjoint(half.apply_adjoint(lambda));
    }
  }

  GradientReport out{loss, std::vector<double>(grid.M), ParamKind::v_samples};
  for (std::size_t j = 0; j < grid.M; ++j) out.grad[j] = h_per_V * grad_h[j];
  detail::require_finite_grad(out.grad);
  return out;
}

/// Gradient in the dictionary coefficients: V = Phi c, grad_c = Phi^T grad_V.
inline GradientReport misfit_grad_coeffs(const WaveField& f0, const WaveField& target, ProblemParams p,
                                         const DictionaryMatrix& phi, std::span<const double> c,
                                         const PropagateOptions& opts = {}) {
  if (phi.rows() != f0.grid.M)
    throw Error(ErrorKind::dimension_mismatch, "dictionary rows differ from grid size");
  p.V = synthesize(phi, c);
  auto rep = misfit_grad_V(f0, target, p, opts);
  rep.grad = transpose_apply(phi, rep.grad);
  rep.kind = ParamKind::coeffs;
  detail::require_finite_grad(rep.grad);
  return rep;
}

/// Gradient of J = e_psi1 + e_psi2 in (zeta1, zeta2), by a reverse sweep over
/// the coupled tape.
inline GradientReport coupled_grad_zetas(const Example3Data& data, double zeta1, double zeta2,
                                         bool merged = true) {
  CoupledParams p = data.params;
  p.zeta1 = zeta1;
  p.zeta2 = zeta2;
  const Grid1D& grid = data.initial.grid();
  const auto fwd = coupled_propagate(data.initial, p, true, merged);
  const auto& t1 = fwd.tape->first;
  const auto& t2 = fwd.tape->second;
  const double loss = rel_misfit(fwd.field.psi1, data.target.psi1) + rel_misfit(fwd.field.psi2, data.target.psi2);

  const LinearOperator half1(drift_symbol(p.alpha1, p.dt / 2.0, grid));
  const LinearOperator half2(drift_symbol(p.alpha2, p.dt / 2.0, grid));
  const LinearOperator full1(drift_symbol(p.alpha1, p.dt, grid));
  const LinearOperator full2(drift_symbol(p.alpha2, p.dt, grid));
  const double c = -p.coupling_sign * p.dt;  // d phi_j / d f_j

  auto l1 = half1.apply_adjoint(detail::misfit_seed(t1.final, data.target.psi1.values));
  auto l2 = half2.apply_adjoint(detail::misfit_seed(t2.final, data.target.psi2.values));
  double g1 = 0.0, g2 = 0.0;
  for (std::size_t layer = p.N; layer-- > 0;) {
    const auto& a1 = t1.activation_inputs[layer];
    const auto& a2 = t2.activation_inputs[layer];
    const auto ph = detail::coupled_phases(a1, a2, p, zeta1, zeta2);
    for (std::size_t j = 0; j < grid.M; ++j) {
      const double r1 = std::norm(a1[j]);
      const double r2 = std::norm(a2[j]);
      const cplx rot1 = std::polar(1.0, ph.phi1[j]);
      const cplx rot2 = std::polar(1.0, ph.phi2[j]);
      const double s1 = std::imag(l1[j] * std::conj(a1[j] * rot1));
      const double s2 = std::imag(l2[j] * std::conj(a2[j] * rot2));
      g1 += s1 * c * r2;
      g2 += s2 * c * r1;
      const double d_r1 = c * (s1 + zeta2 * s2);
      const double d_r2 = c * (zeta1 * s1 + s2);
      l1[j] = l1[j] * std::conj(rot1) + 2.0 * d_r1 * a1[j];
      l2[j] = l2[j] * std::conj(rot2) + 2.0 * d_r2 * a2[j];
    }
    if (layer == 0) break;
    if (merged) {
      l1 = full1.apply_adjoint(l1);
      l2 = full2.apply_adjoint(l2);
    } else {
      l1 = half1.apply_adjoint(half1.apply_adjoint(l1));
      l2 = half2.apply_adjoint(half2.apply_adjoint(l2));
    }
  }
  GradientReport out{loss, {g1, g2}, ParamKind::zetas};
  detail::require_finite_grad(out.grad);
  return out;
}

struct FDSpec {
  double step = 1e-5;
  /// Indices to probe; empty means all.
  std::vector<std::size_t> indices;
};

/// Central differences (L(x + h e_i) - L(x - h e_i)) / 2h. The result is
/// aligned with spec.indices (or with x0 when no indices are given). Probes
/// run concurrently.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& loss,
                                       std::span<const double> x0, const FDSpec& spec = {}) {
  if (!(spec.step > 0.0)) throw Error(ErrorKind::invalid_argument, "finite-difference step must be positive");
  std::vector<std::size_t> idx = spec.indices;
  if (idx.empty()) {
    idx.resize(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) idx[i] = i;
  }
  for (auto i : idx)
    if (i >= x0.size()) throw Error(ErrorKind::dimension_mismatch, "probe index out of range");
  std::vector<double> out(idx.size());
  parallel_for(idx.size(), [&](std::size_t n) {
    std::vector<double> x(x0.begin(), x0.end());
    const std::size_t i = idx[n];
    x[i] = x0[i] + spec.step;
    const double up = loss(x);
    x[i] = x0[i] - spec.step;
    const double down = loss(x);
    out[n] = (up - down) / (2.0 * spec.step);
  });
  return out;
}

/// max_i |adjoint_i - fd_i| / max(|fd_i|, floor) over the probed indices.
inline double max_relative_deviation(std::span<const double> adjoint, std::span<const double> fd,
                                     std::span<const std::size_t> indices, double floor = 1e-12) {
  double worst = 0.0;
  for (std::size_t n = 0; n < fd.size(); ++n) {
    const double a = adjoint[indices.empty() ? n : indices[n]];
    worst = std::max(worst, std::abs(a - fd[n]) / std::max(std::abs(fd[n]), floor));
  }
  return worst;
}

}  // namespace nlsnet
