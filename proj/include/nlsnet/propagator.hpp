#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nlsnet/error.hpp"
#include "nlsnet/field.hpp"

namespace nlsnet {

/// Constants of i psi_t + beta psi_xx + gamma |psi|^2 psi + V psi = 0 and the
/// layer layout (N layers of width dt).
struct ProblemParams {
  double beta = 1.0;
  double gamma = 0.0;
  std::vector<double> V;
  double dt = 1.0;
  std::size_t N = 1;

  double T() const { return static_cast<double>(N) * dt; }
};

inline void validate(const ProblemParams& p, const Grid1D& grid) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt))
    throw Error(ErrorKind::invalid_argument, "dt must be positive");
  if (p.N < 1) throw Error(ErrorKind::invalid_argument, "N must be at least 1");
  if (p.V.size() != grid.M)
    throw Error(ErrorKind::length_mismatch, "potential length differs from grid size");
  for (double v : p.V)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "potential has nonfinite entries");
  if (!std::isfinite(p.beta) || !std::isfinite(p.gamma))
    throw Error(ErrorKind::invalid_argument, "beta and gamma must be finite");
}

enum class LinearMode { spectral, direct_kernel };

struct LinearStepSpec {
  double eta = 0.0;
  LinearMode mode = LinearMode::spectral;
};

/// Exact flow of i psi_t + beta psi_xx = 0 over one step with eta = beta dt:
/// m_k = exp(-i eta k^2).
inline SpectralSymbol linear_symbol(double eta, const Grid1D& grid) {
  const auto k = wavenumbers(grid);
  SpectralSymbol s{std::vector<cplx>(grid.M)};
  for (std::size_t q = 0; q < grid.M; ++q) s.multipliers[q] = std::polar(1.0, -eta * k[q] * k[q]);
  return s;
}

/// Sampled Fresnel-type kernel sqrt(i/(pi eta)) exp(-i (j dx)^2 / (4 eta)),
/// multiplied by the quadrature weight dx, for offsets j = 0..M-1.
/// Kept for comparison with the spectral step only; its normalization is not
/// that of the exact propagator.
inline std::vector<cplx> direct_kernel(double eta, const Grid1D& grid) {
  if (eta == 0.0) throw Error(ErrorKind::singular_kernel, "direct kernel undefined for eta = 0");
  const cplx amplitude = std::sqrt(cplx(0.0, 1.0) / (std::numbers::pi * eta));
  const double dx = grid.dx();
  std::vector<cplx> K(grid.M);
  for (std::size_t j = 0; j < grid.M; ++j) {
    const double s = static_cast<double>(j) * dx;
    K[j] = amplitude * std::polar(1.0, -s * s / (4.0 * eta)) * dx;
  }
  return K;
}

/// Zero-padded convolution out[n] = sum_m K[|n - m|] f[m]; samples outside the
/// grid contribute nothing.
inline std::vector<cplx> apply_direct_kernel(std::span<const cplx> f, std::span<const cplx> K) {
  if (f.size() != K.size()) throw Error(ErrorKind::length_mismatch, "kernel length differs");
  const std::size_t M = f.size();
  std::vector<cplx> out(M);
  for (std::size_t n = 0; n < M; ++n) {
    cplx acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) acc += K[n > m ? n - m : m - n] * f[m];
    out[n] = acc;
  }
  return out;
}

/// A linear layer with its adjoint, in either discretization.
class LinearOperator {
 public:
  LinearOperator(const Grid1D& grid, LinearStepSpec spec) : spec_(spec) {
    if (spec.mode == LinearMode::spectral) {
      symbol_ = linear_symbol(spec.eta, grid);
    } else {
      kernel_ = direct_kernel(spec.eta, grid);
    }
  }

  /// Wraps an arbitrary spectral symbol (used by the coupled system).
  explicit LinearOperator(SpectralSymbol symbol) : symbol_(std::move(symbol)) {}

  std::vector<cplx> apply(std::span<const cplx> f) const {
    if (spec_.mode == LinearMode::spectral) return apply_symbol(f, symbol_);
    return apply_direct_kernel(f, kernel_);
  }

  std::vector<cplx> apply_adjoint(std::span<const cplx> f) const {
    if (spec_.mode == LinearMode::spectral) return apply_symbol(f, symbol_.conj());
    // The kernel matrix is symmetric, so its adjoint is its entrywise conjugate.
    std::vector<cplx> conj_kernel(kernel_.size());
    for (std::size_t j = 0; j < kernel_.size(); ++j) conj_kernel[j] = std::conj(kernel_[j]);
    return apply_direct_kernel(f, conj_kernel);
  }

 private:
  LinearStepSpec spec_;
  SpectralSymbol symbol_;
  std::vector<cplx> kernel_;
};

/// G(u; g, h) = u exp(i (g |u|^2 + h)), applied pointwise.
inline std::vector<cplx> nonlinear_step(std::span<const cplx> f, double g, std::span<const double> h) {
  if (h.size() != f.size()) throw Error(ErrorKind::length_mismatch, "phase vector length differs");
  std::vector<cplx> out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    out[j] = f[j] * std::polar(1.0, g * std::norm(f[j]) + h[j]);
  return out;
}

inline WaveField nonlinear_step(const WaveField& f, double g, std::span<const double> h) {
  return WaveField(f.grid, nonlinear_step(std::span<const cplx>(f.values), g, h));
}

/// Fields entering each nonlinear activation, in layer order, plus the
/// endpoints of the propagation.
struct PropagationTape {
  std::vector<cplx> initial;
  std::vector<std::vector<cplx>> activation_inputs;
  std::vector<cplx> final;
};

struct PropagateOptions {
  /// Merge interior half steps into full steps (C_h G C G ... C G C_h).
  bool merged = true;
  LinearMode mode = LinearMode::spectral;
  /// Check finiteness after every layer instead of only at the end.
  bool check_each_layer = false;
  /// Multiplies the nonlinear phase. Anything but 1 is a deliberate defect,
  /// used to prove the verification gates catch a miscoded activation.
  double phase_sign = 1.0;
};

struct PropagationResult {
  WaveField field;
  std::optional<PropagationTape> tape;
};

namespace detail {

inline std::vector<double> scaled(std::span<const double> v, double s) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x *= s;
  return out;
}

inline void require_finite(std::span<const cplx> v, const char* where) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(ErrorKind::nonfinite_field, where);
}

// Strang layers with a signed step; dt < 0 runs the exact inverse map.
inline PropagationResult strang(const WaveField& f0, const ProblemParams& p, double dt, bool record,
                                const PropagateOptions& opts) {
  const auto& grid = f0.grid;
  const LinearOperator half(grid, {p.beta * dt / 2.0, opts.mode});
  const double g = opts.phase_sign * p.gamma * dt;
  const auto h = scaled(p.V, opts.phase_sign * dt);

  std::optional<PropagationTape> tape;
  if (record) {
    tape.emplace();
    tape->initial = f0.values;
    tape->activation_inputs.reserve(p.N);
  }

  std::vector<cplx> u = f0.values;
  if (opts.merged) {
    const LinearOperator full(grid, {p.beta * dt, opts.mode});
    u = half.apply(u);
    for (std::size_t n = 0; n < p.N; ++n) {
      if (tape) tape->activation_inputs.push_back(u);
      u = nonlinear_step(u, g, h);
      u = (n + 1 < p.N) ? full.apply(u) : half.apply(u);
      if (opts.check_each_layer) require_finite(u, "field became nonfinite during propagation");
    }
  } else {
    for (std::size_t n = 0; n < p.N; ++n) {
      u = half.apply(u);
      if (tape) tape->activation_inputs.push_back(u);
      u = nonlinear_step(u, g, h);
      u = half.apply(u);
      if (opts.check_each_layer) require_finite(u, "field became nonfinite during propagation");
    }
  }
  require_finite(u, "propagated field is nonfinite");
  if (tape) tape->final = u;
  return {WaveField(grid, std::move(u)), std::move(tape)};
}

}  // namespace detail

/// Strang split-step propagation (C_h o G o C_h)^N of f0 over N layers.
inline PropagationResult propagate(const WaveField& f0, const ProblemParams& p, bool record = false,
                                   const PropagateOptions& opts = {}) {
  validate(p, f0.grid);
  return detail::strang(f0, p, p.dt, record, opts);
}

/// Runs the Strang layers with dt -> -dt, which inverts propagate() exactly up
/// to roundoff (the scheme is symmetric, so the reversed layer order is the
/// same composition).
inline WaveField reverse_propagate(const WaveField& fT, const ProblemParams& p,
                                   const PropagateOptions& opts = {}) {
  validate(p, fT.grid);
  return detail::strang(fT, p, -p.dt, false, opts).field;
}

/// Lie splitting: a full linear step followed by a full nonlinear step per layer.
inline WaveField first_order_propagate(const WaveField& f0, const ProblemParams& p,
                                       const PropagateOptions& opts = {}) {
  validate(p, f0.grid);
  const LinearOperator full(f0.grid, {p.beta * p.dt, opts.mode});
  const double g = opts.phase_sign * p.gamma * p.dt;
  const auto h = detail::scaled(p.V, opts.phase_sign * p.dt);
  std::vector<cplx> u = f0.values;
  for (std::size_t n = 0; n < p.N; ++n) {
    u = full.apply(u);
    u = nonlinear_step(u, g, h);
    if (opts.check_each_layer) detail::require_finite(u, "field became nonfinite during propagation");
  }
  detail::require_finite(u, "propagated field is nonfinite");
  return WaveField(f0.grid, std::move(u));
}

}  // namespace nlsnet
