#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "nlsnet/error.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/propagator.hpp"

namespace nlsnet {

/// Two fields on one grid, for
///   i d_t psi_j = -1/2 psi_j'' + V_j psi_j + i alpha_j psi_j' + s f_j(|psi_1|^2, |psi_2|^2) psi_j
/// with f_1(x, y) = x + zeta_1 y and f_2(x, y) = zeta_2 x + y.
struct CoupledField {
  WaveField psi1;
  WaveField psi2;

  CoupledField() = default;
  CoupledField(WaveField a, WaveField b) : psi1(std::move(a)), psi2(std::move(b)) {
    if (!(psi1.grid == psi2.grid))
      throw Error(ErrorKind::length_mismatch, "coupled fields live on different grids");
  }

  const Grid1D& grid() const { return psi1.grid; }
};

struct CoupledParams {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  std::vector<double> V1;
  std::vector<double> V2;
  double dt = 1.0;
  std::size_t N = 1;
  /// Sign s with which the coupling f_j enters the equation. +1 is the
  /// equation as written above; -1 is the focusing form whose sech pair is
  /// an exact solution.
  double coupling_sign = 1.0;

  double T() const { return static_cast<double>(N) * dt; }
};

inline void validate(const CoupledParams& p, const Grid1D& grid) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt))
    throw Error(ErrorKind::invalid_argument, "dt must be positive");
  if (p.N < 1) throw Error(ErrorKind::invalid_argument, "N must be at least 1");
  if (p.V1.size() != grid.M || p.V2.size() != grid.M)
    throw Error(ErrorKind::length_mismatch, "potential length differs from grid size");
  for (double x : {p.alpha1, p.alpha2, p.zeta1, p.zeta2, p.coupling_sign})
    if (!std::isfinite(x)) throw Error(ErrorKind::invalid_argument, "coupled parameters must be finite");
}

/// Linear flow of i psi_t = -1/2 psi_xx + i alpha psi_x over a step tau:
/// m_k = exp(-i (k^2/2 - alpha k) tau).
inline SpectralSymbol drift_symbol(double alpha, double tau, const Grid1D& grid) {
  const auto k = wavenumbers(grid);
  SpectralSymbol s{std::vector<cplx>(grid.M)};
  for (std::size_t q = 0; q < grid.M; ++q) {
    double kq = k[q];
    // Nyquist bin: the drift term has no partner there; keep only the
    // dispersive part so the step stays unitary and symmetric.
    if (grid.M % 2 == 0 && q == grid.M / 2) kq = 0.0;
    s.multipliers[q] = std::polar(1.0, -(k[q] * k[q] / 2.0 - alpha * kq) * tau);
  }
  return s;
}

/// Full-step symbols (one per field).
inline std::pair<SpectralSymbol, SpectralSymbol> coupled_linear_symbols(const CoupledParams& p,
                                                                        const Grid1D& grid) {
  return {drift_symbol(p.alpha1, p.dt, grid), drift_symbol(p.alpha2, p.dt, grid)};
}

namespace detail {

struct CoupledPhases {
  std::vector<double> phi1;
  std::vector<double> phi2;
};

inline CoupledPhases coupled_phases(std::span<const cplx> u1, std::span<const cplx> u2,
                                    const CoupledParams& p, double zeta1, double zeta2) {
  const std::size_t M = u1.size();
  CoupledPhases out{std::vector<double>(M), std::vector<double>(M)};
  for (std::size_t j = 0; j < M; ++j) {
    const double r1 = std::norm(u1[j]);
    const double r2 = std::norm(u2[j]);
    out.phi1[j] = -(p.V1[j] + p.coupling_sign * (r1 + zeta1 * r2)) * p.dt;
    out.phi2[j] = -(p.V2[j] + p.coupling_sign * (zeta2 * r1 + r2)) * p.dt;
  }
  return out;
}

}  // namespace detail

/// psi_j <- psi_j exp(-i (V_j + s f_j) dt). Both moduli are preserved pointwise.
inline CoupledField coupled_nonlinear_step(const CoupledField& f, const CoupledParams& p) {
  validate(p, f.grid());
  const auto ph = detail::coupled_phases(f.psi1.values, f.psi2.values, p, p.zeta1, p.zeta2);
  std::vector<cplx> a(f.psi1.values), b(f.psi2.values);
  for (std::size_t j = 0; j < a.size(); ++j) {
    a[j] *= std::polar(1.0, ph.phi1[j]);
    b[j] *= std::polar(1.0, ph.phi2[j]);
  }
  return CoupledField(WaveField(f.grid(), std::move(a)), WaveField(f.grid(), std::move(b)));
}

struct CoupledTape {
  PropagationTape first;
  PropagationTape second;
};

struct CoupledResult {
  CoupledField field;
  std::optional<CoupledTape> tape;
};

/// Strang layers: half linear step on both fields, coupled phase step, half
/// linear step. Interior half steps are merged when `merged` is set.
inline CoupledResult coupled_propagate(const CoupledField& f0, const CoupledParams& p,
                                       bool record = false, bool merged = true) {
  const Grid1D& grid = f0.grid();
  validate(p, grid);
  const LinearOperator half1(drift_symbol(p.alpha1, p.dt / 2.0, grid));
  const LinearOperator half2(drift_symbol(p.alpha2, p.dt / 2.0, grid));
  const LinearOperator full1(drift_symbol(p.alpha1, p.dt, grid));
  const LinearOperator full2(drift_symbol(p.alpha2, p.dt, grid));

  std::optional<CoupledTape> tape;
  if (record) {
    tape.emplace();
    tape->first.initial = f0.psi1.values;
    tape->second.initial = f0.psi2.values;
  }

  std::vector<cplx> u1 = f0.psi1.values, u2 = f0.psi2.values;
  if (merged) {
    u1 = half1.apply(u1);
    u2 = half2.apply(u2);
  }
  for (std::size_t n = 0; n < p.N; ++n) {
    if (!merged) {
      u1 = half1.apply(u1);
      u2 = half2.apply(u2);
    }
    if (tape) {
      tape->first.activation_inputs.push_back(u1);
      tape->second.activation_inputs.push_back(u2);
    }
    const auto ph = detail::coupled_phases(u1, u2, p, p.zeta1, p.zeta2);
    for (std::size_t j = 0; j < u1.size(); ++j) {
      u1[j] *= std::polar(1.0, ph.phi1[j]);
      u2[j] *= std::polar(1.0, ph.phi2[j]);
    }
    const bool last = n + 1 == p.N;
    if (merged && !last) {
      u1 = full1.apply(u1);
      u2 = full2.apply(u2);
    } else {
      u1 = half1.apply(u1);
      u2 = half2.apply(u2);
    }
  }
  detail::require_finite(u1, "first coupled field is nonfinite");
  detail::require_finite(u2, "second coupled field is nonfinite");
  if (tape) {
    tape->first.final = u1;
    tape->second.final = u2;
  }
  return {CoupledField(WaveField(grid, std::move(u1)), WaveField(grid, std::move(u2))), std::move(tape)};
}

/// Observations for the coupling inverse problem.
struct Example3Data {
  CoupledField initial;
  CoupledField target;
  CoupledParams params;  // zeta1/zeta2 are overridden by the loss arguments
};

/// J = e_psi1 + e_psi2 at couplings (zeta1, zeta2).
inline double coupled_loss(double zeta1, double zeta2, const Example3Data& data) {
  CoupledParams p = data.params;
  p.zeta1 = zeta1;
  p.zeta2 = zeta2;
  const auto out = coupled_propagate(data.initial, p);
  return rel_misfit(out.field.psi1, data.target.psi1) + rel_misfit(out.field.psi2, data.target.psi2);
}

}  // namespace nlsnet
