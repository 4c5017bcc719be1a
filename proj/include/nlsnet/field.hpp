#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "nlsnet/error.hpp"
#include "nlsnet/fft.hpp"

namespace nlsnet {

/// Uniform periodic grid on (a, b]: x_j = a + j (b - a) / M for j = 1..M.
/// The right endpoint is a grid point, the left one is not.
struct Grid1D {
  double a = 0.0;
  double b = 1.0;
  std::size_t M = 2;

  double length() const { return b - a; }
  double dx() const { return (b - a) / static_cast<double>(M); }

  /// Zero-based access: point(0) = x_1, point(M - 1) = x_M = b.
  double point(std::size_t i) const {
    if (i + 1 == M) return b;
    return a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(M);
  }

  std::vector<double> points() const {
    std::vector<double> x(M);
    for (std::size_t i = 0; i < M; ++i) x[i] = point(i);
    return x;
  }

  bool operator==(const Grid1D&) const = default;
};

inline Grid1D make_grid(double a, double b, std::size_t M) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(b > a))
    throw Error(ErrorKind::invalid_domain, "grid requires b > a");
  if (M < 2) throw Error(ErrorKind::invalid_domain, "grid requires M >= 2");
  return Grid1D{a, b, M};
}

/// Signed integer frequency for FFT bin q, using the symmetric layout
/// {-M/2, ..., M/2-1} (even M) or {-(M-1)/2, ..., (M-1)/2} (odd M).
inline long signed_frequency(std::size_t q, std::size_t M) {
  const std::size_t half = (M + 1) / 2;
  return q < half ? static_cast<long>(q) : static_cast<long>(q) - static_cast<long>(M);
}

/// Angular wavenumbers k = 2 pi j / (b - a), in FFT bin order.
inline std::vector<double> wavenumbers(const Grid1D& grid) {
  std::vector<double> k(grid.M);
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t q = 0; q < grid.M; ++q)
    k[q] = base * static_cast<double>(signed_frequency(q, grid.M));
  return k;
}

/// Complex samples of a wave function on a grid.
struct WaveField {
  Grid1D grid;
  std::vector<cplx> values;

  WaveField() = default;
  WaveField(Grid1D g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.M)
      throw Error(ErrorKind::length_mismatch, "field length differs from grid size");
  }

  std::size_t size() const { return values.size(); }

  bool all_finite() const {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

template <typename Fn>
WaveField sample_field(const Grid1D& grid, Fn&& fn) {
  std::vector<cplx> v(grid.M);
  for (std::size_t i = 0; i < grid.M; ++i) v[i] = cplx(fn(grid.point(i)));
  return WaveField(grid, std::move(v));
}

/// Diagonal Fourier multiplier. Entries are stored in FFT bin order, the same
/// order returned by wavenumbers().
struct SpectralSymbol {
  std::vector<cplx> multipliers;

  std::size_t size() const { return multipliers.size(); }

  SpectralSymbol conj() const {
    SpectralSymbol out{multipliers};
    for (auto& m : out.multipliers) m = std::conj(m);
    return out;
  }

  friend SpectralSymbol operator*(const SpectralSymbol& lhs, const SpectralSymbol& rhs) {
    if (lhs.size() != rhs.size())
      throw Error(ErrorKind::length_mismatch, "symbol lengths differ");
    SpectralSymbol out{lhs.multipliers};
    for (std::size_t q = 0; q < out.size(); ++q) out.multipliers[q] *= rhs.multipliers[q];
    return out;
  }
};

inline std::vector<cplx> apply_symbol(std::span<const cplx> values, const SpectralSymbol& s) {
  if (values.size() != s.size())
    throw Error(ErrorKind::length_mismatch, "field and symbol lengths differ");
  SpectralTransform fft(values.size());
  auto spec = fft.forward(values);
  for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= s.multipliers[q];
  return fft.inverse(spec);
}

inline WaveField apply_symbol(const WaveField& f, const SpectralSymbol& s) {
  return WaveField(f.grid, apply_symbol(std::span<const cplx>(f.values), s));
}

/// Spectral derivative of order `order` (1 or 2 in practice).
inline std::vector<cplx> spectral_derivative(const Grid1D& grid, std::span<const cplx> values,
                                             int order) {
  const auto k = wavenumbers(grid);
  SpectralSymbol s{std::vector<cplx>(grid.M)};
  for (std::size_t q = 0; q < grid.M; ++q) s.multipliers[q] = std::pow(cplx(0.0, k[q]), order);
  // The Nyquist bin of an even grid has no symmetric partner; dropping it keeps
  // odd derivatives of real data real.
  if (grid.M % 2 == 0 && order % 2 == 1) s.multipliers[grid.M / 2] = 0.0;
  return apply_symbol(values, s);
}

inline double norm_sq(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double z : v) s += z * z;
  return s;
}

/// e_psi = 1/2 |num - exact|^2 / |exact|^2 with unweighted Euclidean norms.
inline double rel_misfit(std::span<const cplx> num, std::span<const cplx> exact) {
  if (num.size() != exact.size())
    throw Error(ErrorKind::length_mismatch, "misfit operands differ in length");
  const double ref = norm_sq(exact);
  if (!(ref > 0.0)) throw Error(ErrorKind::zero_reference, "reference field has zero norm");
  double diff = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) diff += std::norm(num[i] - exact[i]);
  return 0.5 * diff / ref;
}

inline double rel_misfit(const WaveField& num, const WaveField& exact) {
  return rel_misfit(std::span<const cplx>(num.values), std::span<const cplx>(exact.values));
}

/// e_V = |v_num - v_exact| / |v_exact| (not squared, not halved).
inline double rel_err_vector(std::span<const double> num, std::span<const double> exact) {
  if (num.size() != exact.size())
    throw Error(ErrorKind::length_mismatch, "error operands differ in length");
  const double ref = norm_sq(exact);
  if (!(ref > 0.0)) throw Error(ErrorKind::zero_reference, "reference vector has zero norm");
  double diff = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) diff += (num[i] - exact[i]) * (num[i] - exact[i]);
  return std::sqrt(diff / ref);
}

}  // namespace nlsnet
