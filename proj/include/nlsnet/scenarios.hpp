#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlsnet/coupled.hpp"
#include "nlsnet/error.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/parallel.hpp"
#include "nlsnet/propagator.hpp"
#include "nlsnet/trainer.hpp"

namespace nlsnet {

/// Single equation i psi_t + beta psi_xx + gamma |psi|^2 psi + V psi = 0 with a
/// known exact solution.
struct SingleScenario {
  std::string name;
  double a = 0.0;
  double b = 1.0;
  std::size_t M = 2;
  double beta = 1.0;
  double gamma = 0.0;
  double T = 1.0;
  std::size_t N = 1;
  std::function<cplx(double, double)> exact;     // psi(x, t)
  std::function<cplx(double, double)> exact_dt;  // d psi / dt (x, t)
  std::function<double(double)> potential;
  /// Ground-truth coefficients by library entry name; absent entries are zero.
  std::vector<std::pair<std::string, double>> truth;

  Grid1D grid() const { return make_grid(a, b, M); }

  std::vector<double> potential_samples() const {
    const auto g = grid();
    std::vector<double> V(g.M);
    for (std::size_t i = 0; i < g.M; ++i) V[i] = potential(g.point(i));
    return V;
  }

  ProblemParams params() const { return {beta, gamma, potential_samples(), T / static_cast<double>(N), N}; }

  WaveField exact_at(double t) const {
    return sample_field(grid(), [&](double x) { return exact(x, t); });
  }
};

/// Two-field system with the moving sech pair
///   psi_{1,2} = sqrt(2 alpha / (1 + zeta)) sech(sqrt(2 alpha)(x - v t))
///               exp(i[(v -/+ delta) x - ((v^2 - delta^2)/2 - alpha) t]).
struct CoupledScenario {
  std::string name;
  double a = -20.0;
  double b = 80.0;
  std::size_t M = 1024;
  double T = 0.1;
  std::size_t N = 10;
  double alpha1 = -0.5;
  double alpha2 = 0.5;
  double zeta1 = 2.0 / 3.0;
  double zeta2 = 2.0 / 3.0;
  double coupling_sign = -1.0;
  double velocity = 0.0;
  double delta = 0.5;
  double alpha_amp = 1.0;

  Grid1D grid() const { return make_grid(a, b, M); }

  double amplitude() const { return std::sqrt(2.0 * alpha_amp / (1.0 + zeta1)); }
  double frequency() const { return (velocity * velocity - delta * delta) / 2.0 - alpha_amp; }

  /// field = 1 or 2.
  cplx exact(int field, double x, double t) const {
    const double kappa = std::sqrt(2.0 * alpha_amp);
    const double xi = kappa * (x - velocity * t);
    const double wave = field == 1 ? velocity - delta : velocity + delta;
    return amplitude() / std::cosh(xi) * std::polar(1.0, wave * x - frequency() * t);
  }

  cplx exact_dt(int field, double x, double t) const {
    const double kappa = std::sqrt(2.0 * alpha_amp);
    const double xi = kappa * (x - velocity * t);
    const cplx psi = exact(field, x, t);
    return psi * (kappa * velocity * std::tanh(xi)) + cplx(0.0, -frequency()) * psi;
  }

  CoupledField exact_at(double t) const {
    const auto g = grid();
    return CoupledField(sample_field(g, [&](double x) { return exact(1, x, t); }),
                        sample_field(g, [&](double x) { return exact(2, x, t); }));
  }

  CoupledParams params() const {
    return {alpha1, alpha2, zeta1, zeta2, std::vector<double>(M, 0.0), std::vector<double>(M, 0.0),
            T / static_cast<double>(N), N, coupling_sign};
  }
};

using Scenario = std::variant<SingleScenario, CoupledScenario>;

/// beta = -1, gamma = 1 on [-10, 10], V = 4x^2 - exp(-2x^2),
/// psi = exp(-x^2 + 2it). Desk scale M = 512; full scale M = 4000.
inline SingleScenario scenario_example1(bool full_scale = false) {
  SingleScenario s;
  s.name = "example1";
  s.a = -10.0;
  s.b = 10.0;
  s.M = full_scale ? 4000 : 512;
  s.beta = -1.0;
  s.gamma = 1.0;
  s.T = 1.0;
  s.N = 4;
  s.exact = [](double x, double t) { return std::exp(cplx(-x * x, 2.0 * t)); };
  s.exact_dt = [](double x, double t) { return cplx(0.0, 2.0) * std::exp(cplx(-x * x, 2.0 * t)); };
  s.potential = [](double x) { return 4.0 * x * x - std::exp(-2.0 * x * x); };
  s.truth = {{"x^2", 4.0}, {"exp(-2*x^2)", -1.0}};
  return s;
}

/// Gross-Pitaevskii case: beta = 1/2, gamma = -1, V = -cos^2 x,
/// psi = sin(x) exp(-3it/2) on [0, 2 pi], T = 1 in a single layer.
inline SingleScenario scenario_example2(bool full_scale = false) {
  SingleScenario s;
  s.name = "example2";
  s.a = 0.0;
  s.b = 2.0 * std::numbers::pi;
  s.M = full_scale ? 4000 : 512;
  s.beta = 0.5;
  s.gamma = -1.0;
  s.T = 1.0;
  s.N = 1;
  s.exact = [](double x, double t) { return std::sin(x) * std::polar(1.0, -1.5 * t); };
  s.exact_dt = [](double x, double t) { return cplx(0.0, -1.5) * std::sin(x) * std::polar(1.0, -1.5 * t); };
  s.potential = [](double x) { const double c = std::cos(x); return -c * c; };
  s.truth = {{"cos(x)^2", -1.0}};
  return s;
}

/// Coupled pair on [-20, 80], v = 0, delta = 0.5, alpha = 1, zeta1 = zeta2 = 2/3,
/// -alpha1 = alpha2 = 0.5, V1 = V2 = 0.
inline CoupledScenario scenario_example3() {
  CoupledScenario s;
  s.name = "example3";
  return s;
}

inline Scenario scenario_by_name(const std::string& name, bool full_scale = false) {
  if (name == "example1") return scenario_example1(full_scale);
  if (name == "example2") return scenario_example2(full_scale);
  if (name == "example3") return scenario_example3();
  throw Error(ErrorKind::config, "unknown scenario '" + name + "' (expected example1 | example2 | example3)");
}

/// Max-norm of the PDE residual of the exact solution at time t on an M-point
/// grid: psi_t from the closed form, space derivatives spectrally.
inline double residual_check(const SingleScenario& s, double t, std::size_t M) {
  const auto grid = make_grid(s.a, s.b, M);
  const auto psi = sample_field(grid, [&](double x) { return s.exact(x, t); });
  const auto psi_xx = spectral_derivative(grid, psi.values, 2);
  double worst = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    const double x = grid.point(j);
    const cplx u = psi.values[j];
    const cplx r = cplx(0.0, 1.0) * s.exact_dt(x, t) + s.beta * psi_xx[j] + s.gamma * std::norm(u) * u +
                   s.potential(x) * u;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

inline double residual_check(const CoupledScenario& s, double t, std::size_t M) {
  const auto grid = make_grid(s.a, s.b, M);
  auto f1 = sample_field(grid, [&](double x) { return s.exact(1, x, t); });
  auto f2 = sample_field(grid, [&](double x) { return s.exact(2, x, t); });
  double worst = 0.0;
  for (int field : {1, 2}) {
    const auto& u = field == 1 ? f1.values : f2.values;
    const double alpha = field == 1 ? s.alpha1 : s.alpha2;
    const auto ux = spectral_derivative(grid, u, 1);
    const auto uxx = spectral_derivative(grid, u, 2);
    for (std::size_t j = 0; j < M; ++j) {
      const double r1 = std::norm(f1.values[j]);
      const double r2 = std::norm(f2.values[j]);
      const double f = field == 1 ? r1 + s.zeta1 * r2 : s.zeta2 * r1 + r2;
      const cplx rhs = -0.5 * uxx[j] + cplx(0.0, alpha) * ux[j] + s.coupling_sign * f * u[j];
      const cplx r = cplx(0.0, 1.0) * s.exact_dt(field, grid.point(j), t) - rhs;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

inline double residual_check(const Scenario& s, double t, std::size_t M) {
  return std::visit([&](const auto& sc) { return residual_check(sc, t, M); }, s);
}

enum class Vary { M, N };
enum class SplittingOrder { strang, lie };

struct ConvergenceRow {
  std::size_t value = 0;
  double e_psi = 0.0;
};

/// e_psi per refinement level plus log-log fits against the step size
/// (dx for M, dt for N). `slope_e_psi` fits e_psi itself; `order` fits the
/// unsquared relative error sqrt(2 e_psi), i.e. the convergence order.
struct ConvergenceTable {
  Vary vary = Vary::N;
  std::vector<ConvergenceRow> rows;
  double slope_e_psi = 0.0;
  double order = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Forward solves at the true potential for each refinement value; the other
/// discretization parameter stays at `fixed`.
inline ConvergenceTable convergence_study(const SingleScenario& s, Vary vary, const std::vector<std::size_t>& values,
                                          std::size_t fixed, SplittingOrder order = SplittingOrder::strang) {
  if (values.size() < 4) throw Error(ErrorKind::invalid_argument, "a convergence study needs at least 4 values");
  if (!std::is_sorted(values.begin(), values.end()))
    throw Error(ErrorKind::invalid_argument, "convergence values must be ascending");
  ConvergenceTable table{vary, std::vector<ConvergenceRow>(values.size()), 0.0, 0.0};
  parallel_for(values.size(), [&](std::size_t i) {
    SingleScenario sc = s;
    sc.M = vary == Vary::M ? values[i] : fixed;
    sc.N = vary == Vary::N ? values[i] : fixed;
    const auto f0 = sc.exact_at(0.0);
    const auto p = sc.params();
    const auto out = order == SplittingOrder::strang ? propagate(f0, p).field : first_order_propagate(f0, p);
    table.rows[i] = {values[i], rel_misfit(out, sc.exact_at(sc.T))};
  });
  std::vector<double> step, e, err;
  for (const auto& r : table.rows) {
    step.push_back(vary == Vary::N ? s.T / static_cast<double>(r.value) : (s.b - s.a) / static_cast<double>(r.value));
    e.push_back(r.e_psi);
    err.push_back(std::sqrt(2.0 * r.e_psi));
  }
  table.slope_e_psi = loglog_slope(step, e);
  table.order = loglog_slope(step, err);
  return table;
}

/// Coupled-system counterpart; only Strang layering is available here.
inline ConvergenceTable convergence_study(const CoupledScenario& s, Vary vary, const std::vector<std::size_t>& values,
                                          std::size_t fixed) {
  if (values.size() < 4) throw Error(ErrorKind::invalid_argument, "a convergence study needs at least 4 values");
  if (!std::is_sorted(values.begin(), values.end()))
    throw Error(ErrorKind::invalid_argument, "convergence values must be ascending");
  ConvergenceTable table{vary, std::vector<ConvergenceRow>(values.size()), 0.0, 0.0};
  parallel_for(values.size(), [&](std::size_t i) {
    CoupledScenario sc = s;
    sc.M = vary == Vary::M ? values[i] : fixed;
    sc.N = vary == Vary::N ? values[i] : fixed;
    const auto out = coupled_propagate(sc.exact_at(0.0), sc.params()).field;
    const auto ref = sc.exact_at(sc.T);
    table.rows[i] = {values[i], rel_misfit(out.psi1, ref.psi1) + rel_misfit(out.psi2, ref.psi2)};
  });
  std::vector<double> step, e, err;
  for (const auto& r : table.rows) {
    step.push_back(vary == Vary::N ? s.T / static_cast<double>(r.value) : (s.b - s.a) / static_cast<double>(r.value));
    e.push_back(r.e_psi);
    err.push_back(std::sqrt(2.0 * r.e_psi));
  }
  table.slope_e_psi = loglog_slope(step, e);
  table.order = loglog_slope(step, err);
  return table;
}

enum class TargetMode { synthetic, exact };

/// Observations for the potential inverse problem: psi(0) from the exact
/// solution and psi(T) either from the same propagator at the true potential
/// (synthetic) or from the closed form (exact).
inline InverseProblem make_inverse_problem(const SingleScenario& s, TargetMode mode = TargetMode::synthetic,
                                           const PropagateOptions& opts = {}) {
  InverseProblem prob;
  prob.initial = s.exact_at(0.0);
  prob.params = s.params();
  prob.V_exact = prob.params.V;
  prob.options = opts;
  prob.target = mode == TargetMode::synthetic ? propagate(prob.initial, prob.params, false, opts).field
                                              : s.exact_at(s.T);
  return prob;
}

inline Example3Data make_example3_data(const CoupledScenario& s, TargetMode mode = TargetMode::synthetic) {
  Example3Data data;
  data.initial = s.exact_at(0.0);
  data.params = s.params();
  data.target = mode == TargetMode::synthetic ? coupled_propagate(data.initial, data.params).field : s.exact_at(s.T);
  return data;
}

/// J over the tensor grid range1 x range2, stored row-major (zeta1 outer).
struct Landscape {
  std::vector<double> zeta1;
  std::vector<double> zeta2;
  std::vector<double> J;
  std::size_t argmin_i = 0;
  std::size_t argmin_j = 0;
  /// max |J(a, b) - J(b, a)| over mirrored cells; NaN if the grid is not
  /// symmetric about the diagonal.
  double swap_defect = std::numeric_limits<double>::quiet_NaN();

  double at(std::size_t i, std::size_t j) const { return J[i * zeta2.size() + j]; }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline Landscape landscape_scan(const Example3Data& data, std::pair<double, double> range1,
                                std::pair<double, double> range2, std::size_t n1, std::size_t n2) {
  if (n1 < 2 || n2 < 2) throw Error(ErrorKind::invalid_argument, "landscape needs at least 2 points per axis");
  Landscape out;
  out.zeta1 = linspace(range1.first, range1.second, n1);
  out.zeta2 = linspace(range2.first, range2.second, n2);
  out.J.resize(n1 * n2);
  parallel_for(n1 * n2, [&](std::size_t cell) {
    out.J[cell] = coupled_loss(out.zeta1[cell / n2], out.zeta2[cell % n2], data);
  });
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      if (out.at(i, j) < best) {
        best = out.at(i, j);
        out.argmin_i = i;
        out.argmin_j = j;
      }
  if (n1 == n2 && range1 == range2) {
    double defect = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < i; ++j) defect = std::max(defect, std::abs(out.at(i, j) - out.at(j, i)));
    out.swap_defect = defect;
  }
  return out;
}

}  // namespace nlsnet
