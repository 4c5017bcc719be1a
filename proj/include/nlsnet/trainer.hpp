#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlsnet/adjoint.hpp"
#include "nlsnet/coupled.hpp"
#include "nlsnet/dictionary.hpp"
#include "nlsnet/error.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/propagator.hpp"

namespace nlsnet {

/// lr(e) = init * decay_factor^floor(e / decay_period) * post_tol_factor^k,
/// where k counts the epochs since e_psi first dropped to `tol` (inclusive).
struct LRSchedule {
  double init = 1e-2;
  double decay_factor = 1.0;
  std::size_t decay_period = 1000;
  double post_tol_factor = 1.0;
  double tol = 1e-10;

  double rate(std::size_t epoch, std::size_t post_tol_steps) const {
    const auto periods = static_cast<double>(epoch / decay_period);
    return init * std::pow(decay_factor, periods) *
           std::pow(post_tol_factor, static_cast<double>(post_tol_steps));
  }
};

inline void validate(const LRSchedule& s) {
  if (!(s.init >= 0.0)) throw Error(ErrorKind::invalid_argument, "learning rate must be non-negative");
  if (!(s.decay_factor > 0.0 && s.decay_factor <= 1.0))
    throw Error(ErrorKind::invalid_argument, "decay factor must lie in (0, 1]");
  if (!(s.post_tol_factor > 0.0 && s.post_tol_factor <= 1.0))
    throw Error(ErrorKind::invalid_argument, "post-tolerance factor must lie in (0, 1]");
  if (s.decay_period < 1) throw Error(ErrorKind::invalid_argument, "decay period must be at least 1");
}

struct TrainConfig {
  double lambda = 0.0;
  std::size_t max_epochs = 1000;
  /// Stopping tolerance on J; only acted on when early_stop is set.
  double tau = 1e-10;
  LRSchedule schedule;
  std::uint64_t seed = 0;
  bool early_stop = false;
  /// Revert the step and halve the rate whenever J increases.
  bool halve_on_increase = false;
  /// Abort once J exceeds this multiple of the initial J.
  double divergence_factor = 1e6;
};

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.lambda >= 0.0)) throw Error(ErrorKind::invalid_argument, "lambda must be non-negative");
  if (cfg.max_epochs < 1) throw Error(ErrorKind::invalid_argument, "max_epochs must be at least 1");
  if (!(cfg.tau > 0.0)) throw Error(ErrorKind::invalid_argument, "tau must be positive");
  validate(cfg.schedule);
}

/// One history row. Quantities that do not apply to a run are NaN.
struct TrainRow {
  std::size_t epoch = 0;
  double J = 0.0;
  double e_psi = 0.0;
  double e_V = std::numeric_limits<double>::quiet_NaN();
  double e_zeta1 = std::numeric_limits<double>::quiet_NaN();
  double e_zeta2 = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
  std::vector<double> params;
};

struct TrainRecord {
  std::vector<TrainRow> rows;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

enum class InitMode { zero, uniform };

/// Zero vector, or seeded uniform(-0.1, 0.1) entries.
inline Coeffs initial_coeffs(std::size_t n, InitMode mode, std::uint64_t seed) {
  Coeffs c(n, 0.0);
  if (mode == InitMode::uniform) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (auto& v : c) v = dist(rng);
  }
  return c;
}

/// Observations and fixed constants for the potential inverse problem.
struct InverseProblem {
  WaveField initial;
  WaveField target;
  ProblemParams params;  // params.V is replaced by Phi c during training
  std::optional<std::vector<double>> V_exact;
  PropagateOptions options;
};

template <typename Params>
struct TrainResult {
  Params params;
  TrainRecord record;
};

namespace detail {

inline double l1_norm(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += std::abs(v);
  return s;
}

// Shared descent loop. `evaluate(x)` returns (data loss, gradient);
// `annotate(row)` fills scenario-specific error columns from row.params.
// Per epoch: evaluate -> tolerance latch -> periodic decay -> step.
template <typename Evaluate, typename Annotate>
TrainRecord descend(std::vector<double>& x, const TrainConfig& cfg, bool proximal, Evaluate&& evaluate,
                    Annotate&& annotate, std::vector<double>& best) {
  validate(cfg);
  TrainRecord rec;
  std::size_t post_tol_steps = 0;
  bool latched = false;
  double backoff = 1.0;
  double best_J = std::numeric_limits<double>::infinity();
  double J0 = 0.0;
  double prev_J = std::numeric_limits<double>::infinity();
  std::vector<double> prev_x;
  std::optional<GradientReport> prev_rep;

  auto objective = [&](const GradientReport& rep, std::span<const double> at) {
    return rep.loss + (proximal ? cfg.lambda * l1_norm(at) : 0.0);
  };
  auto make_row = [&](std::size_t epoch, double J, double e_psi, double lr) {
    TrainRow row;
    row.epoch = epoch;
    row.J = J;
    row.e_psi = e_psi;
    row.lr = lr;
    row.params = x;
    annotate(row);
    return row;
  };
  auto consider = [&](double J, std::size_t epoch) {
    if (J < best_J) {
      best_J = J;
      best = x;
      rec.best_epoch = epoch;
    }
  };

  for (std::size_t e = 0; e < cfg.max_epochs; ++e) {
    GradientReport rep = evaluate(x);
    double J = objective(rep, x);
    if (cfg.halve_on_increase && J > prev_J && prev_rep) {
      x = prev_x;
      rep = *prev_rep;
      J = prev_J;
      backoff *= 0.5;
    }
    if (!std::isfinite(J)) throw Error(ErrorKind::divergence, "loss became nonfinite at epoch " + std::to_string(e));
    if (e == 0) J0 = J;
    if (J0 > 0.0 && J > cfg.divergence_factor * J0)
      throw Error(ErrorKind::divergence, "loss exceeded " + std::to_string(cfg.divergence_factor) +
                                             "x its initial value at epoch " + std::to_string(e));
    consider(J, e);
    if (cfg.early_stop && J <= cfg.tau) {
      rec.rows.push_back(make_row(e, J, rep.loss, cfg.schedule.rate(e, post_tol_steps) * backoff));
      rec.epochs_run = e;
      return rec;
    }
    if (!latched && rep.loss <= cfg.schedule.tol) latched = true;
    if (latched) ++post_tol_steps;
    const double lr = cfg.schedule.rate(e, post_tol_steps) * backoff;
    rec.rows.push_back(make_row(e, J, rep.loss, lr));

    prev_J = J;
    prev_x = x;
    prev_rep = rep;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * rep.grad[i];
    if (proximal && cfg.lambda > 0.0) x = soft_threshold(x, lr * cfg.lambda);
  }

  const GradientReport rep = evaluate(x);
  const double J = objective(rep, x);
  if (!std::isfinite(J)) throw Error(ErrorKind::divergence, "loss became nonfinite after the last epoch");
  consider(J, cfg.max_epochs);
  rec.rows.push_back(make_row(cfg.max_epochs, J, rep.loss, cfg.schedule.rate(cfg.max_epochs, post_tol_steps) * backoff));
  rec.epochs_run = cfg.max_epochs;
  return rec;
}

}  // namespace detail

/// Proximal gradient descent on J(c) = e_psi(Phi c) + lambda |c|_1 (plain
/// gradient descent when lambda = 0). Coefficients are returned and recorded
/// in the raw library scale even when Phi is column-normalized. Returns the
/// iterate with the lowest J seen.
inline TrainResult<Coeffs> train_coeffs(const InverseProblem& problem, const DictionaryMatrix& phi,
                                        std::span<const double> c_init, const TrainConfig& cfg) {
  if (c_init.size() != phi.cols())
    throw Error(ErrorKind::dimension_mismatch, "initial coefficients differ from library size");
  std::vector<double> x = phi.from_raw(c_init);
  std::vector<double> best = x;
  auto evaluate = [&](const std::vector<double>& c) {
    return misfit_grad_coeffs(problem.initial, problem.target, problem.params, phi, c, problem.options);
  };
  auto annotate = [&](TrainRow& row) {
    if (problem.V_exact) row.e_V = rel_err_vector(synthesize(phi, row.params), *problem.V_exact);
    row.params = phi.to_raw(row.params);
  };
  auto rec = detail::descend(x, cfg, true, evaluate, annotate, best);
  return {phi.to_raw(best), std::move(rec)};
}

/// Plain gradient descent on J = e_psi1 + e_psi2 over (zeta1, zeta2).
/// Relative errors against `truth` are recorded per epoch.
inline TrainResult<std::pair<double, double>> train_zetas(const Example3Data& data,
                                                          std::pair<double, double> zeta_init,
                                                          const TrainConfig& cfg,
                                                          std::pair<double, double> truth) {
  std::vector<double> x{zeta_init.first, zeta_init.second};
  std::vector<double> best = x;
  auto evaluate = [&](const std::vector<double>& z) { return coupled_grad_zetas(data, z[0], z[1]); };
  auto annotate = [&](TrainRow& row) {
    row.e_zeta1 = std::abs(row.params[0] - truth.first) / std::abs(truth.first);
    row.e_zeta2 = std::abs(row.params[1] - truth.second) / std::abs(truth.second);
  };
  auto rec = detail::descend(x, cfg, false, evaluate, annotate, best);
  return {{best[0], best[1]}, std::move(rec)};
}

}  // namespace nlsnet
