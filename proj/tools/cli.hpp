#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlsnet/nlsnet.hpp"
#include "nlsnet/verification.hpp"

namespace nlsnet::cli {

using json = nlohmann::json;

enum ExitCode : int { ok = 0, config_error = 2, numeric_error = 3, diverged = 4, verify_failed = 5 };

/// Fully resolved run configuration. Optional grid/time fields fall back to
/// the scenario's own values.
struct RunConfig {
  std::string scenario = "example1";
  bool full_scale = false;
  std::optional<double> a, b;
  std::optional<std::size_t> M, N;
  std::optional<double> T, dt;
  std::string mode = "spectral";  // linear step: spectral | direct_kernel
  bool merged = true;

  double lambda = 0.0;
  double lr = 1e-2;
  double lr_decay = 1.0;
  std::size_t lr_decay_period = 1000;
  double lr_post_tol = 1.0;
  double lr_tol = 1e-10;
  double tau = 1e-10;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;
  std::string init = "zero";
  bool early_stop = false;
  bool halve_on_increase = false;
  std::vector<std::string> library;  // empty: full default library
  std::map<std::string, std::string> library_custom;
  bool normalize_columns = false;
  std::string target = "synthetic";

  double zeta1_init = 1.0;
  double zeta2_init = 0.4;
  double zeta1_min = 0.0, zeta1_max = 2.0;
  double zeta2_min = 0.0, zeta2_max = 2.0;
  std::size_t n1 = 41, n2 = 41;

  std::string vary = "N";
  std::vector<std::size_t> values;
  std::optional<std::size_t> fixed;
  std::string order = "strang";

  std::vector<std::string> gates;  // empty: all
  bool inject_phase_sign_error = false;
  std::string out = "out";
};

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "scenario", "full_scale", "a", "b", "M", "N", "T", "dt", "mode", "merged", "lambda", "lr", "lr_decay",
      "lr_decay_period", "lr_post_tol", "lr_tol", "tau", "max_epochs", "seed", "init", "early_stop",
      "halve_on_increase", "library", "library_custom", "normalize_columns", "target", "zeta1_init", "zeta2_init",
      "zeta1_min", "zeta1_max", "zeta2_min", "zeta2_max", "n1", "n2", "vary", "values", "fixed", "order", "gates",
      "inject_phase_sign_error", "out"};
  return keys;
}

/// Trainer defaults that differ per scenario (the published protocols).
inline json scenario_defaults(const std::string& scenario) {
  if (scenario == "example1")
    return {{"lambda", 0.0},      {"lr", 1.5},          {"lr_decay", 0.99}, {"lr_decay_period", 2000},
            {"lr_post_tol", 0.4}, {"max_epochs", 6000}};
  if (scenario == "example2")
    return {{"lambda", 20.0},      {"lr", 5e-3},         {"lr_decay", 0.9}, {"lr_decay_period", 3000},
            {"lr_post_tol", 0.95}, {"max_epochs", 6000}};
  if (scenario == "example3")
    return {{"lr", 100.0}, {"lr_decay", 1.0}, {"lr_post_tol", 1.0}, {"max_epochs", 2000}};
  throw Error(ErrorKind::config, "unknown scenario '" + scenario + "' (expected example1 | example2 | example3)");
}

namespace detail {

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::config, std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  dst = v;
}

inline void read_count(const json& j, const char* key, std::size_t& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(ErrorKind::config, std::string("key '") + key + "' must be a non-negative integer");
  dst = v.get<std::size_t>();
}

inline void read_count(const json& j, const char* key, std::optional<std::size_t>& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  std::size_t v = 0;
  read_count(j, key, v);
  dst = v;
}

inline void require_one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : " | ") + std::string(a);
  throw Error(ErrorKind::config, "key '" + key + "' must be one of " + list + ", got '" + v + "'");
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

/// Reject keys outside the documented set, naming the first offender.
inline void check_keys(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  const auto& keys = known_keys();
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorKind::config, "unknown config key '" + k + "'");
}

/// Scenario defaults, then `overrides` (file values merged with flags).
inline RunConfig resolve(const json& overrides) {
  check_keys(overrides);
  RunConfig c;
  detail::read(overrides, "scenario", c.scenario);
  json merged = scenario_defaults(c.scenario);
  merged.update(overrides);
  const json& j = merged;
  using detail::read;
  using detail::read_count;
  read(j, "full_scale", c.full_scale);
  read(j, "a", c.a);
  read(j, "b", c.b);
  read_count(j, "M", c.M);
  read_count(j, "N", c.N);
  read(j, "T", c.T);
  read(j, "dt", c.dt);
  read(j, "mode", c.mode);
  read(j, "merged", c.merged);
  read(j, "lambda", c.lambda);
  read(j, "lr", c.lr);
  read(j, "lr_decay", c.lr_decay);
  read_count(j, "lr_decay_period", c.lr_decay_period);
  read(j, "lr_post_tol", c.lr_post_tol);
  read(j, "lr_tol", c.lr_tol);
  read(j, "tau", c.tau);
  read_count(j, "max_epochs", c.max_epochs);
  read(j, "seed", c.seed);
  read(j, "init", c.init);
  read(j, "early_stop", c.early_stop);
  read(j, "halve_on_increase", c.halve_on_increase);
  read(j, "library", c.library);
  read(j, "library_custom", c.library_custom);
  read(j, "normalize_columns", c.normalize_columns);
  read(j, "target", c.target);
  read(j, "zeta1_init", c.zeta1_init);
  read(j, "zeta2_init", c.zeta2_init);
  read(j, "zeta1_min", c.zeta1_min);
  read(j, "zeta1_max", c.zeta1_max);
  read(j, "zeta2_min", c.zeta2_min);
  read(j, "zeta2_max", c.zeta2_max);
  read_count(j, "n1", c.n1);
  read_count(j, "n2", c.n2);
  read(j, "vary", c.vary);
  read(j, "values", c.values);
  read_count(j, "fixed", c.fixed);
  read(j, "order", c.order);
  read(j, "gates", c.gates);
  read(j, "inject_phase_sign_error", c.inject_phase_sign_error);
  read(j, "out", c.out);

  detail::require_one_of("mode", c.mode, {"spectral", "direct_kernel"});
  detail::require_one_of("init", c.init, {"zero", "uniform"});
  detail::require_one_of("target", c.target, {"synthetic", "exact"});
  detail::require_one_of("vary", c.vary, {"M", "N"});
  detail::require_one_of("order", c.order, {"strang", "lie"});
  for (const auto& g : c.gates)
    detail::require_one_of("gates", g, {"residual", "mass", "forward", "gradient", "composition"});
  if (c.N && c.dt) throw Error(ErrorKind::config, "set either 'N' or 'dt', not both");
  return c;
}

inline json to_json(const RunConfig& c) {
  using detail::opt_json;
  return {{"scenario", c.scenario},
          {"full_scale", c.full_scale},
          {"a", opt_json(c.a)},
          {"b", opt_json(c.b)},
          {"M", opt_json(c.M)},
          {"N", opt_json(c.N)},
          {"T", opt_json(c.T)},
          {"dt", opt_json(c.dt)},
          {"mode", c.mode},
          {"merged", c.merged},
          {"lambda", c.lambda},
          {"lr", c.lr},
          {"lr_decay", c.lr_decay},
          {"lr_decay_period", c.lr_decay_period},
          {"lr_post_tol", c.lr_post_tol},
          {"lr_tol", c.lr_tol},
          {"tau", c.tau},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"init", c.init},
          {"early_stop", c.early_stop},
          {"halve_on_increase", c.halve_on_increase},
          {"library", c.library},
          {"library_custom", c.library_custom},
          {"normalize_columns", c.normalize_columns},
          {"target", c.target},
          {"zeta1_init", c.zeta1_init},
          {"zeta2_init", c.zeta2_init},
          {"zeta1_min", c.zeta1_min},
          {"zeta1_max", c.zeta1_max},
          {"zeta2_min", c.zeta2_min},
          {"zeta2_max", c.zeta2_max},
          {"n1", c.n1},
          {"n2", c.n2},
          {"vary", c.vary},
          {"values", c.values},
          {"fixed", opt_json(c.fixed)},
          {"order", c.order},
          {"gates", c.gates},
          {"inject_phase_sign_error", c.inject_phase_sign_error},
          {"out", c.out}};
}

/// `key=value`; the value is parsed as JSON when possible, else taken as a string.
inline std::pair<std::string, json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::config, "--set expects key=value, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  const std::string raw = text.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {key, value};
}

// ---- output helpers -------------------------------------------------------

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, std::initializer_list<std::string> header) : out_(path) {
    if (!out_) throw Error(ErrorKind::config, "cannot write " + path.string());
    row_strings(std::vector<std::string>(header));
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> v{cell(cells)...};
    row_strings(v);
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  void row_strings(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::config, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

// ---- scenario assembly ------------------------------------------------------

inline PropagateOptions propagate_options(const RunConfig& c) {
  PropagateOptions o;
  o.merged = c.merged;
  o.mode = c.mode == "direct_kernel" ? LinearMode::direct_kernel : LinearMode::spectral;
  if (c.inject_phase_sign_error) o.phase_sign = -1.0;
  return o;
}

template <typename S>
void apply_overrides(S& s, const RunConfig& c) {
  if (c.a) s.a = *c.a;
  if (c.b) s.b = *c.b;
  if (c.M) s.M = *c.M;
  if (c.T) s.T = *c.T;
  if (c.N) s.N = *c.N;
  if (c.dt) {
    const double n = std::round(s.T / *c.dt);
    if (n < 1.0 || std::abs(n * *c.dt - s.T) > 1e-9 * s.T)
      throw Error(ErrorKind::config, "dt must divide T into a whole number of layers");
    s.N = static_cast<std::size_t>(n);
  }
  make_grid(s.a, s.b, s.M);  // validates the domain
}

inline Scenario build_scenario(const RunConfig& c) {
  auto s = scenario_by_name(c.scenario, c.full_scale);
  std::visit([&](auto& sc) { apply_overrides(sc, c); }, s);
  return s;
}

inline Library build_library(const RunConfig& c) {
  Library lib = c.library.empty() ? default_library() : default_library().select(c.library);
  if (!c.library_custom.empty()) {
    std::vector<std::pair<std::string, std::string>> pairs(c.library_custom.begin(), c.library_custom.end());
    const Library extra = library_from_expressions(pairs);
    std::vector<LibraryEntry> all(lib.entries().begin(), lib.entries().end());
    all.insert(all.end(), extra.entries().begin(), extra.entries().end());
    lib = Library(std::move(all));
  }
  return lib;
}

inline TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.lambda = c.lambda;
  t.max_epochs = c.max_epochs;
  t.tau = c.tau;
  t.seed = c.seed;
  t.early_stop = c.early_stop;
  t.halve_on_increase = c.halve_on_increase;
  t.schedule = {c.lr, c.lr_decay, c.lr_decay_period, c.lr_post_tol, c.lr_tol};
  return t;
}

inline TargetMode target_mode(const RunConfig& c) {
  return c.target == "exact" ? TargetMode::exact : TargetMode::synthetic;
}

inline void scenario_note(const RunConfig& c, std::ostream& log) {
  if (c.scenario == "example2" && !c.a && !c.b)
    log << "note: example2 runs on [0, 2pi], where sin(x) is periodic; set a/b to change the domain\n";
}

// ---- commands --------------------------------------------------------------

inline int cmd_forward(const RunConfig& c, std::ostream& log) {
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(c));
  scenario_note(c, log);
  const auto scenario = build_scenario(c);
  json summary{{"command", "forward"}, {"scenario", c.scenario}};

  if (const auto* s = std::get_if<SingleScenario>(&scenario)) {
    const auto f0 = s->exact_at(0.0);
    const auto out = propagate(f0, s->params(), false, propagate_options(c)).field;
    const auto ref = s->exact_at(s->T);
    const double e = rel_misfit(out, ref);
    Csv csv(dir / "forward.csv", {"x", "re_psi", "im_psi", "abs_psi", "re_exact", "im_exact"});
    for (std::size_t j = 0; j < out.grid.M; ++j)
      csv.row(out.grid.point(j), out.values[j].real(), out.values[j].imag(), std::abs(out.values[j]),
              ref.values[j].real(), ref.values[j].imag());
    summary.update({{"M", s->M}, {"N", s->N}, {"T", s->T}, {"e_psi", e}});
    log << "e_psi=" << num(e) << '\n';
  } else {
    const auto& s3 = std::get<CoupledScenario>(scenario);
    const auto out = coupled_propagate(s3.exact_at(0.0), s3.params()).field;
    const auto ref = s3.exact_at(s3.T);
    const double e1 = rel_misfit(out.psi1, ref.psi1), e2 = rel_misfit(out.psi2, ref.psi2);
    Csv csv(dir / "forward.csv", {"field", "x", "re_psi", "im_psi", "abs_psi", "re_exact", "im_exact"});
    for (int field : {1, 2}) {
      const auto& u = field == 1 ? out.psi1 : out.psi2;
      const auto& r = field == 1 ? ref.psi1 : ref.psi2;
      for (std::size_t j = 0; j < u.grid.M; ++j)
        csv.row(field, u.grid.point(j), u.values[j].real(), u.values[j].imag(), std::abs(u.values[j]),
                r.values[j].real(), r.values[j].imag());
    }
    summary.update({{"M", s3.M}, {"N", s3.N}, {"T", s3.T}, {"e_psi1", e1}, {"e_psi2", e2}});
    log << "e_psi1=" << num(e1) << " e_psi2=" << num(e2) << '\n';
  }
  write_json(dir / "summary.json", summary);
  return ok;
}

inline int cmd_invert(const RunConfig& c, std::ostream& log) {
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(c));
  scenario_note(c, log);
  const auto scenario = build_scenario(c);
  const TrainConfig tc = train_config(c);
  json summary{{"command", "invert"}, {"scenario", c.scenario}};

  if (const auto* s = std::get_if<SingleScenario>(&scenario)) {
    const Library lib = build_library(c);
    DictionaryMatrix phi = assemble(lib, s->grid());
    if (c.normalize_columns) phi = normalize_columns(phi);
    const auto problem = make_inverse_problem(*s, target_mode(c), propagate_options(c));
    const auto c0 = initial_coeffs(lib.size(), c.init == "uniform" ? InitMode::uniform : InitMode::zero, c.seed);
    const auto result = train_coeffs(problem, phi, c0, tc);

    Csv hist(dir / "history.csv", {"epoch", "J", "e_psi", "e_V", "lr"});
    for (const auto& r : result.record.rows) hist.row(r.epoch, r.J, r.e_psi, r.e_V, r.lr);

    std::map<std::string, double> truth(s->truth.begin(), s->truth.end());
    Csv coeffs(dir / "coeffs.csv", {"name", "c", "truth"});
    for (std::size_t i = 0; i < lib.size(); ++i) {
      const auto it = truth.find(lib[i].name);
      coeffs.row(lib[i].name, result.params[i], it == truth.end() ? 0.0 : it->second);
    }
    const auto raw = assemble(lib, s->grid());
    const auto V = synthesize(raw, result.params);
    const auto& Vx = *problem.V_exact;
    Csv pot(dir / "potential.csv", {"x", "V_num", "V_exact"});
    for (std::size_t j = 0; j < V.size(); ++j) pot.row(s->grid().point(j), V[j], Vx[j]);

    const auto& best = result.record.rows[std::min(result.record.best_epoch, result.record.rows.size() - 1)];
    summary.update({{"epochs_run", result.record.epochs_run},
                    {"best_epoch", result.record.best_epoch},
                    {"J", best.J},
                    {"e_psi", best.e_psi},
                    {"e_V", rel_err_vector(V, Vx)}});
    log << "best epoch " << result.record.best_epoch << ": J=" << num(best.J) << " e_V=" << num(rel_err_vector(V, Vx))
        << '\n';
  } else {
    const auto& s3 = std::get<CoupledScenario>(scenario);
    const auto data = make_example3_data(s3, target_mode(c));
    const auto result = train_zetas(data, {c.zeta1_init, c.zeta2_init}, tc, {s3.zeta1, s3.zeta2});
    Csv hist(dir / "history.csv", {"epoch", "J", "e_psi", "e_zeta1", "e_zeta2", "lr"});
    for (const auto& r : result.record.rows) hist.row(r.epoch, r.J, r.e_psi, r.e_zeta1, r.e_zeta2, r.lr);
    Csv z(dir / "zetas.csv", {"name", "zeta", "truth"});
    z.row("zeta1", result.params.first, s3.zeta1);
    z.row("zeta2", result.params.second, s3.zeta2);
    const double e1 = std::abs(result.params.first - s3.zeta1) / s3.zeta1;
    const double e2 = std::abs(result.params.second - s3.zeta2) / s3.zeta2;
    summary.update({{"epochs_run", result.record.epochs_run},
                    {"best_epoch", result.record.best_epoch},
                    {"zeta1", result.params.first},
                    {"zeta2", result.params.second},
                    {"e_zeta1", e1},
                    {"e_zeta2", e2}});
    log << "zeta1=" << num(result.params.first) << " zeta2=" << num(result.params.second) << " e_zeta1=" << num(e1)
        << " e_zeta2=" << num(e2) << '\n';
  }
  write_json(dir / "summary.json", summary);
  return ok;
}

inline int cmd_converge(const RunConfig& c, std::ostream& log) {
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(c));
  const auto scenario = build_scenario(c);
  const Vary vary = c.vary == "M" ? Vary::M : Vary::N;
  // Refinement sweeps used when values/fixed are unset: layers are refined at
  // a resolved grid, grids are refined at 200 layers.
  std::vector<std::size_t> values = c.values;
  if (values.empty()) {
    if (vary == Vary::M)
      values = {8, 16, 32, 64, 128};
    else if (c.scenario == "example3")
      values = {5, 10, 20, 40, 80};
    else
      values = {25, 50, 100, 200, 400};
  }
  const std::size_t fixed = c.fixed.value_or(vary == Vary::M ? 200 : (c.scenario == "example2" ? 64 : 1024));
  ConvergenceTable table;
  if (const auto* s = std::get_if<SingleScenario>(&scenario)) {
    table = convergence_study(*s, vary, values, fixed, c.order == "lie" ? SplittingOrder::lie : SplittingOrder::strang);
  } else {
    if (c.order == "lie") throw Error(ErrorKind::config, "order 'lie' is only available for example1 and example2");
    table = convergence_study(std::get<CoupledScenario>(scenario), vary, values, fixed);
  }
  Csv csv(dir / "convergence.csv", {"value", "e_psi"});
  for (const auto& r : table.rows) csv.row(r.value, r.e_psi);
  write_json(dir / "summary.json", {{"command", "converge"},
                                    {"scenario", c.scenario},
                                    {"vary", c.vary},
                                    {"fixed", fixed},
                                    {"slope_e_psi", table.slope_e_psi},
                                    {"order", table.order}});
  log << "slope_e_psi=" << num(table.slope_e_psi) << " order=" << num(table.order) << '\n';
  return ok;
}

inline int cmd_landscape(const RunConfig& c, std::ostream& log) {
  if (c.scenario != "example3") throw Error(ErrorKind::config, "landscape needs scenario example3");
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(c));
  const auto s3 = std::get<CoupledScenario>(build_scenario(c));
  const auto data = make_example3_data(s3, target_mode(c));
  const auto land = landscape_scan(data, {c.zeta1_min, c.zeta1_max}, {c.zeta2_min, c.zeta2_max}, c.n1, c.n2);
  Csv csv(dir / "landscape.csv", {"zeta1", "zeta2", "J"});
  for (std::size_t i = 0; i < land.zeta1.size(); ++i)
    for (std::size_t j = 0; j < land.zeta2.size(); ++j) csv.row(land.zeta1[i], land.zeta2[j], land.at(i, j));
  const json defect = std::isnan(land.swap_defect) ? json(nullptr) : json(land.swap_defect);
  write_json(dir / "summary.json", {{"command", "landscape"},
                                    {"argmin_zeta1", land.zeta1[land.argmin_i]},
                                    {"argmin_zeta2", land.zeta2[land.argmin_j]},
                                    {"argmin_J", land.at(land.argmin_i, land.argmin_j)},
                                    {"swap_defect", defect}});
  log << "argmin=(" << num(land.zeta1[land.argmin_i]) << ", " << num(land.zeta2[land.argmin_j])
      << ") swap_defect=" << (std::isnan(land.swap_defect) ? std::string("n/a") : num(land.swap_defect)) << '\n';
  return ok;
}

struct GateCheck {
  std::string label;
  double value;
  double threshold;
  bool pass() const { return value <= threshold; }
};

/// Pre-flight checks. Each returns one or more measured values.
inline std::vector<GateCheck> run_gate(const std::string& gate, const RunConfig& c) {
  const auto opts = propagate_options(c);
  if (gate == "residual") {
    return {{"example1 M=512", residual_check(scenario_example1(), 0.3, 512), 1e-8},
            {"example2 M=64", residual_check(scenario_example2(), 0.3, 64), 1e-10},
            {"example3 M=1024", residual_check(scenario_example3(), 0.3, 1024), 1e-8}};
  }
  if (gate == "mass") {
    const std::vector<std::size_t> sizes{32, 256, 1024};
    return {{"max drift, 20 fields, N=100", verification::mass_drift(sizes, 20, 100, c.seed + 11, opts), 1e-12}};
  }
  if (gate == "forward") {
    auto s1 = scenario_example1();
    s1.N = 200;
    auto s2 = scenario_example2();
    const auto s3 = scenario_example3();
    const auto e1 = rel_misfit(propagate(s1.exact_at(0), s1.params(), false, opts).field, s1.exact_at(s1.T));
    const auto e2 = rel_misfit(propagate(s2.exact_at(0), s2.params(), false, opts).field, s2.exact_at(s2.T));
    const auto out3 = coupled_propagate(s3.exact_at(0), s3.params()).field;
    const auto ref3 = s3.exact_at(s3.T);
    const double e3 = rel_misfit(out3.psi1, ref3.psi1) + rel_misfit(out3.psi2, ref3.psi2);
    return {{"example1 M=512 N=200 e_psi", e1, 1e-6},
            {"example2 M=512 N=1 e_psi", e2, 1e-6},
            {"example3 M=1024 N=10 e_psi", e3, 1e-6}};
  }
  if (gate == "gradient") {
    PropagateOptions fd_opts;
    fd_opts.phase_sign = opts.phase_sign;
    double gv = 0.0, gc = 0.0, gz = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      gv = std::max(gv, verification::gradient_check_V(64, 4, c.seed + seed, 10, 1e-5, fd_opts));
      gc = std::max(gc, verification::gradient_check_coeffs(64, 4, c.seed + seed, 10, 1e-5, fd_opts));
      gz = std::max(gz, verification::gradient_check_zetas(64, 4, c.seed + seed));
    }
    return {{"grad_V vs FD", gv, 1e-6}, {"grad_c vs FD", gc, 1e-6}, {"grad_zeta vs FD", gz, 1e-6}};
  }
  if (gate == "composition") {
    return {{"merged vs unmerged", verification::composition_defect(10, c.seed + 7), 1e-12}};
  }
  throw Error(ErrorKind::config, "unknown gate '" + gate + "'");
}

inline int cmd_verify(const RunConfig& c, std::ostream& log) {
  const std::vector<std::string> all{"residual", "mass", "forward", "gradient", "composition"};
  const auto& gates = c.gates.empty() ? all : c.gates;
  std::vector<std::string> failed;
  json report = json::object();
  for (const auto& g : gates) {
    bool pass = true;
    for (const auto& chk : run_gate(g, c)) {
      log << g << " [" << chk.label << "]: " << num(chk.value) << " <= " << chk.threshold << ' '
          << (chk.pass() ? "PASS" : "FAIL") << '\n';
      report[g].push_back({{"check", chk.label}, {"value", chk.value}, {"threshold", chk.threshold}});
      pass = pass && chk.pass();
    }
    if (!pass) failed.push_back(g);
  }
  if (!failed.empty()) {
    log << "failed gates:";
    for (const auto& g : failed) log << ' ' << g;
    log << '\n';
    return verify_failed;
  }
  log << "all gates passed\n";
  return ok;
}

inline int dispatch(const std::string& command, const RunConfig& c, std::ostream& log) {
  if (command == "forward") return cmd_forward(c, log);
  if (command == "invert") return cmd_invert(c, log);
  if (command == "converge") return cmd_converge(c, log);
  if (command == "landscape") return cmd_landscape(c, log);
  if (command == "verify") return cmd_verify(c, log);
  throw Error(ErrorKind::config, "unknown command '" + command + "'");
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::invalid_domain:
    case ErrorKind::invalid_argument:
      return config_error;
    case ErrorKind::divergence:
      return diverged;
    default:
      return numeric_error;
  }
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"Split-step Fourier propagation and inverse potential recovery for nonlinear Schroedinger equations"};
  app.require_subcommand(1, 1);
  std::string config_path, scenario, out, gates;
  std::vector<std::string> sets;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"forward", "propagate the exact initial state and compare with the closed form"},
      {"invert", "recover potential coefficients (or couplings for example3) from data"},
      {"converge", "refinement sweep in N or M with a fitted order"},
      {"landscape", "scan the example3 loss over a coupling grid"},
      {"verify", "run the pre-flight gates"}};
  for (const auto& [name, about] : commands) {
    auto* sub = app.add_subcommand(name, about);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--scenario", scenario, "example1 | example2 | example3");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--set", sets, "override a config key (key=value), repeatable");
    sub->add_option("--gates", gates, "comma-separated gates for verify");
    subs.push_back(sub);
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json overrides = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw Error(ErrorKind::config, "cannot read config " + config_path);
      try {
        overrides = json::parse(f);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
      }
      check_keys(overrides);
    }
    for (const auto& s : sets) {
      auto [k, v] = parse_assignment(s);
      overrides[k] = v;
    }
    if (!scenario.empty()) overrides["scenario"] = scenario;
    if (!out.empty()) overrides["out"] = out;
    if (!gates.empty()) {
      json list = json::array();
      std::stringstream ss(gates);
      for (std::string g; std::getline(ss, g, ',');)
        if (!g.empty()) list.push_back(g);
      overrides["gates"] = list;
    }
    const RunConfig cfg = resolve(overrides);
    return dispatch(command, cfg, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace nlsnet::cli
