// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nlsnet/nlsnet.hpp"
#include "nlsnet/verification.hpp"

using namespace nlsnet;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, double seconds) {
  std::printf("criterion %d %s: %s (%.1f s)\n", id, title, pass ? "PASS" : "FAIL", seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::map<std::string, double> by_name(const Library& lib, const Coeffs& c) {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < lib.size(); ++i) m[lib[i].name] = c[i];
  return m;
}

// |c_i - truth_i| <= tol for every entry, absent truth entries being zero.
double worst_coeff_error(const std::map<std::string, double>& got, const SingleScenario& s) {
  const std::map<std::string, double> truth(s.truth.begin(), s.truth.end());
  double worst = 0.0;
  for (const auto& [name, v] : got) {
    const auto it = truth.find(name);
    worst = std::max(worst, std::abs(v - (it == truth.end() ? 0.0 : it->second)));
  }
  return worst;
}

void print_coeffs(const std::map<std::string, double>& got) {
  std::printf("   c:");
  for (const auto& [name, v] : got) std::printf(" %s=%.4g", name.c_str(), v);
  std::printf("\n");
}

TrainConfig schedule(double lambda, double lr, double decay, std::size_t period, double post, std::size_t epochs) {
  TrainConfig t;
  t.lambda = lambda;
  t.max_epochs = epochs;
  t.tau = 1e-10;
  t.schedule = {lr, decay, period, post, 1e-10};
  return t;
}

struct InversionOutcome {
  std::map<std::string, double> coeffs;
  double e_V = 0.0;
  double oscillation = 0.0;  // max - min of J over the last 20% of epochs
  std::size_t best_epoch = 0;
  double best_J = 0.0;
};

InversionOutcome invert(const SingleScenario& s, const TrainConfig& cfg) {
  const auto lib = default_library();
  const auto phi = assemble(lib, s.grid());
  const auto prob = make_inverse_problem(s);
  const auto r = train_coeffs(prob, phi, Coeffs(lib.size(), 0.0), cfg);
  InversionOutcome out;
  out.coeffs = by_name(lib, r.params);
  out.e_V = rel_err_vector(synthesize(phi, r.params), *prob.V_exact);
  const auto& rows = r.record.rows;
  const std::size_t from = rows.size() - std::max<std::size_t>(1, rows.size() / 5);
  double lo = rows[from].J, hi = rows[from].J;
  for (std::size_t i = from; i < rows.size(); ++i) {
    lo = std::min(lo, rows[i].J);
    hi = std::max(hi, rows[i].J);
  }
  out.oscillation = hi - lo;
  out.best_epoch = r.record.best_epoch;
  out.best_J = rows[std::min(r.record.best_epoch, rows.size() - 1)].J;
  return out;
}

void criterion1() {
  Timer t;
  const std::vector<std::size_t> sizes{32, 256, 1024};
  const double drift = verification::mass_drift(sizes, 20, 100, 2024);
  std::printf("   max relative mass drift = %.3e (bound 1e-12)\n", drift);
  report(1, "unitarity", drift <= 1e-12, t.seconds());
}

void criterion2() {
  Timer t;
  const double r1 = residual_check(scenario_example1(), 0.3, 512);
  const double r2 = residual_check(scenario_example2(), 0.3, 64);
  const double r3 = residual_check(scenario_example3(), 0.3, 512);
  const double r3_fine = residual_check(scenario_example3(), 0.3, 1024);
  std::printf("   example1 M=512: %.3e (bound 1e-8)\n", r1);
  std::printf("   example2 M=64:  %.3e (bound 1e-10)\n", r2);
  std::printf("   example3 M=512: %.3e (bound 1e-8)\n", r3);
  std::printf("   example3 M=1024: %.3e (not gated; shows the M=512 value is a resolution floor)\n", r3_fine);
  report(2, "exact-solution residuals", r1 <= 1e-8 && r2 <= 1e-10 && r3 <= 1e-8, t.seconds());
}

void criterion3() {
  Timer t;
  const std::vector<std::size_t> Ns{25, 50, 100, 200, 400};
  auto s = scenario_example1();
  const auto strang = convergence_study(s, Vary::N, Ns, 1024, SplittingOrder::strang);
  const auto lie = convergence_study(s, Vary::N, Ns, 1024, SplittingOrder::lie);
  for (std::size_t i = 0; i < Ns.size(); ++i)
    std::printf("   N=%zu strang e_psi=%.3e lie e_psi=%.3e\n", Ns[i], strang.rows[i].e_psi, lie.rows[i].e_psi);
  std::printf("   order (slope of sqrt(2 e_psi) vs dt): strang %.4f, lie %.4f\n", strang.order, lie.order);
  std::printf("   slope of e_psi itself: strang %.4f, lie %.4f\n", strang.slope_e_psi, lie.slope_e_psi);
  const bool pass = std::abs(strang.order - 2.0) <= 0.2 && std::abs(lie.order - 1.0) <= 0.2;
  report(3, "temporal order", pass, t.seconds());
}

void criterion4() {
  Timer t;
  const std::vector<std::size_t> Ms{8, 16, 32, 64, 128};
  const auto table = convergence_study(scenario_example1(), Vary::M, Ms, 200, SplittingOrder::strang);
  bool monotone = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::printf("   M=%zu e_psi=%.10e\n", table.rows[i].value, table.rows[i].e_psi);
    // Once the spatial error is below the time-splitting floor, successive
    // values agree to roundoff; a relative wobble of 1e-6 is not an increase.
    if (i > 0 && table.rows[i].e_psi > table.rows[i - 1].e_psi * (1.0 + 1e-6)) monotone = false;
  }
  const double last = table.rows.back().e_psi;
  std::printf("   non-increasing (1e-6 relative plateau tolerance): %s; e_psi(M=128)=%.3e (bound 1e-8)\n",
              monotone ? "yes" : "no", last);
  report(4, "spatial spectral decay", monotone && last <= 1e-8, t.seconds());
}

void criterion5() {
  Timer t;
  double gv = 0.0, gc = 0.0, gz = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    gv = std::max(gv, verification::gradient_check_V(64, 4, seed, 10, 1e-5));
    gc = std::max(gc, verification::gradient_check_coeffs(64, 4, seed, 10, 1e-5));
    gz = std::max(gz, verification::gradient_check_zetas(64, 4, seed, 1e-5));
  }
  std::printf("   max relative deviation: grad_V %.3e, grad_c %.3e, grad_zeta %.3e (bound 1e-6)\n", gv, gc, gz);
  report(5, "gradient gate", gv <= 1e-6 && gc <= 1e-6 && gz <= 1e-6, t.seconds());
}

void criterion6() {
  Timer t;
  const auto s = scenario_example1();  // M=512, N=4, T=1
  const auto out = invert(s, schedule(0.0, 1.5, 0.99, 2000, 0.4, 6000));
  print_coeffs(out.coeffs);
  const double worst = worst_coeff_error(out.coeffs, s);
  std::printf("   returned iterate: epoch %zu, J=%.4e, e_V=%.4e (bound 1e-2), max |c - truth|=%.4e (bound 5e-2)\n",
              out.best_epoch, out.best_J, out.e_V, worst);
  report(6, "example1 inversion", out.e_V <= 1e-2 && worst <= 5e-2, t.seconds());
}

void criterion7() {
  Timer t;
  const auto s = scenario_example2();  // M=512, N=1, [0, 2 pi]
  const auto reg = invert(s, schedule(20.0, 5e-3, 0.9, 3000, 0.95, 6000));
  const auto plain = invert(s, schedule(0.0, 5e-3, 0.9, 3000, 0.95, 6000));
  std::printf("   lambda=20:\n");
  print_coeffs(reg.coeffs);
  const double worst = worst_coeff_error(reg.coeffs, s);
  std::printf("   e_V=%.4e (bound 5e-2), max |c - truth|=%.4e (bound 5e-2), J oscillation=%.4e\n", reg.e_V, worst,
              reg.oscillation);
  std::printf("   lambda=0:\n");
  print_coeffs(plain.coeffs);
  std::printf("   e_V=%.4e, J oscillation=%.4e\n", plain.e_V, plain.oscillation);
  const bool recovery = reg.e_V <= 5e-2 && worst <= 5e-2;
  const bool contrast = plain.oscillation > reg.oscillation;
  std::printf("   recovery at lambda=20: %s; oscillation contrast: %s\n", recovery ? "yes" : "no",
              contrast ? "yes" : "no");
  report(7, "example2 inversion", recovery && contrast, t.seconds());
}

void criterion8() {
  Timer t;
  auto s = scenario_example3();
  s.M = 512;
  const auto data = make_example3_data(s);
  TrainConfig cfg;
  cfg.max_epochs = 2000;
  cfg.schedule = {100.0, 1.0, 1000, 1.0, 1e-10};
  const auto r = train_zetas(data, {1.0, 0.4}, cfg, {s.zeta1, s.zeta2});
  const double e1 = std::abs(r.params.first - s.zeta1) / s.zeta1;
  const double e2 = std::abs(r.params.second - s.zeta2) / s.zeta2;
  std::printf("   zeta=(%.10f, %.10f) after %zu epochs, e_zeta=(%.3e, %.3e) (bound 1e-2)\n", r.params.first,
              r.params.second, r.record.epochs_run, e1, e2);

  const auto land = landscape_scan(data, {0.0, 2.0}, {0.0, 2.0}, 41, 41);
  const double h = 2.0 / 40.0;
  const double z1 = land.zeta1[land.argmin_i], z2 = land.zeta2[land.argmin_j];
  const bool near = std::abs(z1 - s.zeta1) <= h + 1e-12 && std::abs(z2 - s.zeta2) <= h + 1e-12;
  std::printf("   landscape 41x41 on [0,2]^2 at M=512: argmin (%.3f, %.3f), J=%.3e, within one cell: %s\n", z1, z2,
              land.at(land.argmin_i, land.argmin_j), near ? "yes" : "no");
  std::printf("   swap defect max|J(z1,z2) - J(z2,z1)| = %.6e\n", land.swap_defect);
  report(8, "example3 inversion and landscape", e1 <= 1e-2 && e2 <= 1e-2 && near, t.seconds());
}

void criterion9() {
  Timer t;
  const double d = verification::composition_defect(20, 99);
  std::printf("   max relative merged/unmerged difference = %.3e (bound 1e-12)\n", d);
  report(9, "composition equivalence", d <= 1e-12, t.seconds());
}

}  // namespace

int main() {
  const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                         criterion6, criterion7, criterion8, criterion9};
  for (auto* c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("   exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
