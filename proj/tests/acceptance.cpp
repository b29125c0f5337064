// Acceptance suite: one test case per criterion, one PASS/FAIL line each.
// Run a single criterion with --test-case=criterion-<n>.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "catpulse/analytics.hpp"
#include "catpulse/optimizer.hpp"
#include "catpulse/states.hpp"

using namespace catpulse;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double minutes() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
               .count() /
           60.0;
  }
};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion-%d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

// Fidelity-bound benchmark regime, rates per gamma: (delta, g) = (1000, 10).
SystemParams bench_params(double kappa_in_over_g) {
  SystemParams p;
  p.gamma = 1.0;
  p.g = 10.0;
  p.delta = 1000.0;
  p.kappa_in = kappa_in_over_g * p.g;
  p.kappa_ex = optimal_kappa_ex(p, CatVariant::TwoCat);
  return p;
}

Envelope pulse_for(const SystemParams& p, double kappa_tau,
                   double window_over_tau = 10.0) {
  const double tau = kappa_tau / p.kappa();
  return Envelope::gaussian(tau, 0.5 * window_over_tau * tau,
                            window_over_tau * tau);
}

double twocat_fidelity(const SystemParams& p, cplx alpha, double kappa_tau,
                       const ObjectiveNumerics& num, Trajectory* traj = nullptr) {
  PulsePlan plan{pulse_for(p, kappa_tau), {alpha}};
  return simulate_fidelity(p, plan, CatVariant::TwoCat, num, nullptr, traj);
}

// Full-model time-averaged excited population for criterion 4:
// (delta, gamma) = (1000, 0.5) g, kappa = kappa_ex = g.
double pe_cell(double kappa_tau, int n_cavity, double rtol, cplx alpha,
               Trajectory* traj_out = nullptr) {
  SystemParams p;
  p.g = 1.0;
  p.delta = 1000.0;
  p.gamma = 0.5;
  p.kappa_ex = 1.0;
  p.kappa_in = 0.0;
  const double tau = kappa_tau / p.kappa();
  Envelope env = Envelope::gaussian(tau, 5.0 * tau, 10.0 * tau);
  std::vector<DriveWaveform> drives = {
      drive_lambda(env, alpha, p.omega0(), p.kappa(), p.kappa_ex, 1)};
  auto model = build_full_model(p, drives, n_cavity);
  Vector psi0 = Vector::Zero(model.layout.total_dim());
  psi0(0) = 1.0;  // |down, 0>
  IntegratorOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-12;
  opts.save_points = 401;
  auto traj = integrate_master(model, QuantumState::pure(model.layout, psi0),
                               0.0, env.window(), opts);
  const double pe = excited_population_avg(traj, p, tau);
  if (traj_out) *traj_out = std::move(traj);
  return pe;
}

// Embed a single-mode density matrix into a larger Fock space (exact: the
// state is unchanged, the displaced-parity kernel gains headroom).
QuantumState pad_mode(const QuantumState& s, int dim) {
  Matrix rho = s.density_matrix();
  Matrix big = Matrix::Zero(dim, dim);
  big.topLeftCorner(rho.rows(), rho.cols()) = rho;
  return QuantumState::density(SpaceLayout({{"mode", dim}}), big);
}

double min_of(const Eigen::MatrixXd& m) { return m.minCoeff(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

}  // namespace

TEST_CASE("criterion-1") {
  // Lossless protocol exactness: effective model, N = 1, kappa_in = 0,
  // gamma = 1e-6 g, alpha = 2, kappa tau = 50 -> joint fidelity >= 0.99
  // within 1 minute at n_v = 20.
  Timer timer;
  SystemParams p;
  p.g = 1.0;
  p.delta = 1000.0;
  p.gamma = 1e-6;
  p.kappa_ex = 1.0;
  p.kappa_in = 0.0;
  ObjectiveNumerics num;
  num.n_cavity = 4;
  num.n_virtual = 20;
  num.rtol = 1e-6;
  num.atol = 1e-9;
  const double f = twocat_fidelity(p, cplx(2.0, 0.0), 50.0, num);
  const double elapsed = timer.minutes();
  const bool pass = f >= 0.99 && elapsed <= 1.0;
  report(1, pass,
         fmt("lossless joint fidelity F=%.5f (need >= 0.99), %.2f min "
             "(budget 1)", f, elapsed));
  CHECK(f >= 0.99);
  CHECK(elapsed <= 1.0);
}

TEST_CASE("criterion-2") {
  // F >= F_min - 0.01 and F - F_min <= 0.05 at the analytic optimum for
  // kappa_in/g in {1e-3, 1e-2, 1e-1}, alpha = 2, kappa tau = 50.
  Timer timer;
  bool pass = true;
  std::string detail;
  for (double kin_over_g : {1e-3, 1e-2, 1e-1}) {
    SystemParams p = bench_params(kin_over_g);
    const double fmin = f_min(cplx(2.0, 0.0), mode_match(p));
    ObjectiveNumerics num;
    num.n_cavity = 4;
    num.n_virtual = 20;
    num.rtol = 1e-7;
    num.atol = 1e-10;
    const double f = twocat_fidelity(p, cplx(2.0, 0.0), 50.0, num);
    const bool ok = f >= fmin - 0.01 && f - fmin <= 0.05;
    pass = pass && ok;
    // Trajectories with an even number of photon-loss jumps restore the cat
    // coherently (each jump flips the branch sign), so the exact F sits near
    // e^{-mu} cosh(mu), mu = (1/M - 1)|alpha|^2, not at the e^{-mu} bound.
    const double mu = -std::log(fmin);
    detail += fmt("[kin/g=%.0e F=%.4f Fmin=%.4f revival=%.4f]", kin_over_g, f,
                  fmin, fmin * std::cosh(mu));
    CHECK(f >= fmin - 0.01);
    CHECK(f - fmin <= 0.05);
  }
  const double elapsed = timer.minutes();
  pass = pass && elapsed <= 5.0;
  report(2, pass, detail + fmt(" %.2f min (budget 5)", elapsed));
  CHECK(elapsed <= 5.0);
}

TEST_CASE("criterion-3") {
  // Numerically optimized kappa_ex within a factor 2 of the analytic
  // candidates: two-cat sqrt(1+2 C_in) at three kappa_in, four-cat
  // sqrt(1+3 C_in) at beta = 2 (one representative kappa_in).
  Timer timer;
  bool pass = true;
  std::string detail;
  // The question is where the optimum sits, not its fidelity to six digits:
  // loose rtol, an 8-tau window, 7 coarse points, and a bracket of
  // [cand/4, 4 cand] (comfortably wider than the factor-2 window under test)
  // keep each golden-section pass affordable.
  ObjectiveNumerics num;
  num.n_cavity = 3;
  num.n_virtual = 20;
  num.rtol = 1e-5;
  num.atol = 1e-8;
  num.save_points = 2;

  for (double kin_over_g : {1e-3, 1e-2, 1e-1}) {
    SystemParams p = bench_params(kin_over_g);
    const double cand = p.kappa_ex;
    PulsePlan plan{pulse_for(p, 50.0, 8.0), {cplx(2.0, 0.0)}};
    auto objective = fidelity_objective(p, plan, CatVariant::TwoCat, num);
    auto r =
        maximize_over_kappa_ex(objective, cand / 4.0, cand * 4.0, 0.25, 7);
    const double ratio = r.best_kappa_ex / cand;
    const bool ok = ratio >= 0.5 && ratio <= 2.0;
    pass = pass && ok;
    detail += fmt("[2cat kin/g=%.0e kex*/cand=%.2f]", kin_over_g, ratio);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }

  {
    SystemParams p = bench_params(1e-2);
    p.n_emitters = 2;
    const double cand = optimal_kappa_ex(p, CatVariant::FourCat);
    p.kappa_ex = cand;
    auto [a1, a2] = four_cat_amplitudes(cplx(2.0, 0.0));
    PulsePlan plan{pulse_for(p, 50.0, 8.0), {a1, a2}};
    // The four-cat evaluations dominate the budget; n_virtual = 16 leaves a
    // Poisson tail of 4e-6 at |beta|^2 = 4 (harmless for locating a flat
    // optimum), so relax the guard for this sweep and restore it after.
    num.n_virtual = 16;
    const double saved_tol = numeric_policy().coherent_tail_tol;
    numeric_policy().coherent_tail_tol = 1e-5;
    auto objective = fidelity_objective(p, plan, CatVariant::FourCat, num);
    auto r =
        maximize_over_kappa_ex(objective, cand / 2.5, cand * 2.5, 0.3, 5);
    numeric_policy().coherent_tail_tol = saved_tol;
    const double ratio = r.best_kappa_ex / cand;
    const bool ok = ratio >= 0.5 && ratio <= 2.0;
    pass = pass && ok;
    detail += fmt("[4cat kin/g=1e-02 kex*/cand=%.2f]", ratio);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }

  const double elapsed = timer.minutes();
  pass = pass && elapsed <= 30.0;
  report(3, pass, detail + fmt(" %.1f min (budget 30)", elapsed));
  CHECK(elapsed <= 30.0);
}

TEST_CASE("criterion-4") {
  // Full model: averaged excited population strictly decreasing over
  // kappa tau in {3, 10, 30, 100}, below 1e-2 at 100, and within a factor 3
  // of the closed-form estimate at kappa tau in {50, 100}.
  Timer timer;
  SystemParams p;
  p.g = 1.0;
  p.delta = 1000.0;
  p.gamma = 0.5;
  p.kappa_ex = 1.0;
  p.kappa_in = 0.0;
  const cplx alpha{2.0, 0.0};

  const double grid[] = {3.0, 10.0, 30.0, 100.0};
  double pe[4];
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    pe[i] = pe_cell(grid[i], 8, 1e-6, alpha);
    detail += fmt("[kt=%g pe=%.3e]", grid[i], pe[i]);
  }
  bool pass = true;
  for (int i = 1; i < 4; ++i) {
    pass = pass && pe[i] < pe[i - 1];
    CHECK(pe[i] < pe[i - 1]);
  }
  // Note: the closed-form average is (|a|^2/2) kappa^2/(g^2 kex tau) x
  // [1 + 1/(2 (kappa tau)^2)] = 2.0e-2 at these parameters even with all of
  // kappa external, so the 1e-2 bound is out of reach analytically; the
  // simulation confirming ~2e-2 is the consistent outcome.
  pass = pass && pe[3] < 1e-2;
  CHECK(pe[3] < 1e-2);

  const double pe50 = pe_cell(50.0, 8, 1e-6, alpha);
  for (auto [kt, val] : {std::pair{50.0, pe50}, std::pair{100.0, pe[3]}}) {
    const double est = pe_estimate(std::abs(alpha), p, kt / p.kappa());
    const double ratio = val / est;
    detail += fmt("[kt=%g pe/est=%.2f est=%.3e]", kt, ratio, est);
    pass = pass && ratio >= 1.0 / 3.0 && ratio <= 3.0;
    CHECK(ratio >= 1.0 / 3.0);
    CHECK(ratio <= 3.0);
  }

  const double elapsed = timer.minutes();
  pass = pass && elapsed <= 20.0;
  report(4, pass, detail + fmt(" %.1f min (budget 20)", elapsed));
  CHECK(elapsed <= 20.0);
}

TEST_CASE("criterion-5") {
  // No-jump oracle: final norm^2 of the no-jump evolution (long-pulse jump
  // set) equals exp(-(1/M - 1)|alpha|^2) within 2% at C_in = 500.
  Timer timer;
  SystemParams p = bench_params(1e-2);  // C_in = 500
  const cplx alpha{2.0, 0.0};
  const double expect = f_min(alpha, mode_match(p));

  Envelope env = pulse_for(p, 50.0);
  std::vector<DriveWaveform> drives = {
      drive_lambda(env, alpha, p.omega0(), p.kappa(), p.kappa_ex, 1)};
  auto model = build_effective_model(p, drives, /*include_cavity_in_jumps=*/false, 4);
  auto vmodel = attach_virtual_cavity(model, p, virtual_coupling(env), 20);
  Vector psi0 = Vector::Zero(vmodel.layout.total_dim());
  psi0(0) = 1.0;
  IntegratorOptions opts;
  opts.rtol = 1e-8;
  opts.atol = 1e-12;
  auto traj = integrate_no_jump(vmodel, QuantumState::pure(vmodel.layout, psi0),
                                0.0, env.window(), opts);
  const double norm2 = traj.trace_or_norm2.back();
  const double rel = std::abs(norm2 - expect) / expect;
  const bool pass = rel <= 0.02;
  report(5, pass,
         fmt("no-jump norm^2=%.5f vs exp(-(1/M-1)|a|^2)=%.5f (rel err %.3f, "
             "tol 0.02), %.2f min", norm2, expect, rel, timer.minutes()));
  CHECK(rel <= 0.02);
}

TEST_CASE("criterion-6") {
  // Conservation suite on representative criterion-1/4 style runs: trace
  // drift <= 1e-6, smallest eigenvalue >= -1e-6, and <sigma_x> constant
  // within 1e-6 on the effective-model run.
  Timer timer;
  SystemParams p;
  p.g = 1.0;
  p.delta = 1000.0;
  p.gamma = 1e-6;
  p.kappa_ex = 1.0;
  p.kappa_in = 0.0;
  ObjectiveNumerics num;
  num.n_cavity = 4;
  num.n_virtual = 20;
  num.rtol = 1e-8;
  num.atol = 1e-11;
  num.save_points = 21;
  Trajectory eff;
  (void)twocat_fidelity(p, cplx(2.0, 0.0), 50.0, num, &eff);

  const double drift_eff = eff.diag.max_trace_drift;
  Eigen::SelfAdjointEigenSolver<Matrix> es(eff.final_state().density_matrix(),
                                           Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();

  Matrix sx2(2, 2);
  sx2 << 0, 1, 1, 0;
  Operator sx = embed(Operator(SpaceLayout({{"s", 2}}), sx2), eff.layout,
                      "emitter1");
  auto sx_traj = observable_trajectory(eff, sx);
  double sx_dev = 0.0;
  for (const auto& v : sx_traj)
    sx_dev = std::max(sx_dev, std::abs(v.real() - sx_traj.front().real()));

  Trajectory full;
  (void)pe_cell(3.0, 6, 1e-7, cplx(2.0, 0.0), &full);
  const double drift_full = full.diag.max_trace_drift;
  Eigen::SelfAdjointEigenSolver<Matrix> es2(full.final_state().density_matrix(),
                                            Eigen::EigenvaluesOnly);
  const double min_eig_full = es2.eigenvalues().minCoeff();

  const bool pass = drift_eff <= 1e-6 && drift_full <= 1e-6 &&
                    min_eig >= -1e-6 && min_eig_full >= -1e-6 && sx_dev <= 1e-6;
  report(6, pass,
         fmt("trace drift (eff %.1e, full %.1e; tol 1e-6), min eig (eff %.1e, "
             "full %.1e; tol -1e-6), sigma_x dev %.1e (tol 1e-6), %.1f min",
             drift_eff, drift_full, min_eig, min_eig_full, sx_dev,
             timer.minutes()));
  CHECK(drift_eff <= 1e-6);
  CHECK(drift_full <= 1e-6);
  CHECK(min_eig >= -1e-6);
  CHECK(min_eig_full >= -1e-6);
  CHECK(sx_dev <= 1e-6);
}

TEST_CASE("criterion-7") {
  // Damped-cavity oracle: <n(t)> = e^{-2 kappa t} from |1> within rtol*10.
  const double kappa = 1.0, rtol = 1e-8;
  TimeDependentModel m;
  m.layout = SpaceLayout({{kCavityLabel, 4}});
  m.hamiltonian.layout = m.layout;
  m.jumps.push_back(
      {"cavity-loss",
       {m.layout, {{std::sqrt(2.0 * kappa) * destroy(4).matrix, nullptr}}}});
  Vector one = basis_vector(4, 1);
  IntegratorOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-14;
  opts.save_points = 41;
  auto traj = integrate_master(m, QuantumState::pure(m.layout, one), 0.0, 3.0,
                               opts);
  auto ns = observable_trajectory(traj, Operator(m.layout, number_op(4).matrix));
  double max_err = 0.0;
  for (size_t i = 0; i < traj.times.size(); ++i)
    max_err = std::max(max_err,
                       std::abs(ns[i].real() - std::exp(-2.0 * kappa * traj.times[i])));
  const bool pass = max_err <= 10.0 * rtol;
  report(7, pass, fmt("max |<n> - e^{-2kt}| = %.2e (tol %.0e)", max_err,
                      10.0 * rtol));
  CHECK(max_err <= 10.0 * rtol);
}

TEST_CASE("criterion-8") {
  // Four-cat structure at kappa_in = 1e-3 g, beta = 2: postselected fidelity
  // >= 0.95 with the ideal four-component cat, min Wigner < 0, and the ideal
  // cat's photon distribution supported on n = 0 mod 4 within 1e-8.
  Timer timer;
  SystemParams p;
  p.gamma = 1.0;
  p.g = 10.0;
  p.delta = 1000.0;
  p.kappa_in = 1e-3 * p.g;
  p.n_emitters = 2;
  p.kappa_ex = optimal_kappa_ex(p, CatVariant::FourCat);

  auto [a1, a2] = four_cat_amplitudes(cplx(2.0, 0.0));
  PulsePlan plan{pulse_for(p, 50.0), {a1, a2}};
  ObjectiveNumerics num;
  num.n_cavity = 3;
  num.n_virtual = 20;
  num.rtol = 1e-6;
  num.atol = 1e-9;
  double prob = 0.0;
  Trajectory traj;
  const double f =
      simulate_fidelity(p, plan, CatVariant::FourCat, num, &prob, &traj);

  // Postselected propagating mode, padded for the displaced-parity kernel.
  Matrix pdown = Matrix::Zero(2, 2);
  pdown(0, 0) = 1.0;
  const QuantumState& rho = traj.final_state();
  Operator proj = identity(rho.layout);
  for (int i = 0; i < 2; ++i)
    proj = proj * embed(Operator(SpaceLayout({{"s", 2}}), pdown), rho.layout,
                        emitter_label(i));
  auto [cond, pd] = postselect(rho, proj, {"emitter1", "emitter2"});
  QuantumState mode = pad_mode(partial_trace(cond, {kVirtualLabel}), 80);

  const int n = 101;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = -6.0 + 12.0 * i / (n - 1);
  const double w_min = min_of(wigner(mode, xs, xs));

  // Ideal four-cat support check.
  CatSpec spec;
  spec.amplitude = 2.0;
  spec.components = 4;
  spec.fock_dim = 30;
  Vector ideal = cat_state(spec).vector();
  double off_support = 0.0;
  for (int k = 0; k < 30; ++k)
    if (k % 4 != 0) off_support += std::norm(ideal(k));

  // The no-jump weight bounds the conditional fidelity near
  // e^{-(1/M-1)|beta|^2} / (4 P(down,down)); quote it next to F so a miss on
  // the 0.95 threshold can be read against the physics ceiling.
  const double mu = (1.0 / mode_match(p) - 1.0) * 4.0;
  const double ceiling = std::exp(-mu) * 0.25 / pd;
  const bool pass = f >= 0.95 && w_min < 0.0 && off_support <= 1e-8;
  report(8, pass,
         fmt("four-cat F=%.4f (need >= 0.95, no-jump ceiling %.4f), "
             "min W=%.4f (need < 0), off-support %.1e (tol 1e-8), "
             "P(down,down)=%.3f, %.1f min",
             f, ceiling, w_min, off_support, pd, timer.minutes()));
  CHECK(f >= 0.95);
  CHECK(w_min < 0.0);
  CHECK(off_support <= 1e-8);
}

TEST_CASE("criterion-9") {
  // Wigner sanity: vacuum W(0,0) = 1/pi within 1e-6; grids integrate to 1
  // within 1e-3.
  QuantumState vac = coherent(30, 0.0);
  const double w00 = wigner(vac, {0.0}, {0.0})(0, 0);
  const double err0 = std::abs(w00 - 1.0 / M_PI);

  auto integrate_grid = [](const QuantumState& s, double half, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = -half + 2.0 * half * i / (n - 1);
    auto w = wigner(s, xs, xs);
    const double dx = 2.0 * half / (n - 1);
    return w.sum() * dx * dx;
  };
  const double int_vac = integrate_grid(vac, 4.0, 81);
  CatSpec spec;
  spec.amplitude = 2.0;
  spec.components = 4;
  spec.fock_dim = 30;
  const double int_cat = integrate_grid(pad_mode(cat_state(spec), 80), 6.0, 101);

  const bool pass = err0 <= 1e-6 && std::abs(int_vac - 1.0) <= 1e-3 &&
                    std::abs(int_cat - 1.0) <= 1e-3;
  report(9, pass,
         fmt("vacuum W(0,0) err %.1e (tol 1e-6); integrals: vacuum %.5f, "
             "four-cat %.5f (tol 1e-3)", err0, int_vac, int_cat));
  CHECK(err0 <= 1e-6);
  CHECK(std::abs(int_vac - 1.0) <= 1e-3);
  CHECK(std::abs(int_cat - 1.0) <= 1e-3);
}
