#include "catpulse/optimizer.hpp"

#include <cmath>

#include "catpulse/states.hpp"

namespace catpulse {

namespace {

Vector kron_vec(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

}  // namespace

double simulate_fidelity(const SystemParams& params, const PulsePlan& plan,
                         CatVariant variant, const ObjectiveNumerics& num,
                         double* prob_out, Trajectory* traj_out) {
  const int N = params.n_emitters;
  if (static_cast<int>(plan.alphas.size()) != N)
    throw ValidationError("simulate_fidelity: one target amplitude per emitter");
  if (variant == CatVariant::FourCat && N != 2)
    throw ValidationError("simulate_fidelity: four-cat needs two emitters");

  std::vector<DriveWaveform> drives;
  for (cplx a : plan.alphas)
    drives.push_back(drive_lambda(plan.env, a, params.omega0(), params.kappa(),
                                  params.kappa_ex, N));
  auto model = build_effective_model(params, drives, true, num.n_cavity);
  auto vmodel = attach_virtual_cavity(model, params, virtual_coupling(plan.env),
                                      num.n_virtual);

  Vector psi0 = basis_vector(2, 0);
  for (int i = 1; i < N; ++i) psi0 = kron_vec(psi0, basis_vector(2, 0));
  psi0 = kron_vec(psi0, basis_vector(num.n_cavity, 0));
  psi0 = kron_vec(psi0, basis_vector(num.n_virtual, 0));

  IntegratorOptions opts;
  opts.rtol = num.rtol;
  opts.atol = num.atol;
  opts.save_points = num.save_points;
  auto traj = integrate_master(vmodel, QuantumState::pure(vmodel.layout, psi0),
                               0.0, plan.env.window(), opts);
  const QuantumState& rho = traj.final_state();

  double f;
  if (variant == CatVariant::TwoCat) {
    // |cat> = sum_j |j>_spin |0>_c |(-1)^j alpha>_v / sqrt(2), |j> the
    // sigma_x basis (|down> + (-1)^j |up>)/sqrt(2).
    const cplx alpha = plan.alphas[0];
    Vector target = Vector::Zero(vmodel.layout.total_dim());
    for (int j = 0; j < 2; ++j) {
      Vector spin(2);
      spin << 1.0 / std::sqrt(2.0), (j == 0 ? 1.0 : -1.0) / std::sqrt(2.0);
      Vector opt = coherent(num.n_virtual, (j == 0 ? 1.0 : -1.0) * alpha).vector();
      target += kron_vec(kron_vec(spin, basis_vector(num.n_cavity, 0)), opt) /
                std::sqrt(2.0);
    }
    target /= target.norm();
    f = fidelity(rho, QuantumState::pure(vmodel.layout, target));
    if (prob_out) *prob_out = 1.0;
  } else {
    // Postselect both emitters in |down>, then compare the optical factors
    // against |0>_c |four-cat>_v.
    Matrix pdown = Matrix::Zero(2, 2);
    pdown(0, 0) = 1.0;
    Operator proj = identity(vmodel.layout);
    std::vector<std::string> emitters;
    for (int i = 0; i < N; ++i) {
      proj = proj * embed(Operator(SpaceLayout({{"s", 2}}), pdown), vmodel.layout,
                          emitter_label(i));
      emitters.push_back(emitter_label(i));
    }
    auto [cond, prob] = postselect(rho, proj, emitters);
    const cplx beta = plan.alphas[0] + plan.alphas[1];
    CatSpec spec;
    spec.amplitude = beta;
    spec.components = 4;
    spec.fock_dim = num.n_virtual;
    Vector target = kron_vec(basis_vector(num.n_cavity, 0),
                             cat_state(spec).vector());
    f = fidelity(cond, QuantumState::pure(cond.layout, target));
    if (prob_out) *prob_out = prob;
  }
  if (traj_out) *traj_out = std::move(traj);
  return f;
}

std::function<double(double)> fidelity_objective(const SystemParams& params,
                                                 const PulsePlan& plan,
                                                 CatVariant variant,
                                                 const ObjectiveNumerics& num) {
  return [params, plan, variant, num](double kappa_ex) {
    SystemParams p = params;
    p.kappa_ex = kappa_ex;
    return simulate_fidelity(p, plan, variant, num);
  };
}

SweepResult maximize_over_kappa_ex(const std::function<double(double)>& objective,
                                   double lo, double hi, double rel_tol,
                                   int coarse_points) {
  if (lo <= 0.0 || hi <= lo)
    throw ValidationError("maximize_over_kappa_ex: need 0 < lo < hi");
  if (coarse_points < 5)
    throw ValidationError("maximize_over_kappa_ex: coarse_points must be >= 5");
  SweepResult result;
  auto eval = [&](double kex) {
    double f = objective(kex);
    result.kappa_ex_samples.push_back(kex);
    result.fidelity_samples.push_back(f);
    return f;
  };

  // Coarse log-spaced scan.
  const int n_coarse = coarse_points;
  std::vector<double> fs(n_coarse);
  const double la = std::log(lo), lb = std::log(hi);
  int best = 0;
  for (int i = 0; i < n_coarse; ++i) {
    double x = std::exp(la + (lb - la) * i / double(n_coarse - 1));
    fs[i] = eval(x);
    if (fs[i] > fs[best]) best = i;
  }
  int n_local_max = 0;
  for (int i = 1; i + 1 < n_coarse; ++i)
    if (fs[i] > fs[i - 1] && fs[i] > fs[i + 1]) ++n_local_max;
  if (n_local_max > 1)
    result.warnings.push_back(
        "coarse scan is not unimodal; refining around the global coarse maximum");
  if (best == 0 || best == n_coarse - 1)
    result.warnings.push_back("coarse maximum at the bracket edge");

  // Golden-section refinement on the log axis between the coarse neighbors.
  const double step = (lb - la) / (n_coarse - 1);
  double a = la + step * std::max(best - 1, 0);
  double b = la + step * std::min(best + 1, n_coarse - 1);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = eval(std::exp(x1)), f2 = eval(std::exp(x2));
  int iter = 0;
  while (b - a > rel_tol && iter++ < 80) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = eval(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = eval(std::exp(x1));
    }
  }
  result.best_fidelity = -1.0;
  for (size_t i = 0; i < result.kappa_ex_samples.size(); ++i) {
    if (result.fidelity_samples[i] > result.best_fidelity) {
      result.best_fidelity = result.fidelity_samples[i];
      result.best_kappa_ex = result.kappa_ex_samples[i];
    }
  }
  return result;
}

}  // namespace catpulse
