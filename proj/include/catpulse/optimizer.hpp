#pragma once

#include <functional>
#include <string>
#include <vector>

#include "catpulse/analytics.hpp"
#include "catpulse/dynamics.hpp"
#include "catpulse/pulses.hpp"

namespace catpulse {

struct SweepResult {
  std::vector<double> kappa_ex_samples;
  std::vector<double> fidelity_samples;
  double best_kappa_ex = 0.0;
  double best_fidelity = 0.0;
  double analytic_candidate = 0.0;  // kappa_in sqrt(1 + {2,3} C_in)
  double ratio = 0.0;               // best_kappa_ex / analytic_candidate
  std::vector<std::string> warnings;
};

// Truncations and tolerances for objective evaluations; each evaluation is a
// full effective-model simulation.
struct ObjectiveNumerics {
  int n_cavity = 4;
  int n_virtual = 20;
  double rtol = 1e-6;
  double atol = 1e-9;
  int save_points = 9;
};

// Coarse log-spaced scan followed by golden-section refinement.
SweepResult maximize_over_kappa_ex(const std::function<double(double)>& objective,
                                   double lo, double hi, double rel_tol,
                                   int coarse_points = 9);

// Closure mapping kappa_ex to the simulated fidelity: regenerates the drive
// waveforms (they depend on kappa_ex), builds the effective virtual-cavity
// model, integrates, and evaluates the joint (two-cat) or postselected
// (four-cat) fidelity.
std::function<double(double)> fidelity_objective(const SystemParams& params,
                                                 const PulsePlan& plan,
                                                 CatVariant variant,
                                                 const ObjectiveNumerics& num = {});

// The final-state fidelity behind fidelity_objective, exposed for reuse by the
// experiment runner (returns fidelity, and for four-cat the postselection
// probability through *prob_out).
double simulate_fidelity(const SystemParams& params, const PulsePlan& plan,
                         CatVariant variant, const ObjectiveNumerics& num,
                         double* prob_out = nullptr,
                         Trajectory* traj_out = nullptr);

}  // namespace catpulse
