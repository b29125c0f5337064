#pragma once

#include <vector>

#include "catpulse/model.hpp"

namespace catpulse {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  int save_points = 201;
  bool store_states = true;
  long max_steps = 200000000;
};

struct IntegratorDiagnostics {
  long steps = 0;
  long rejected = 0;
  double max_local_error = 0.0;
  double max_trace_drift = 0.0;  // trace drift (density) / norm increase (pure)
};

struct Trajectory {
  StateKind kind = StateKind::Density;
  SpaceLayout layout;
  std::vector<double> times;
  std::vector<QuantumState> states;     // filled when store_states
  std::vector<double> trace_or_norm2;   // trace (density) or norm^2 (pure)
  IntegratorDiagnostics diag;

  const QuantumState& final_state() const;
};

// d rho/dt = -i[H, rho] + sum_m D[L_m] rho, adaptive RK45 on the window
// (t_begin, t_end).
Trajectory integrate_master(const TimeDependentModel& model,
                            const QuantumState& rho0, double t_begin,
                            double t_end, const IntegratorOptions& opts = {});

// i d psi/dt = [H(t) - (i/2) sum L^dag L] psi; the final norm^2 is the
// no-jump probability.
Trajectory integrate_no_jump(const TimeDependentModel& model,
                             const QuantumState& psi0, double t_begin,
                             double t_end, const IntegratorOptions& opts = {});

std::vector<cplx> observable_trajectory(const Trajectory& traj,
                                        const Operator& op);

}  // namespace catpulse
