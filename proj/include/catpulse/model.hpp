#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "catpulse/algebra.hpp"
#include "catpulse/pulses.hpp"

namespace catpulse {

// Physical rates. Every rate is in the unit system chosen by the caller
// (per-gamma or per-g); the struct itself is unit-agnostic.
struct SystemParams {
  double g = 1.0;
  double delta = 1000.0;  // detuning (can be negative)
  double gamma = 0.5;     // atomic polarization decay rate
  double kappa_ex = 1.0;
  double kappa_in = 0.0;
  double delta_g = 0.0;
  double delta_e = 0.0;
  double r1 = 0.5;
  double r2 = 0.5;
  int n_emitters = 1;

  double kappa() const { return kappa_ex + kappa_in; }
  double omega0() const { return -g * g / delta; }
  double cooperativity() const { return g * g / (2.0 * kappa() * gamma); }
  double internal_cooperativity() const {
    return g * g / (2.0 * kappa_in * gamma);
  }
  void validate() const;
};

// One summand of a time-dependent operator: coeff(t) * mat, or just mat when
// coeff is empty.
struct OperatorTerm {
  Matrix mat;
  std::function<cplx(double)> coeff;  // null => constant coefficient 1
};

struct TimeDependentOperator {
  SpaceLayout layout;
  std::vector<OperatorTerm> terms;

  Matrix at(double t) const;
  bool is_constant() const;
};

struct JumpOperator {
  std::string label;
  TimeDependentOperator op;
};

struct TimeDependentModel {
  SpaceLayout layout;
  TimeDependentOperator hamiltonian;
  std::vector<JumpOperator> jumps;
  double t_end = 0.0;  // window hint from the drives

  Matrix hamiltonian_at(double t) const { return hamiltonian.at(t); }
};

// Full 4LS model: emitter factors of dim 4 (down, up, e1, e2) plus the cavity.
TimeDependentModel build_full_model(const SystemParams& params,
                                    const std::vector<DriveWaveform>& drives,
                                    int n_cavity = 10);

// Adiabatically eliminated model: emitter factors of dim 2 (down, up).
// include_cavity_in_jumps controls the omega0-proportional parts of the
// effective atomic jumps; dropping them is the long-pulse form.
TimeDependentModel build_effective_model(const SystemParams& params,
                                         const std::vector<DriveWaveform>& drives,
                                         bool include_cavity_in_jumps = true,
                                         int n_cavity = 10);

// Cascade the model into a virtual output cavity that absorbs the target mode.
TimeDependentModel attach_virtual_cavity(const TimeDependentModel& model,
                                         const SystemParams& params,
                                         const std::function<cplx(double)>& g_v,
                                         int n_virtual);

// H(t) - (i/2) sum_m L_m^dag(t) L_m(t).
TimeDependentOperator non_hermitian_hamiltonian(const TimeDependentModel& model);

// Factor labels used by the builders.
std::string emitter_label(int i);
inline const char* kCavityLabel = "cavity";
inline const char* kVirtualLabel = "virtual";

}  // namespace catpulse
