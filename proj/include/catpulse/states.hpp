#pragma once

#include <utility>
#include <vector>

#include "catpulse/algebra.hpp"
#include "catpulse/dynamics.hpp"
#include "catpulse/model.hpp"

namespace catpulse {

enum class CatParity { Even, Odd };

struct CatSpec {
  cplx amplitude = 0.0;  // alpha (2-component) or beta (4-component)
  int components = 2;    // 2 or 4
  CatParity parity = CatParity::Even;  // two-component only
  int fock_dim = 20;
};

// Truncated coherent state; asserts the truncation tail is negligible.
QuantumState coherent(int dim, cplx alpha);

QuantumState cat_state(const CatSpec& spec);

// <psi|rho|psi> for a density matrix, |<psi|phi>|^2 for pure states.
double fidelity(const QuantumState& rho, const QuantumState& target);

// Project with an idempotent projector, renormalize, and trace out the listed
// factors (the outcome registers). Returns the conditional state and the
// outcome probability.
std::pair<QuantumState, double> postselect(
    const QuantumState& rho, const Operator& projector,
    const std::vector<std::string>& reduce_over = {});

// Wigner function of a single-bosonic-factor state via displaced parity,
// convention x = (a + a^dag)/sqrt(2). Rows index x, columns index p.
Eigen::MatrixXd wigner(const QuantumState& rho, const std::vector<double>& x_grid,
                       const std::vector<double>& p_grid);

// Time average of the total excited-state population from a full-model run.
double excited_population_avg(const Trajectory& traj, const SystemParams& params,
                              double tau);

}  // namespace catpulse
