#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "catpulse/common.hpp"

namespace catpulse {

// Normalized temporal mode v(t) on the window [0, T].
// Gaussian envelopes evaluate in closed form; sampled envelopes interpolate
// linearly and differentiate by central differences on their grid.
class Envelope {
 public:
  enum class Kind { Gaussian, Sampled };

  static Envelope gaussian(double tau, double t0, double T, int grid = 2000);
  static Envelope from_samples(std::vector<double> t, std::vector<cplx> v);
  static Envelope from_file(const std::string& path);  // two-column text (t, v)

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  double t0() const { return t0_; }
  double window() const { return T_; }
  int grid() const { return grid_; }

  cplx value(double t) const;
  cplx derivative(double t) const;
  double cumulative_power(double t) const;  // int_0^t |v|^2

 private:
  Envelope() = default;
  void validate() const;

  Kind kind_ = Kind::Gaussian;
  double tau_ = 1.0, t0_ = 5.0, T_ = 10.0;
  int grid_ = 2000;
  // Sampled data (shared so Envelope copies stay cheap).
  struct Samples;
  std::shared_ptr<const Samples> samples_;
};

// Classical drive for one emitter: lambda(t) and the attached Rabi law
// Omega(t) = -lambda(t) * Delta / g.
struct DriveWaveform {
  cplx alpha = 0.0;
  double t_end = 0.0;  // envelope window, handy for self-checks downstream
  std::function<cplx(double)> lambda;

  cplx omega(double t, double g, double delta) const {
    return -lambda(t) * delta / g;
  }
};

// lambda_i(t) = (i alpha / sqrt(2 kappa_ex)) [vdot + (i N omega0 + kappa) v].
DriveWaveform drive_lambda(const Envelope& env, cplx alpha, double omega0,
                           double kappa, double kappa_ex, int n_emitters);

// Virtual-cavity input coupling g_v(t) = -v*(t)/sqrt(max(int|v|^2, eps)).
std::function<cplx(double)> virtual_coupling(const Envelope& env,
                                             double eps = 1e-12);

// Four-component-cat target amplitudes (alpha_1, alpha_2) for a given beta.
std::pair<cplx, cplx> four_cat_amplitudes(cplx beta);

// Target mode plus per-emitter amplitudes; drive waveforms are derived per
// kappa_ex at evaluation time since lambda depends on it.
struct PulsePlan {
  Envelope env;
  std::vector<cplx> alphas;
};

}  // namespace catpulse
