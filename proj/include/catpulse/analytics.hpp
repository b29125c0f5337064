#pragma once

#include <functional>
#include <string>
#include <vector>

#include "catpulse/model.hpp"

namespace catpulse {

enum class CatVariant { TwoCat, FourCat };

struct AnalyticReport {
  double cooperativity = 0.0;
  double internal_cooperativity = 0.0;
  double mode_match = 0.0;
  double f_min = 0.0;
  double kappa_ex_opt = 0.0;
  double tau_c = 0.0;
  double p_decay = 0.0;
  std::vector<std::string> warnings;
};

// M = (kappa_ex / kappa) * 2C / (1 + 2C).
double mode_match(const SystemParams& params);

// F_min = exp(-(1/M - 1) |alpha|^2).
double f_min(cplx alpha, double mode_match_value);

// kappa_in sqrt(1 + 2 C_in), or the empirical sqrt(1 + 3 C_in) four-cat fit.
double optimal_kappa_ex(const SystemParams& params, CatVariant variant);

// tau_c = max(1/kappa, kappa/g^2); pulses must be much longer than this.
double tau_c(const SystemParams& params);

// 1 - exp(-(2 gamma / g^2) int_0^T |lambda|^2 dt), by Simpson quadrature.
double decay_probability(const std::function<cplx(double)>& lambda,
                         const SystemParams& params, double T);

// Scalar amplitude prefactor exp(-(1/M - 1) |alpha|^2 / 2) of the no-jump state.
double no_jump_prefactor(cplx alpha, const SystemParams& params);

// Long-pulse Gaussian estimate of the time-averaged excited population.
double pe_estimate(double alpha, const SystemParams& params, double tau);

AnalyticReport analytic_report(const SystemParams& params, cplx alpha,
                               const std::function<cplx(double)>& lambda,
                               double T, CatVariant variant = CatVariant::TwoCat);

}  // namespace catpulse
