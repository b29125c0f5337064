#include "catpulse/analytics.hpp"

#include <cmath>

namespace catpulse {

double mode_match(const SystemParams& params) {
  if (params.kappa() <= 0.0) throw ValidationError("mode_match: kappa must be > 0");
  const double c2 = 2.0 * params.cooperativity();
  return (params.kappa_ex / params.kappa()) * c2 / (1.0 + c2);
}

double f_min(cplx alpha, double mode_match_value) {
  if (mode_match_value <= 0.0 || mode_match_value > 1.0)
    throw ValidationError("f_min: mode match must lie in (0, 1]");
  return std::exp(-(1.0 / mode_match_value - 1.0) * std::norm(alpha));
}

double optimal_kappa_ex(const SystemParams& params, CatVariant variant) {
  if (params.kappa_in <= 0.0)
    throw ValidationError("optimal_kappa_ex: unbounded optimum at kappa_in = 0");
  if (params.gamma <= 0.0)
    throw ValidationError("optimal_kappa_ex: gamma must be > 0");
  const double cin = params.internal_cooperativity();
  const double fac = (variant == CatVariant::TwoCat) ? 2.0 : 3.0;
  return params.kappa_in * std::sqrt(1.0 + fac * cin);
}

double tau_c(const SystemParams& params) {
  return std::max(1.0 / params.kappa(), params.kappa() / (params.g * params.g));
}

double decay_probability(const std::function<cplx(double)>& lambda,
                         const SystemParams& params, double T) {
  if (params.gamma == 0.0) return 0.0;
  // Composite Simpson on an even grid.
  const int n = 4000;
  const double h = T / n;
  double acc = std::norm(lambda(0.0)) + std::norm(lambda(T));
  for (int i = 1; i < n; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * std::norm(lambda(i * h));
  const double integral = acc * h / 3.0;
  return 1.0 - std::exp(-(2.0 * params.gamma / (params.g * params.g)) * integral);
}

double no_jump_prefactor(cplx alpha, const SystemParams& params) {
  return std::sqrt(f_min(alpha, mode_match(params)));
}

double pe_estimate(double alpha, const SystemParams& params, double tau) {
  const double k = params.kappa();
  const double kt = k * tau;
  return 0.5 * alpha * alpha * k * k /
         (params.g * params.g * params.kappa_ex * tau) *
         (1.0 + 1.0 / (2.0 * kt * kt));
}

AnalyticReport analytic_report(const SystemParams& params, cplx alpha,
                               const std::function<cplx(double)>& lambda,
                               double T, CatVariant variant) {
  AnalyticReport r;
  r.cooperativity = params.cooperativity();
  r.mode_match = mode_match(params);
  r.f_min = f_min(alpha, r.mode_match);
  r.tau_c = tau_c(params);
  if (params.kappa_in > 0.0) {
    r.internal_cooperativity = params.internal_cooperativity();
    if (params.gamma > 0.0) r.kappa_ex_opt = optimal_kappa_ex(params, variant);
  }
  if (lambda) r.p_decay = decay_probability(lambda, params, T);
  // The closed forms drop omega0 relative to kappa; surface when that degrades.
  const double w0_over_kappa =
      params.g * params.g / (params.kappa() * std::abs(params.delta));
  if (w0_over_kappa > 0.01)
    r.warnings.push_back(
        "analytic forms assume |omega0|/kappa ~ 0; here g^2/(kappa|Delta|) = " +
        std::to_string(w0_over_kappa));
  return r;
}

}  // namespace catpulse
