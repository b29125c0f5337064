#include "catpulse/pulses.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace catpulse {

struct Envelope::Samples {
  std::vector<double> t;
  std::vector<cplx> v;
  std::vector<cplx> dv;    // central differences, one-sided at endpoints
  std::vector<double> cum;  // trapezoidal cumulative of |v|^2
};

namespace {

// Linear interpolation on a uniform-ish grid.
template <typename T>
T interp(const std::vector<double>& xs, const std::vector<T>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  size_t i = static_cast<size_t>(it - xs.begin()) - 1;
  double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] * (1.0 - w) + ys[i + 1] * w;
}

}  // namespace

Envelope Envelope::gaussian(double tau, double t0, double T, int grid) {
  if (tau <= 0.0) throw ValidationError("gaussian envelope: tau must be > 0");
  if (grid < 200) throw ValidationError("gaussian envelope: grid must be >= 200");
  if (t0 < 4.0 * tau || T < t0 + 4.0 * tau)
    throw BoundaryError(
        "gaussian envelope window too tight: need t0 >= 4 tau and T >= t0 + 4 tau");
  Envelope e;
  e.kind_ = Kind::Gaussian;
  e.tau_ = tau;
  e.t0_ = t0;
  e.T_ = T;
  e.grid_ = grid;
  e.validate();
  return e;
}

Envelope Envelope::from_samples(std::vector<double> t, std::vector<cplx> v) {
  if (t.size() != v.size() || t.size() < 200)
    throw ValidationError("sampled envelope: need >= 200 matching samples");
  auto s = std::make_shared<Samples>();
  s->t = std::move(t);
  s->v = std::move(v);
  const size_t n = s->t.size();
  for (size_t i = 1; i < n; ++i)
    if (s->t[i] <= s->t[i - 1])
      throw ValidationError("sampled envelope: time grid must be increasing");
  s->dv.resize(n);
  s->dv[0] = (s->v[1] - s->v[0]) / (s->t[1] - s->t[0]);
  s->dv[n - 1] = (s->v[n - 1] - s->v[n - 2]) / (s->t[n - 1] - s->t[n - 2]);
  for (size_t i = 1; i + 1 < n; ++i)
    s->dv[i] = (s->v[i + 1] - s->v[i - 1]) / (s->t[i + 1] - s->t[i - 1]);
  s->cum.resize(n);
  s->cum[0] = 0.0;
  for (size_t i = 1; i < n; ++i)
    s->cum[i] = s->cum[i - 1] + 0.5 * (std::norm(s->v[i]) + std::norm(s->v[i - 1])) *
                                    (s->t[i] - s->t[i - 1]);

  Envelope e;
  e.kind_ = Kind::Sampled;
  e.T_ = s->t.back();
  e.grid_ = static_cast<int>(n);
  // Effective width/center from the |v|^2 distribution.
  double mean = 0.0, m2 = 0.0;
  for (size_t i = 1; i < n; ++i) {
    double w = 0.5 * (std::norm(s->v[i]) + std::norm(s->v[i - 1])) *
               (s->t[i] - s->t[i - 1]);
    double tm = 0.5 * (s->t[i] + s->t[i - 1]);
    mean += w * tm;
    m2 += w * tm * tm;
  }
  e.t0_ = mean;
  e.tau_ = std::sqrt(std::max(2.0 * (m2 - mean * mean), 1e-30));
  e.samples_ = std::move(s);
  e.validate();
  return e;
}

Envelope Envelope::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open envelope file: " + path);
  std::vector<double> t;
  std::vector<cplx> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double ti, vr, vi = 0.0;
    if (!(ss >> ti >> vr)) throw ValidationError("bad envelope line: " + line);
    ss >> vi;
    t.push_back(ti);
    v.push_back(cplx(vr, vi));
  }
  return from_samples(std::move(t), std::move(v));
}

void Envelope::validate() const {
  // Unit norm over the window.
  double total = cumulative_power(T_);
  if (std::abs(total - 1.0) > 1e-6)
    throw ValidationError("envelope is not unit-normalized on its window");
  // Boundary values must be negligible.
  double vmax = std::abs(value(t0_));
  if (kind_ == Kind::Sampled) {
    vmax = 0.0;
    for (const auto& x : samples_->v) vmax = std::max(vmax, std::abs(x));
  }
  // The 4-tau window guard admits boundary values down to e^{-8} ~ 3e-4 of
  // the peak, so "negligible" here means below 1e-3 of it.
  if (std::abs(value(0.0)) > 1e-3 * vmax || std::abs(value(T_)) > 1e-3 * vmax)
    throw BoundaryError("envelope boundary values are not negligible");
}

cplx Envelope::value(double t) const {
  if (kind_ == Kind::Gaussian) {
    const double x = (t - t0_) / tau_;
    return std::pow(M_PI, -0.25) / std::sqrt(tau_) * std::exp(-0.5 * x * x);
  }
  return interp(samples_->t, samples_->v, t);
}

cplx Envelope::derivative(double t) const {
  if (kind_ == Kind::Gaussian) {
    const double x = (t - t0_) / tau_;
    return -x / tau_ * value(t);
  }
  return interp(samples_->t, samples_->dv, t);
}

double Envelope::cumulative_power(double t) const {
  if (kind_ == Kind::Gaussian) {
    const double x = (t - t0_) / tau_;
    return 0.5 * (std::erf(x) + std::erf(t0_ / tau_));
  }
  return interp(samples_->t, samples_->cum, t);
}

DriveWaveform drive_lambda(const Envelope& env, cplx alpha, double omega0,
                           double kappa, double kappa_ex, int n_emitters) {
  if (kappa_ex <= 0.0) throw ValidationError("drive_lambda: kappa_ex must be > 0");
  const cplx pref = I * alpha / std::sqrt(2.0 * kappa_ex);
  const cplx rate = I * double(n_emitters) * omega0 + kappa;
  DriveWaveform w;
  w.alpha = alpha;
  w.t_end = env.window();
  w.lambda = [env, pref, rate](double t) {
    return pref * (env.derivative(t) + rate * env.value(t));
  };
  return w;
}

std::function<cplx(double)> virtual_coupling(const Envelope& env, double eps) {
  return [env, eps](double t) {
    const double absorbed = std::max(env.cumulative_power(t), eps);
    return -std::conj(env.value(t)) / std::sqrt(absorbed);
  };
}

std::pair<cplx, cplx> four_cat_amplitudes(cplx beta) {
  const cplx phase = std::exp(I * (M_PI / 4.0)) / std::sqrt(2.0);
  return {beta * phase, beta * std::conj(phase)};
}

}  // namespace catpulse
