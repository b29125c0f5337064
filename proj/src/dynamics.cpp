#include "catpulse/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>

namespace catpulse {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

SpMat to_sparse(const Matrix& m) {
  return m.sparseView(1.0, 1e-300);
}

struct CompiledTerm {
  std::function<cplx(double)> coeff;
  SpMat mat;
};

struct CompiledJump {
  std::vector<CompiledTerm> terms;  // constant terms have null coeff
  std::vector<SpMat> adjoints;
};

// Sparse-compiled right-hand sides. The model's dense operators are converted
// once; the hot loop only does sparse*dense products.
class CompiledGenerator {
 public:
  explicit CompiledGenerator(const TimeDependentModel& model) {
    const int d = model.layout.total_dim();
    auto k = non_hermitian_hamiltonian(model);
    Matrix k0 = Matrix::Zero(d, d);
    for (const auto& term : k.terms) {
      if (term.coeff)
        k_terms_.push_back({term.coeff, to_sparse(term.mat)});
      else
        k0 += term.mat;
    }
    k0_ = to_sparse(k0);

    for (const auto& jump : model.jumps) {
      CompiledJump cj;
      for (const auto& term : jump.op.terms) {
        cj.terms.push_back({term.coeff, to_sparse(term.mat)});
        cj.adjoints.push_back(to_sparse(term.mat.adjoint().eval()));
      }
      jumps_.push_back(std::move(cj));
    }
    scratch_z_.resize(d, d);
    scratch_t_.resize(d, d);
    scratch_y_.resize(d, d);
  }

  // Assumes rho Hermitian; the output is Hermitian by construction.
  void master_rhs(double t, const Matrix& rho, Matrix& out) {
    scratch_z_.noalias() = k0_ * rho;
    for (const auto& term : k_terms_) {
      scratch_t_.noalias() = term.mat * rho;
      scratch_z_ += term.coeff(t) * scratch_t_;
    }
    out.noalias() = (-I) * scratch_z_;
    out += out.adjoint().eval();

    for (const auto& jump : jumps_) {
      // Y = L(t) rho, then out += Y L(t)^dag.
      const size_t n = jump.terms.size();
      for (size_t a = 0; a < n; ++a) {
        scratch_t_.noalias() = jump.terms[a].mat * rho;
        cplx ca = jump.terms[a].coeff ? jump.terms[a].coeff(t) : cplx(1.0);
        if (a == 0)
          scratch_y_.noalias() = ca * scratch_t_;
        else
          scratch_y_ += ca * scratch_t_;
      }
      for (size_t b = 0; b < n; ++b) {
        scratch_t_.noalias() = scratch_y_ * jump.adjoints[b];
        cplx cb = jump.terms[b].coeff ? std::conj(jump.terms[b].coeff(t)) : cplx(1.0);
        out += cb * scratch_t_;
      }
    }
  }

  void no_jump_rhs(double t, const Matrix& psi, Matrix& out) {
    Matrix& z = scratch_z_;
    z.noalias() = k0_ * psi;
    for (const auto& term : k_terms_) z.noalias() += term.coeff(t) * (term.mat * psi);
    out.noalias() = (-I) * z;
  }

 private:
  SpMat k0_;
  std::vector<CompiledTerm> k_terms_;
  std::vector<CompiledJump> jumps_;
  Matrix scratch_z_, scratch_t_, scratch_y_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Rhs = std::function<void(double, const Matrix&, Matrix&)>;

struct StepperState {
  Matrix y, ynew, err;
  Matrix k1, k2, k3, k4, k5, k6, k7, stage;
};

double error_norm(const Matrix& err, const Matrix& y, const Matrix& ynew,
                  double atol, double rtol) {
  double acc = 0.0;
  const auto* e = err.data();
  const auto* a = y.data();
  const auto* b = ynew.data();
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double scale = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    double r = std::abs(e[i]) / scale;
    acc += r * r;
  }
  return std::sqrt(acc / double(n));
}

Trajectory run_integration(const Rhs& rhs, const SpaceLayout& layout,
                           StateKind kind, const Matrix& y0, double t_begin,
                           double t_end, const IntegratorOptions& opts) {
  if (t_end <= t_begin) throw IntegrationError("integration window is empty");
  Trajectory traj;
  traj.kind = kind;
  traj.layout = layout;

  const int n_save = std::max(2, opts.save_points);
  std::vector<double> save_times(n_save);
  for (int i = 0; i < n_save; ++i)
    save_times[i] = t_begin + (t_end - t_begin) * double(i) / double(n_save - 1);

  StepperState s;
  s.y = y0;
  const auto dims = y0.rows();
  auto alloc = [&](Matrix& m) { m.resize(dims, y0.cols()); };
  alloc(s.ynew);
  alloc(s.err);
  alloc(s.k1);
  alloc(s.k2);
  alloc(s.k3);
  alloc(s.k4);
  alloc(s.k5);
  alloc(s.k6);
  alloc(s.k7);
  alloc(s.stage);

  auto record = [&](double t, const Matrix& y) {
    traj.times.push_back(t);
    double tn;
    if (kind == StateKind::Density) {
      tn = y.trace().real();
      if (opts.store_states)
        traj.states.push_back(QuantumState::density(layout, y));
    } else {
      tn = y.col(0).squaredNorm();
      if (opts.store_states)
        traj.states.push_back(QuantumState::pure(layout, y.col(0)));
    }
    traj.trace_or_norm2.push_back(tn);
  };

  const double trace0 = (kind == StateKind::Density) ? y0.trace().real()
                                                     : y0.col(0).squaredNorm();
  double t = t_begin;
  double h = (t_end - t_begin) * 1e-6;
  double err_prev = 1.0;
  int next_save = 0;
  bool fsal_valid = false;

  record(t, s.y);
  ++next_save;

  double last_norm2 = trace0;
  while (t < t_end - 1e-14 * (t_end - t_begin)) {
    if (traj.diag.steps + traj.diag.rejected > opts.max_steps)
      throw IntegrationError("integrator exceeded max_steps (stiffness?)");
    double h_clip = std::min(h, save_times[next_save] - t);
    h_clip = std::min(h_clip, t_end - t);
    if (h_clip < 1e-15 * (t_end - t_begin))
      throw IntegrationError("step-size underflow at t = " + std::to_string(t));

    if (!fsal_valid) rhs(t, s.y, s.k1);
    const double hs = h_clip;

    s.stage = s.y + hs * (a21 * s.k1);
    rhs(t + c2 * hs, s.stage, s.k2);
    s.stage = s.y + hs * (a31 * s.k1 + a32 * s.k2);
    rhs(t + c3 * hs, s.stage, s.k3);
    s.stage = s.y + hs * (a41 * s.k1 + a42 * s.k2 + a43 * s.k3);
    rhs(t + c4 * hs, s.stage, s.k4);
    s.stage = s.y + hs * (a51 * s.k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4);
    rhs(t + c5 * hs, s.stage, s.k5);
    s.stage = s.y + hs * (a61 * s.k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 +
                          a65 * s.k5);
    rhs(t + hs, s.stage, s.k6);
    s.ynew = s.y + hs * (b1 * s.k1 + b3 * s.k3 + b4 * s.k4 + b5 * s.k5 + b6 * s.k6);
    rhs(t + hs, s.ynew, s.k7);
    s.err = hs * (e1 * s.k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 +
                  e7 * s.k7);

    double err = error_norm(s.err, s.y, s.ynew, opts.atol, opts.rtol);
    if (kind == StateKind::Density) {
      // The generator conserves trace identically, so any per-step trace
      // change is pure integration error; fold it into the step test to
      // catch marginally unstable steps the embedded estimate dilutes away.
      double dtr = std::abs((s.ynew.trace() - s.y.trace()).real());
      err = std::max(err, dtr / (opts.atol + opts.rtol * std::abs(trace0)));
    }
    if (err <= 1.0) {
      t += hs;
      s.y.swap(s.ynew);
      if (kind == StateKind::Density) {
        // Sweep out roundoff in the anti-Hermitian sector before it can be
        // amplified; the exact flow keeps rho Hermitian.
        s.y = 0.5 * (s.y + s.y.adjoint().eval());
      }
      s.k1.swap(s.k7);
      fsal_valid = true;
      ++traj.diag.steps;
      traj.diag.max_local_error = std::max(traj.diag.max_local_error, err);

      if (kind == StateKind::Pure) {
        double n2 = s.y.col(0).squaredNorm();
        if (n2 > last_norm2 + 1e-9)
          traj.diag.max_trace_drift =
              std::max(traj.diag.max_trace_drift, n2 - last_norm2);
        last_norm2 = n2;
      }

      if (t >= save_times[next_save] - 1e-12 * (t_end - t_begin)) {
        record(save_times[next_save], s.y);
        if (kind == StateKind::Density)
          traj.diag.max_trace_drift =
              std::max(traj.diag.max_trace_drift,
                       std::abs(traj.trace_or_norm2.back() - trace0));
        ++next_save;
        if (next_save >= n_save) break;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                   std::pow(err_prev, 0.4 / 5.0);
      err_prev = std::max(err, 1e-10);
      h = hs * std::clamp(fac, 0.2, 10.0);
    } else {
      ++traj.diag.rejected;
      fsal_valid = false;
      h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }
  return traj;
}

}  // namespace

const QuantumState& Trajectory::final_state() const {
  if (states.empty())
    throw ValidationError("trajectory did not store states");
  return states.back();
}

Trajectory integrate_master(const TimeDependentModel& model,
                            const QuantumState& rho0, double t_begin,
                            double t_end, const IntegratorOptions& opts) {
  if (rho0.layout != model.layout)
    throw LayoutError("integrate_master: state layout does not match model");
  Matrix y0 = rho0.density_matrix();
  y0 = 0.5 * (y0 + y0.adjoint().eval());  // the RHS preserves Hermiticity
  auto gen = std::make_shared<CompiledGenerator>(model);
  Rhs rhs = [gen](double t, const Matrix& y, Matrix& out) {
    gen->master_rhs(t, y, out);
  };
  return run_integration(rhs, model.layout, StateKind::Density, y0, t_begin,
                         t_end, opts);
}

Trajectory integrate_no_jump(const TimeDependentModel& model,
                             const QuantumState& psi0, double t_begin,
                             double t_end, const IntegratorOptions& opts) {
  if (psi0.layout != model.layout)
    throw LayoutError("integrate_no_jump: state layout does not match model");
  if (psi0.kind != StateKind::Pure)
    throw ValidationError("integrate_no_jump: initial state must be pure");
  auto gen = std::make_shared<CompiledGenerator>(model);
  Rhs rhs = [gen](double t, const Matrix& y, Matrix& out) {
    gen->no_jump_rhs(t, y, out);
  };
  return run_integration(rhs, model.layout, StateKind::Pure, psi0.data, t_begin,
                         t_end, opts);
}

std::vector<cplx> observable_trajectory(const Trajectory& traj,
                                        const Operator& op) {
  if (op.layout != traj.layout)
    throw LayoutError("observable_trajectory: layout mismatch");
  if (traj.states.empty())
    throw ValidationError("observable_trajectory: trajectory has no stored states");
  std::vector<cplx> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back(expectation(op, s));
  return out;
}

}  // namespace catpulse
