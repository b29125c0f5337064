#include "catpulse/states.hpp"

#include <cmath>

namespace catpulse {

namespace {

double poisson_tail_term(double nbar, int dim) {
  // Occupation of the first truncated level, e^{-|a|^2} |a|^{2 dim} / dim!.
  double logp = -nbar + dim * std::log(std::max(nbar, 1e-300)) - std::lgamma(dim + 1.0);
  return std::exp(logp);
}

}  // namespace

QuantumState coherent(int dim, cplx alpha) {
  if (dim < 1) throw DimensionError("coherent: dim must be >= 1");
  const double nbar = std::norm(alpha);
  if (poisson_tail_term(nbar, dim) > numeric_policy().coherent_tail_tol)
    throw TruncationError("coherent: truncation tail too large for dim " +
                          std::to_string(dim));
  Vector v(dim);
  cplx amp = 1.0;
  double logfact = 0.0;
  for (int n = 0; n < dim; ++n) {
    if (n > 0) {
      amp *= alpha;
      logfact += 0.5 * std::log(double(n));
    }
    v(n) = amp * std::exp(-0.5 * nbar - logfact);
  }
  v /= v.norm();
  return QuantumState::pure(SpaceLayout({{"mode", dim}}), v);
}

QuantumState cat_state(const CatSpec& spec) {
  if (spec.components != 2 && spec.components != 4)
    throw ValidationError("cat_state: components must be 2 or 4");
  const int d = spec.fock_dim;
  Vector v = Vector::Zero(d);
  if (spec.components == 2) {
    const double sign = (spec.parity == CatParity::Even) ? 1.0 : -1.0;
    if (spec.parity == CatParity::Odd && std::abs(spec.amplitude) == 0.0)
      throw ValidationError("cat_state: odd cat with zero amplitude is degenerate");
    v = coherent(d, spec.amplitude).vector() +
        sign * coherent(d, -spec.amplitude).vector();
  } else {
    for (cplx phase : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)})
      v += coherent(d, phase * spec.amplitude).vector();
  }
  const double n = v.norm();
  if (n < 1e-14) throw ValidationError("cat_state: degenerate superposition");
  v /= n;
  return QuantumState::pure(SpaceLayout({{"mode", d}}), v);
}

double fidelity(const QuantumState& rho, const QuantumState& target) {
  if (rho.layout != target.layout) throw LayoutError("fidelity: layout mismatch");
  if (target.kind != StateKind::Pure)
    throw ValidationError("fidelity: target must be pure");
  const Vector t = target.vector();
  if (std::abs(t.norm() - 1.0) > 1e-8)
    throw ValidationError("fidelity: target must be normalized");
  double f;
  if (rho.kind == StateKind::Pure) {
    f = std::norm(t.dot(rho.vector()));
  } else {
    f = (t.adjoint() * rho.data * t)(0, 0).real();
  }
  return std::max(f, 0.0);
}

std::pair<QuantumState, double> postselect(
    const QuantumState& rho, const Operator& projector,
    const std::vector<std::string>& reduce_over) {
  if (projector.layout != rho.layout)
    throw LayoutError("postselect: projector layout mismatch");
  const Matrix& p = projector.matrix;
  if ((p * p - p).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("postselect: projector is not idempotent");

  Matrix projected = p * rho.density_matrix() * p.adjoint();
  const double prob = projected.trace().real();
  if (prob < 1e-12) throw ValidationError("postselect: outcome probability is zero");
  projected /= prob;
  QuantumState out = QuantumState::density(rho.layout, std::move(projected));
  if (!reduce_over.empty()) {
    std::vector<std::string> keep;
    for (const auto& f : rho.layout.factors())
      if (std::find(reduce_over.begin(), reduce_over.end(), f.label) ==
          reduce_over.end())
        keep.push_back(f.label);
    out = partial_trace(out, keep);
  }
  return {std::move(out), prob};
}

Eigen::MatrixXd wigner(const QuantumState& state, const std::vector<double>& x_grid,
                       const std::vector<double>& p_grid) {
  if (state.layout.num_factors() != 1)
    throw LayoutError("wigner: state must be reduced to one bosonic factor");
  const int d = state.layout.total_dim();
  const Matrix rho = state.density_matrix();

  // Nyquist-style check: fringes of a state with support up to Fock level d
  // oscillate on a scale ~ pi / sqrt(2 d).
  double max_spacing = 0.0;
  for (size_t i = 1; i < x_grid.size(); ++i)
    max_spacing = std::max(max_spacing, x_grid[i] - x_grid[i - 1]);
  for (size_t i = 1; i < p_grid.size(); ++i)
    max_spacing = std::max(max_spacing, p_grid[i] - p_grid[i - 1]);
  if (max_spacing > M_PI / (2.0 * std::sqrt(2.0 * d)))
    throw ValidationError("wigner: grid too coarse for the state amplitude");

  const Matrix a = destroy(d).matrix;
  const Matrix adag = a.adjoint();
  Vector parity(d);
  for (int n = 0; n < d; ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;

  Eigen::MatrixXd w(x_grid.size(), p_grid.size());
  Matrix herm(d, d), dop(d, d), m(d, d);
  for (size_t ix = 0; ix < x_grid.size(); ++ix) {
    for (size_t ip = 0; ip < p_grid.size(); ++ip) {
      const cplx beta = cplx(x_grid[ix], p_grid[ip]) / std::sqrt(2.0);
      herm = I * (beta * adag - std::conj(beta) * a);
      Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
      Vector phases = (-I * es.eigenvalues().cast<cplx>().array()).exp();
      dop.noalias() = es.eigenvectors() * phases.asDiagonal() *
                      es.eigenvectors().adjoint();
      m.noalias() = (dop * parity.asDiagonal()) * dop.adjoint();
      // 1/pi (not 2/pi): the quadrature measure is dx dp = 2 d^2 beta.
      w(ix, ip) = (1.0 / M_PI) * (rho.transpose().cwiseProduct(m)).sum().real();
    }
  }
  return w;
}

double excited_population_avg(const Trajectory& traj, const SystemParams& params,
                              double tau) {
  if (traj.states.empty())
    throw ValidationError("excited_population_avg: trajectory has no stored states");
  Matrix pe = Matrix::Zero(4, 4);
  pe(2, 2) = 1.0;
  pe(3, 3) = 1.0;
  Matrix total = Matrix::Zero(traj.layout.total_dim(), traj.layout.total_dim());
  int emitters = 0;
  for (const auto& f : traj.layout.factors()) {
    if (f.label.rfind("emitter", 0) != 0) continue;
    if (f.dim != 4)
      throw ValidationError(
          "excited_population_avg: needs a full-model trajectory (emitter dim 4)");
    total += embed(Operator(SpaceLayout({{"s", 4}}), pe), traj.layout, f.label).matrix;
    ++emitters;
  }
  if (emitters == 0)
    throw ValidationError("excited_population_avg: no emitter factors in layout");
  Operator op(traj.layout, std::move(total));
  auto values = observable_trajectory(traj, op);
  double integral = 0.0;
  for (size_t i = 1; i < values.size(); ++i)
    integral += 0.5 * (values[i].real() + values[i - 1].real()) *
                (traj.times[i] - traj.times[i - 1]);
  (void)params;
  return integral / tau;
}

}  // namespace catpulse
