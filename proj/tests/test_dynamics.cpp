#include <doctest.h>

#include <cmath>

#include "catpulse/dynamics.hpp"

using namespace catpulse;

namespace {

TimeDependentModel damped_cavity(int dim, double kappa) {
  TimeDependentModel m;
  m.layout = SpaceLayout({{kCavityLabel, dim}});
  m.hamiltonian.layout = m.layout;
  m.jumps.push_back(
      {"cavity-loss",
       {m.layout, {{std::sqrt(2.0 * kappa) * destroy(dim).matrix, nullptr}}}});
  m.t_end = 1.0;
  return m;
}

}  // namespace

TEST_CASE("damped cavity decays at 2 kappa") {
  const double kappa = 0.8;
  const int dim = 8;
  auto model = damped_cavity(dim, kappa);
  Vector v = Vector::Zero(dim);
  v(3) = 1.0;  // |n=3>
  IntegratorOptions opts;
  opts.rtol = 1e-8;
  opts.atol = 1e-12;
  opts.save_points = 11;
  auto traj = integrate_master(model, QuantumState::pure(model.layout, v), 0.0,
                               2.0, opts);
  Operator n = number_op(dim);
  Operator nc(model.layout, n.matrix);
  auto ns = observable_trajectory(traj, nc);
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double expect = 3.0 * std::exp(-2.0 * kappa * traj.times[i]);
    CHECK(std::abs(ns[i].real() - expect) <
          10.0 * opts.rtol * 3.0 + 1e-12);
  }
  CHECK(traj.diag.max_trace_drift < 1e-8);
}

TEST_CASE("unitary Rabi oscillation") {
  TimeDependentModel m;
  m.layout = SpaceLayout({{"spin", 2}});
  m.hamiltonian.layout = m.layout;
  const double omega = 2.0;
  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  m.hamiltonian.terms.push_back({0.5 * omega * sx, nullptr});
  Vector up(2);
  up << 1.0, 0.0;
  IntegratorOptions opts;
  opts.save_points = 21;
  auto traj = integrate_master(m, QuantumState::pure(m.layout, up), 0.0, 5.0,
                               opts);
  Matrix pz = Matrix::Zero(2, 2);
  pz(0, 0) = 1.0;
  auto pop = observable_trajectory(traj, Operator(m.layout, pz));
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double expect = std::pow(std::cos(0.5 * omega * traj.times[i]), 2);
    CHECK(pop[i].real() == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("time-dependent coefficient drives the correct phase") {
  // H(t) = f(t) sz with f(t) = a cos(w t): starting from |+>, the coherence
  // acquires phase 2 int_0^t f, so <sx>(t) = cos(2 a sin(w t)/w).
  TimeDependentModel m;
  m.layout = SpaceLayout({{"spin", 2}});
  m.hamiltonian.layout = m.layout;
  const double a = 1.3, w = 2.7;
  Matrix sz = Matrix::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  m.hamiltonian.terms.push_back(
      {sz, [a, w](double t) { return cplx(a * std::cos(w * t), 0.0); }});
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  IntegratorOptions opts;
  opts.save_points = 17;
  auto traj = integrate_master(m, QuantumState::pure(m.layout, plus), 0.0, 3.0,
                               opts);
  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  auto vals = observable_trajectory(traj, Operator(m.layout, sx));
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double phase = 2.0 * a * std::sin(w * traj.times[i]) / w;
    CHECK(vals[i].real() == doctest::Approx(std::cos(phase)).epsilon(1e-6));
  }
}

TEST_CASE("no-jump norm matches the lossy survival probability") {
  const double kappa = 0.5;
  const int dim = 4;
  auto model = damped_cavity(dim, kappa);
  Vector v = Vector::Zero(dim);
  v(1) = 1.0;  // single photon: survival e^{-2 kappa t}
  auto traj = integrate_no_jump(model, QuantumState::pure(model.layout, v), 0.0,
                                2.0);
  CHECK(traj.kind == StateKind::Pure);
  for (size_t i = 0; i < traj.times.size(); ++i)
    CHECK(traj.trace_or_norm2[i] ==
          doctest::Approx(std::exp(-2.0 * kappa * traj.times[i])).epsilon(1e-6));
  // Norm must never grow.
  CHECK(traj.diag.max_trace_drift < 1e-9);
}

TEST_CASE("trajectory save grid is uniform and complete") {
  auto model = damped_cavity(3, 1.0);
  Vector v = Vector::Zero(3);
  v(0) = 1.0;
  IntegratorOptions opts;
  opts.save_points = 7;
  auto traj = integrate_master(model, QuantumState::pure(model.layout, v), 0.0,
                               1.4, opts);
  REQUIRE(traj.times.size() == 7);
  for (int i = 0; i < 7; ++i)
    CHECK(traj.times[i] == doctest::Approx(1.4 * i / 6.0));
  CHECK(traj.states.size() == 7);
}

TEST_CASE("final density state stays physical") {
  auto model = damped_cavity(6, 1.2);
  Vector v = Vector::Zero(6);
  v(4) = 1.0;
  auto traj = integrate_master(model, QuantumState::pure(model.layout, v), 0.0,
                               0.7);
  CHECK_NOTHROW(traj.final_state().validate());
  CHECK(traj.final_state().norm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("integration guards") {
  auto model = damped_cavity(3, 1.0);
  Vector v = Vector::Zero(3);
  v(0) = 1.0;
  QuantumState s = QuantumState::pure(model.layout, v);
  CHECK_THROWS_AS(integrate_master(model, s, 1.0, 1.0), IntegrationError);
  QuantumState wrong = QuantumState::pure(SpaceLayout({{"x", 2}}),
                                          basis_vector(2, 0));
  CHECK_THROWS_AS(integrate_master(model, wrong, 0.0, 1.0), LayoutError);
  IntegratorOptions tight;
  tight.max_steps = 3;
  CHECK_THROWS_AS(integrate_master(model, s, 0.0, 1.0, tight),
                  IntegrationError);
}

TEST_CASE("store_states=false keeps only scalars") {
  auto model = damped_cavity(3, 1.0);
  Vector v = Vector::Zero(3);
  v(1) = 1.0;
  IntegratorOptions opts;
  opts.store_states = false;
  auto traj = integrate_master(model, QuantumState::pure(model.layout, v), 0.0,
                               1.0, opts);
  CHECK(traj.states.empty());
  CHECK(traj.trace_or_norm2.size() == traj.times.size());
  CHECK_THROWS_AS((void)traj.final_state(), ValidationError);
}
