#include "catpulse/model.hpp"

#include <cmath>

namespace catpulse {

namespace {

// Emitter basis: 0 = down, 1 = up, 2 = e1, 3 = e2 (full model keeps all four,
// the effective model keeps the first two).
Matrix ketbra(int dim, int a, int b) {
  Matrix m = Matrix::Zero(dim, dim);
  m(a, b) = 1.0;
  return m;
}

void check_hermitian(const TimeDependentModel& model) {
  const double T = model.t_end > 0.0 ? model.t_end : 1.0;
  for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    Matrix h = model.hamiltonian.at(f * T);
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() >
        numeric_policy().hermiticity_tol * std::max(1.0, h.cwiseAbs().maxCoeff()))
      throw ValidationError("model Hamiltonian is not Hermitian at t = " +
                            std::to_string(f * T));
  }
}

}  // namespace

void SystemParams::validate() const {
  if (g <= 0.0) throw ValidationError("params: g must be > 0");
  if (delta == 0.0) throw ValidationError("params: delta must be nonzero");
  if (gamma < 0.0 || kappa_ex < 0.0 || kappa_in < 0.0)
    throw ValidationError("params: rates must be >= 0");
  if (kappa() <= 0.0) throw ValidationError("params: kappa_ex + kappa_in must be > 0");
  if (r1 < 0.0 || r1 > 1.0 || r2 < 0.0 || r2 > 1.0)
    throw ValidationError("params: branching ratios must lie in [0, 1]");
  if (n_emitters < 1) throw ValidationError("params: n_emitters must be >= 1");
}

Matrix TimeDependentOperator::at(double t) const {
  Matrix out = Matrix::Zero(layout.total_dim(), layout.total_dim());
  for (const auto& term : terms) {
    if (term.coeff)
      out += term.coeff(t) * term.mat;
    else
      out += term.mat;
  }
  return out;
}

bool TimeDependentOperator::is_constant() const {
  for (const auto& term : terms)
    if (term.coeff) return false;
  return true;
}

std::string emitter_label(int i) { return "emitter" + std::to_string(i + 1); }

TimeDependentModel build_full_model(const SystemParams& params,
                                    const std::vector<DriveWaveform>& drives,
                                    int n_cavity) {
  params.validate();
  const int N = params.n_emitters;
  if (static_cast<int>(drives.size()) != N)
    throw ValidationError("build_full_model: need one drive per emitter");
  if (n_cavity < 2) throw DimensionError("build_full_model: n_cavity must be >= 2");

  std::vector<Factor> factors;
  for (int i = 0; i < N; ++i) factors.push_back({emitter_label(i), 4});
  factors.push_back({kCavityLabel, n_cavity});
  SpaceLayout layout(factors);

  const Matrix c = embed(destroy(n_cavity), layout, kCavityLabel).matrix;
  const double g = params.g, delta = params.delta;
  const double ge = params.gamma;

  TimeDependentModel model;
  model.layout = layout;
  model.hamiltonian.layout = layout;
  model.t_end = drives.empty() ? 0.0 : drives[0].t_end;

  Matrix h_const = Matrix::Zero(layout.total_dim(), layout.total_dim());
  for (int i = 0; i < N; ++i) {
    const auto site = emitter_label(i);
    auto emb = [&](const Matrix& m) {
      return embed(Operator(SpaceLayout({{"s", 4}}), m), layout, site).matrix;
    };
    h_const += (delta - params.delta_e / 2.0) * emb(ketbra(4, 2, 2));
    h_const += (delta + params.delta_e / 2.0 - params.delta_g) * emb(ketbra(4, 3, 3));
    // g (|e1><down| + |e2><up|) c + H.c.
    Matrix s_raise = emb(ketbra(4, 2, 0) + ketbra(4, 3, 1));
    Matrix gc = g * s_raise * c;
    h_const += gc + gc.adjoint();

    // Omega_i(t) (|e2><down| + |e1><up|) + H.c.
    Matrix d_raise = emb(ketbra(4, 3, 0) + ketbra(4, 2, 1));
    const DriveWaveform drive = drives[i];
    auto omega = [drive, g, delta](double t) { return drive.omega(t, g, delta); };
    model.hamiltonian.terms.push_back({d_raise, omega});
    model.hamiltonian.terms.push_back(
        {d_raise.adjoint(), [omega](double t) { return std::conj(omega(t)); }});

    // Atomic decays L2..L5.
    model.jumps.push_back(
        {"atomic-L2-" + site,
         {layout, {{std::sqrt(2.0 * params.r1 * ge) * emb(ketbra(4, 0, 2)), nullptr}}}});
    model.jumps.push_back(
        {"atomic-L3-" + site,
         {layout,
          {{std::sqrt(2.0 * (1.0 - params.r1) * ge) * emb(ketbra(4, 1, 2)), nullptr}}}});
    model.jumps.push_back(
        {"atomic-L4-" + site,
         {layout, {{std::sqrt(2.0 * params.r2 * ge) * emb(ketbra(4, 1, 3)), nullptr}}}});
    model.jumps.push_back(
        {"atomic-L5-" + site,
         {layout,
          {{std::sqrt(2.0 * (1.0 - params.r2) * ge) * emb(ketbra(4, 0, 3)), nullptr}}}});
  }
  model.hamiltonian.terms.push_back({std::move(h_const), nullptr});

  model.jumps.insert(model.jumps.begin(),
                     {"cavity-loss",
                      {layout, {{std::sqrt(2.0 * params.kappa()) * c, nullptr}}}});

  check_hermitian(model);
  return model;
}

TimeDependentModel build_effective_model(const SystemParams& params,
                                         const std::vector<DriveWaveform>& drives,
                                         bool include_cavity_in_jumps,
                                         int n_cavity) {
  params.validate();
  const int N = params.n_emitters;
  if (static_cast<int>(drives.size()) != N)
    throw ValidationError("build_effective_model: need one drive per emitter");
  if (n_cavity < 2)
    throw DimensionError("build_effective_model: n_cavity must be >= 2");

  std::vector<Factor> factors;
  for (int i = 0; i < N; ++i) factors.push_back({emitter_label(i), 2});
  factors.push_back({kCavityLabel, n_cavity});
  SpaceLayout layout(factors);

  const Matrix c = embed(destroy(n_cavity), layout, kCavityLabel).matrix;
  const Matrix cdag = c.adjoint();
  const double g = params.g, w0 = params.omega0(), ge = params.gamma;

  TimeDependentModel model;
  model.layout = layout;
  model.hamiltonian.layout = layout;
  model.t_end = drives.empty() ? 0.0 : drives[0].t_end;

  model.hamiltonian.terms.push_back({double(N) * w0 * (cdag * c), nullptr});

  for (int i = 0; i < N; ++i) {
    const auto site = emitter_label(i);
    auto emb = [&](const Matrix& m) {
      return embed(Operator(SpaceLayout({{"s", 2}}), m), layout, site).matrix;
    };
    const Matrix sx = emb(ketbra(2, 0, 1) + ketbra(2, 1, 0));
    const Matrix sm = emb(ketbra(2, 0, 1));  // |down><up|
    const Matrix sp = emb(ketbra(2, 1, 0));
    const Matrix pdown = emb(ketbra(2, 0, 0));
    const Matrix pup = emb(ketbra(2, 1, 1));

    const DriveWaveform drive = drives[i];
    auto lam = [drive](double t) { return drive.lambda(t); };
    auto lamc = [drive](double t) { return std::conj(drive.lambda(t)); };
    model.hamiltonian.terms.push_back({sx * cdag, lam});
    model.hamiltonian.terms.push_back({sx * c, lamc});

    // Effective atomic jumps; the c-proportional (omega0) parts are the
    // short-pulse corrections.
    struct Eff {
      const char* name;
      double rate;
      const Matrix* lam_op;
      const Matrix* w0_op;
    };
    const Matrix spc = sp * c, smc = sm * c, pdc = pdown * c, puc = pup * c;
    const Eff effs[] = {{"L2", 2.0 * params.r1 * ge, &sm, &pdc},
                        {"L3", 2.0 * (1.0 - params.r1) * ge, &pup, &spc},
                        {"L4", 2.0 * params.r2 * ge, &sp, &puc},
                        {"L5", 2.0 * (1.0 - params.r2) * ge, &pdown, &smc}};
    for (const auto& e : effs) {
      const double pref = -std::sqrt(e.rate) / g;
      TimeDependentOperator op{layout, {}};
      op.terms.push_back({pref * (*e.lam_op),
                          [lam, pref](double t) { return lam(t); }});
      if (include_cavity_in_jumps)
        op.terms.push_back({pref * w0 * (*e.w0_op), nullptr});
      model.jumps.push_back({std::string("atomic-eff-") + e.name + "-" + site,
                             std::move(op)});
    }
  }

  model.jumps.insert(model.jumps.begin(),
                     {"cavity-loss",
                      {layout, {{std::sqrt(2.0 * params.kappa()) * c, nullptr}}}});

  check_hermitian(model);
  return model;
}

TimeDependentModel attach_virtual_cavity(const TimeDependentModel& model,
                                         const SystemParams& params,
                                         const std::function<cplx(double)>& g_v,
                                         int n_virtual) {
  if (model.layout.has(kVirtualLabel))
    throw ValidationError("attach_virtual_cavity: model already has a virtual factor");
  if (n_virtual < 2)
    throw DimensionError("attach_virtual_cavity: n_virtual must be >= 2");

  SpaceLayout layout = model.layout.with_factor({kVirtualLabel, n_virtual});
  const Matrix iv = Matrix::Identity(n_virtual, n_virtual);
  auto lift = [&](const Matrix& m) { return kron(m, iv); };

  TimeDependentModel out;
  out.layout = layout;
  out.t_end = model.t_end;
  out.hamiltonian.layout = layout;
  for (const auto& term : model.hamiltonian.terms)
    out.hamiltonian.terms.push_back({lift(term.mat), term.coeff});

  const Matrix c = embed(destroy(model.layout.dim_of(kCavityLabel)), layout,
                         kCavityLabel)
                       .matrix;
  const Matrix av = embed(destroy(n_virtual), layout, kVirtualLabel).matrix;
  const double s2kex = std::sqrt(2.0 * params.kappa_ex);

  // Cascade term (i/2) sqrt(2 kex) [gv*(t) c^dag a_v - gv(t) c a_v^dag].
  out.hamiltonian.terms.push_back(
      {(I / 2.0) * s2kex * (c.adjoint() * av),
       [g_v](double t) { return std::conj(g_v(t)); }});
  out.hamiltonian.terms.push_back(
      {(-I / 2.0) * s2kex * (c * av.adjoint()), g_v});

  for (const auto& jump : model.jumps) {
    if (jump.label == "cavity-loss") {
      TimeDependentOperator l0{layout, {}};
      l0.terms.push_back({s2kex * c, nullptr});
      l0.terms.push_back({av, [g_v](double t) { return std::conj(g_v(t)); }});
      out.jumps.push_back({"external-collapse", std::move(l0)});
      out.jumps.push_back(
          {"internal-loss",
           {layout, {{std::sqrt(2.0 * params.kappa_in) * c, nullptr}}}});
    } else {
      TimeDependentOperator op{layout, {}};
      for (const auto& term : jump.op.terms)
        op.terms.push_back({lift(term.mat), term.coeff});
      out.jumps.push_back({jump.label, std::move(op)});
    }
  }
  return out;
}

TimeDependentOperator non_hermitian_hamiltonian(const TimeDependentModel& model) {
  TimeDependentOperator out = model.hamiltonian;
  for (const auto& jump : model.jumps) {
    for (const auto& ta : jump.op.terms) {
      for (const auto& tb : jump.op.terms) {
        Matrix m = (-I / 2.0) * (ta.mat.adjoint() * tb.mat);
        if (!ta.coeff && !tb.coeff) {
          out.terms.push_back({std::move(m), nullptr});
        } else {
          auto ca = ta.coeff, cb = tb.coeff;
          out.terms.push_back({std::move(m), [ca, cb](double t) {
                                 cplx a = ca ? std::conj(ca(t)) : cplx(1.0);
                                 cplx b = cb ? cb(t) : cplx(1.0);
                                 return a * b;
                               }});
        }
      }
    }
  }
  return out;
}

}  // namespace catpulse
