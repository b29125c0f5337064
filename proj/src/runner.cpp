#include "catpulse/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "catpulse/analytics.hpp"
#include "catpulse/optimizer.hpp"
#include "catpulse/states.hpp"

namespace catpulse {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

// Index-strided worker pool; results must be written to pre-sized slots so the
// output is independent of the schedule.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Envelope make_envelope(const RunConfig& cfg, double kappa) {
  if (!cfg.pulse.envelope_file.empty())
    return Envelope::from_file(cfg.pulse.envelope_file);
  const double tau = cfg.pulse.kappa_tau / kappa;
  return Envelope::gaussian(tau, cfg.pulse.t0_over_tau * tau,
                            cfg.pulse.window_over_tau * tau, cfg.pulse.grid);
}

ObjectiveNumerics objective_numerics(const RunConfig& cfg) {
  ObjectiveNumerics num;
  num.n_cavity = cfg.numeric.n_cavity;
  num.n_virtual = cfg.numeric.n_virtual;
  num.rtol = cfg.numeric.rtol;
  num.atol = cfg.numeric.atol;
  return num;
}

json diagnostics_json(const IntegratorDiagnostics& d) {
  return json{{"steps", d.steps},
              {"rejected", d.rejected},
              {"max_local_error", d.max_local_error},
              {"max_trace_drift", d.max_trace_drift}};
}

json record_skeleton(const RunConfig& cfg) {
  json rec;
  rec["version"] = kLibraryVersion;
  rec["experiment"] = cfg.experiment;
  rec["unit"] = cfg.unit;
  return rec;
}

void finish_record(json& rec, const RunConfig& cfg, const std::string& out_dir) {
  rec["physics_warnings"] = cfg.physics_warnings();
  rec["config_echo"] = cfg.raw_text;
  write_file(out_dir + "/record.json", rec.dump(2) + "\n");
}

std::string trajectory_csv(const Trajectory& traj, const SystemParams& params) {
  const SpaceLayout& layout = traj.layout;
  std::vector<Operator> obs;
  std::vector<std::string> names;
  if (layout.has(kCavityLabel)) {
    obs.push_back(embed(number_op(layout.dim_of(kCavityLabel)), layout,
                        kCavityLabel));
    names.push_back("n_cavity");
  }
  if (layout.has(kVirtualLabel)) {
    obs.push_back(embed(number_op(layout.dim_of(kVirtualLabel)), layout,
                        kVirtualLabel));
    names.push_back("n_virtual");
  }
  for (int i = 0; i < params.n_emitters; ++i) {
    const std::string label = emitter_label(i);
    const int d = layout.dim_of(label);
    Matrix sx = Matrix::Zero(d, d);
    sx(0, 1) = sx(1, 0) = 1.0;  // sigma_x on the {down, up} block
    obs.push_back(embed(Operator(SpaceLayout({{label, d}}), sx), layout, label));
    names.push_back("sigma_x_" + std::to_string(i + 1));
  }

  std::string csv = "t";
  for (const auto& n : names) csv += "," + n;
  csv += ",trace\n";
  std::vector<std::vector<cplx>> cols;
  for (const auto& op : obs) cols.push_back(observable_trajectory(traj, op));
  for (size_t k = 0; k < traj.times.size(); ++k) {
    csv += num(traj.times[k]);
    for (const auto& col : cols) csv += "," + num(col[k].real());
    csv += "," + num(traj.trace_or_norm2[k]) + "\n";
  }
  return csv;
}

int run_cat(const RunConfig& cfg, const std::string& out_dir,
            std::ostream& log) {
  const bool four = cfg.experiment == "four-cat";
  SystemParams params = cfg.system;
  Envelope env = make_envelope(cfg, params.kappa());

  PulsePlan plan{env, {}};
  if (four) {
    auto [a1, a2] = four_cat_amplitudes(cfg.pulse.alpha);
    plan.alphas = {a1, a2};
  } else {
    plan.alphas = {cfg.pulse.alpha};
  }

  ObjectiveNumerics onum = objective_numerics(cfg);
  onum.save_points = cfg.numeric.save_points;
  double prob = 1.0;
  Trajectory traj;
  const double f =
      simulate_fidelity(params, plan, four ? CatVariant::FourCat
                                           : CatVariant::TwoCat,
                        onum, &prob, &traj);
  log << (four ? "four-cat" : "single-cat") << ": fidelity " << f;
  if (four) log << ", postselection probability " << prob;
  log << "\n";

  DriveWaveform drive = drive_lambda(env, plan.alphas[0], params.omega0(),
                                     params.kappa(), params.kappa_ex,
                                     params.n_emitters);
  AnalyticReport rep;
  try {
    rep = analytic_report(params, cfg.pulse.alpha, drive.lambda, env.window(),
                          four ? CatVariant::FourCat : CatVariant::TwoCat);
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("analytic report unavailable: ") +
                           e.what());
  }

  const QuantumState& rho = traj.final_state();
  const double tail_c = tail_population(rho, kCavityLabel);
  const double tail_v = tail_population(rho, kVirtualLabel);

  write_file(out_dir + "/trajectory.csv", trajectory_csv(traj, params));

  json rec = record_skeleton(cfg);
  json res;
  res["fidelity"] = f;
  if (four) res["postselection_probability"] = prob;
  res["f_min"] = rep.f_min;
  res["mode_match"] = rep.mode_match;
  res["cooperativity"] = rep.cooperativity;
  if (params.kappa_in > 0.0) {
    res["internal_cooperativity"] = rep.internal_cooperativity;
    res["kappa_ex_opt"] = rep.kappa_ex_opt;
  }
  res["tau_c"] = rep.tau_c;
  res["p_decay"] = rep.p_decay;
  res["tail_population_cavity"] = tail_c;
  res["tail_population_virtual"] = tail_v;
  rec["results"] = res;
  rec["analytic_warnings"] = rep.warnings;
  rec["diagnostics"] = diagnostics_json(traj.diag);
  finish_record(rec, cfg, out_dir);

  if (tail_c > cfg.numeric.tail_tol || tail_v > cfg.numeric.tail_tol) {
    log << "truncation tail exceeds tail_tol (cavity " << tail_c << ", virtual "
        << tail_v << ")\n";
    return 3;
  }
  return 0;
}

int run_pe_map(const RunConfig& cfg, const std::string& out_dir, int threads,
               std::ostream& log) {
  const auto& pm = cfg.pe_map;
  const int nk = static_cast<int>(pm.kappa_over_g.size());
  const int nt = static_cast<int>(pm.kappa_tau.size());
  struct Cell {
    double pe = 0.0, estimate = 0.0, tail = 0.0, trace_drift = 0.0;
  };
  std::vector<Cell> cells(nk * nt);

  const double ex_frac = cfg.system.kappa_ex / cfg.system.kappa();
  parallel_for(nk * nt, threads, [&](int idx) {
    const double kappa = pm.kappa_over_g[idx / nt] * cfg.system.g;
    const double ktau = pm.kappa_tau[idx % nt];
    SystemParams p = cfg.system;
    p.kappa_ex = ex_frac * kappa;
    p.kappa_in = kappa - p.kappa_ex;
    const double tau = ktau / kappa;
    Envelope env = Envelope::gaussian(tau, cfg.pulse.t0_over_tau * tau,
                                      cfg.pulse.window_over_tau * tau,
                                      cfg.pulse.grid);
    std::vector<DriveWaveform> drives;
    for (int i = 0; i < p.n_emitters; ++i)
      drives.push_back(drive_lambda(env, cfg.pulse.alpha, p.omega0(), kappa,
                                    p.kappa_ex, p.n_emitters));
    auto model = build_full_model(p, drives, pm.n_cavity);

    Vector psi0 = basis_vector(4, 0);
    for (int i = 1; i < p.n_emitters; ++i) {
      Vector next(psi0.size() * 4);
      for (int j = 0; j < psi0.size(); ++j)
        next.segment(j * 4, 4) = psi0(j) * basis_vector(4, 0);
      psi0 = next;
    }
    Vector full(psi0.size() * pm.n_cavity);
    for (int j = 0; j < psi0.size(); ++j)
      full.segment(j * pm.n_cavity, pm.n_cavity) =
          psi0(j) * basis_vector(pm.n_cavity, 0);

    IntegratorOptions opts;
    opts.rtol = cfg.numeric.rtol;
    opts.atol = cfg.numeric.atol;
    opts.save_points = cfg.numeric.save_points;
    auto traj = integrate_master(model, QuantumState::pure(model.layout, full),
                                 0.0, env.window(), opts);
    Cell c;
    c.pe = excited_population_avg(traj, p, tau);
    c.estimate = pe_estimate(std::abs(cfg.pulse.alpha), p, tau);
    c.tail = tail_population(traj.final_state(), kCavityLabel);
    c.trace_drift = traj.diag.max_trace_drift;
    cells[idx] = c;
  });

  std::string csv = "kappa_over_g,kappa_tau,pe_avg,pe_estimate\n";
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nt; ++j) {
      const Cell& c = cells[i * nt + j];
      csv += num(pm.kappa_over_g[i]) + "," + num(pm.kappa_tau[j]) + "," +
             num(c.pe) + "," + num(c.estimate) + "\n";
      log << "pe-map kappa/g=" << pm.kappa_over_g[i] << " kappa*tau="
          << pm.kappa_tau[j] << ": pe " << c.pe << " (estimate " << c.estimate
          << ")\n";
    }
  write_file(out_dir + "/pe_map.csv", csv);

  double max_tail = 0.0, max_drift = 0.0;
  for (const Cell& c : cells) {
    max_tail = std::max(max_tail, c.tail);
    max_drift = std::max(max_drift, c.trace_drift);
  }
  json rec = record_skeleton(cfg);
  rec["results"] = json{{"cells", nk * nt},
                        {"max_tail_population", max_tail},
                        {"max_trace_drift", max_drift}};
  finish_record(rec, cfg, out_dir);
  if (max_tail > cfg.numeric.tail_tol) {
    log << "truncation tail exceeds tail_tol (" << max_tail << ")\n";
    return 3;
  }
  return 0;
}

int run_kex_sweep(const RunConfig& cfg, const std::string& out_dir, int threads,
                  std::ostream& log) {
  const auto& sw = cfg.sweep;
  const bool four = sw.variant == "four-cat";
  const CatVariant variant = four ? CatVariant::FourCat : CatVariant::TwoCat;
  const int n = static_cast<int>(sw.kappa_in_values.size());
  std::vector<SweepResult> results(n);
  std::vector<double> candidates(n);

  parallel_for(n, threads, [&](int i) {
    SystemParams p = cfg.system;
    p.kappa_in = sw.kappa_in_values[i];
    p.kappa_ex = 0.0;  // overwritten per objective evaluation
    SystemParams probe = p;
    probe.kappa_ex = p.kappa_in;  // any positive value; candidate needs kappa_in
    const double candidate = optimal_kappa_ex(probe, variant);
    candidates[i] = candidate;

    // Freeze the pulse at the candidate total kappa so every objective
    // evaluation shares one target mode.
    SystemParams at_candidate = p;
    at_candidate.kappa_ex = candidate;
    Envelope env = make_envelope(cfg, at_candidate.kappa());
    PulsePlan plan{env, {}};
    if (four) {
      auto [a1, a2] = four_cat_amplitudes(cfg.pulse.alpha);
      plan.alphas = {a1, a2};
    } else {
      plan.alphas = {cfg.pulse.alpha};
    }
    auto objective = fidelity_objective(p, plan, variant,
                                        objective_numerics(cfg));
    SweepResult r = maximize_over_kappa_ex(
        objective, sw.bracket_lo * p.kappa_in, sw.bracket_hi * p.kappa_in,
        sw.rel_tol);
    r.analytic_candidate = candidate;
    r.ratio = r.best_kappa_ex / candidate;
    results[i] = std::move(r);
  });

  std::string csv =
      "kappa_in,best_kappa_ex,best_fidelity,analytic_candidate,ratio\n";
  std::string samples = "kappa_in,kappa_ex,fidelity\n";
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    const SweepResult& r = results[i];
    csv += num(sw.kappa_in_values[i]) + "," + num(r.best_kappa_ex) + "," +
           num(r.best_fidelity) + "," + num(r.analytic_candidate) + "," +
           num(r.ratio) + "\n";
    for (size_t k = 0; k < r.kappa_ex_samples.size(); ++k)
      samples += num(sw.kappa_in_values[i]) + "," +
                 num(r.kappa_ex_samples[k]) + "," +
                 num(r.fidelity_samples[k]) + "\n";
    rows.push_back(json{{"kappa_in", sw.kappa_in_values[i]},
                        {"best_kappa_ex", r.best_kappa_ex},
                        {"best_fidelity", r.best_fidelity},
                        {"analytic_candidate", r.analytic_candidate},
                        {"ratio", r.ratio},
                        {"warnings", r.warnings}});
    log << "kex-sweep kappa_in=" << sw.kappa_in_values[i] << ": best kappa_ex "
        << r.best_kappa_ex << " (candidate " << r.analytic_candidate
        << ", fidelity " << r.best_fidelity << ")\n";
  }
  write_file(out_dir + "/kex_sweep.csv", csv);
  write_file(out_dir + "/kex_samples.csv", samples);

  json rec = record_skeleton(cfg);
  rec["results"] = rows;
  finish_record(rec, cfg, out_dir);
  return 0;
}

int run_wigner(const RunConfig& cfg, const std::string& out_dir,
               std::ostream& log) {
  const bool four = cfg.wigner.variant == "four-cat";
  SystemParams params = cfg.system;
  Envelope env = make_envelope(cfg, params.kappa());
  PulsePlan plan{env, {}};
  if (four) {
    auto [a1, a2] = four_cat_amplitudes(cfg.pulse.alpha);
    plan.alphas = {a1, a2};
  } else {
    plan.alphas = {cfg.pulse.alpha};
  }

  ObjectiveNumerics onum = objective_numerics(cfg);
  double prob = 1.0;
  Trajectory traj;
  const double f = simulate_fidelity(
      params, plan, four ? CatVariant::FourCat : CatVariant::TwoCat, onum,
      &prob, &traj);
  const QuantumState& rho = traj.final_state();

  // Condition all emitters on |down> and keep only the propagating mode.
  Matrix pdown = Matrix::Zero(2, 2);
  pdown(0, 0) = 1.0;
  Operator proj = identity(rho.layout);
  std::vector<std::string> emitters;
  for (int i = 0; i < params.n_emitters; ++i) {
    proj = proj * embed(Operator(SpaceLayout({{"s", 2}}), pdown), rho.layout,
                        emitter_label(i));
    emitters.push_back(emitter_label(i));
  }
  auto [cond, p_down] = postselect(rho, proj, emitters);
  QuantumState mode = partial_trace(cond, {kVirtualLabel});

  std::vector<double> xs(cfg.wigner.points), ps(cfg.wigner.points);
  for (int i = 0; i < cfg.wigner.points; ++i) {
    const double s = i / double(cfg.wigner.points - 1);
    xs[i] = cfg.wigner.x_min + s * (cfg.wigner.x_max - cfg.wigner.x_min);
    ps[i] = cfg.wigner.p_min + s * (cfg.wigner.p_max - cfg.wigner.p_min);
  }
  Eigen::MatrixXd w = wigner(mode, xs, ps);

  std::string csv = "x,p,w\n";
  double w_min = 0.0;
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) {
      csv += num(xs[i]) + "," + num(ps[j]) + "," + num(w(i, j)) + "\n";
      w_min = std::min(w_min, w(i, j));
    }
  write_file(out_dir + "/wigner.csv", csv);
  log << "wigner: fidelity " << f << ", conditional probability " << p_down
      << ", min W " << w_min << "\n";

  json rec = record_skeleton(cfg);
  rec["results"] = json{{"fidelity", f},
                        {"conditional_probability", p_down},
                        {"min_wigner", w_min},
                        {"points", cfg.wigner.points}};
  rec["diagnostics"] = diagnostics_json(traj.diag);
  finish_record(rec, cfg, out_dir);
  return 0;
}

}  // namespace

int run_experiment(const RunConfig& cfg, const std::string& out_dir,
                   int threads, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  try {
    if (cfg.experiment == "single-cat" || cfg.experiment == "four-cat")
      return run_cat(cfg, out_dir, log);
    if (cfg.experiment == "pe-map") return run_pe_map(cfg, out_dir, threads, log);
    if (cfg.experiment == "kex-sweep")
      return run_kex_sweep(cfg, out_dir, threads, log);
    if (cfg.experiment == "wigner") return run_wigner(cfg, out_dir, log);
    throw ConfigError("unknown experiment: " + cfg.experiment);
  } catch (const ConfigError&) {
    throw;  // caller maps to exit code 2
  } catch (const Error& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

int validate_config(const RunConfig& cfg, std::ostream& log) {
  log << "experiment: " << cfg.experiment << " (rates per " << cfg.unit
      << ")\n";
  const SystemParams& p = cfg.system;
  log << "kappa = " << p.kappa() << ", omega0 = " << p.omega0()
      << ", C = " << p.cooperativity() << ", tau_c = " << tau_c(p) << "\n";
  if (p.kappa_in > 0.0 && p.gamma > 0.0)
    log << "C_in = " << p.internal_cooperativity() << ", kappa_ex_opt = "
        << optimal_kappa_ex(p, cfg.experiment == "four-cat"
                                   ? CatVariant::FourCat
                                   : CatVariant::TwoCat)
        << "\n";
  auto warnings = cfg.physics_warnings();
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  if (warnings.empty()) log << "no warnings\n";
  return 0;
}

}  // namespace catpulse
