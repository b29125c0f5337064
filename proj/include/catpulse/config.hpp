#pragma once

#include <map>
#include <string>
#include <vector>

#include "catpulse/model.hpp"

namespace catpulse {

inline const char* kLibraryVersion = "0.1.0";

struct PulseConfig {
  double kappa_tau = 50.0;      // tau in units of 1/kappa
  double t0_over_tau = 5.0;
  double window_over_tau = 10.0;
  int grid = 2000;
  cplx alpha{2.0, 0.0};         // target amplitude (beta for four-cat)
  std::string envelope_file;    // optional user-sampled mode
};

struct NumericConfig {
  double rtol = 1e-7;
  double atol = 1e-10;
  int n_cavity = 4;
  int n_virtual = 20;
  int save_points = 201;
  double tail_tol = 1e-6;
  double coherent_tail_tol = 1e-8;
};

struct SweepConfig {
  std::vector<double> kappa_in_values;  // same unit as [system] rates
  std::string variant = "two-cat";      // two-cat | four-cat
  double bracket_lo = 0.1;              // x kappa_in
  double bracket_hi = 1e4;              // x kappa_in
  double rel_tol = 0.15;
};

struct PeMapConfig {
  std::vector<double> kappa_over_g{1.0};
  std::vector<double> kappa_tau{3.0, 10.0, 30.0, 100.0};
  int n_cavity = 8;
};

struct WignerConfig {
  double x_min = -6.0, x_max = 6.0, p_min = -6.0, p_max = 6.0;
  int points = 121;
  std::string variant = "four-cat";  // single-cat | four-cat
};

struct RunConfig {
  std::string experiment;  // single-cat | four-cat | pe-map | kex-sweep | wigner
  std::string unit = "g";  // gamma | g; documents the rate unit of this file
  SystemParams system;
  PulseConfig pulse;
  NumericConfig numeric;
  SweepConfig sweep;
  PeMapConfig pe_map;
  WignerConfig wigner;
  std::string raw_text;  // byte-exact echo for the run record

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  // Physics sanity warnings (adiabaticity, dropped-omega0 validity, ...).
  std::vector<std::string> physics_warnings() const;
};

// Minimal strict INI: [section] + key = value, '#' comments, no duplicates.
std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& text);

}  // namespace catpulse
