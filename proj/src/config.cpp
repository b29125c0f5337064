#include "catpulse/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "catpulse/analytics.hpp"

namespace catpulse {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    size_t pos = 0;
    double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + value +
                      "'");
  }
}

int parse_int(const std::string& section, const std::string& key,
              const std::string& value) {
  try {
    size_t pos = 0;
    int i = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not an integer: '" +
                      value + "'");
  }
}

std::vector<double> parse_list(const std::string& section,
                               const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("[" + section + "] " + key + ": empty list entry");
    out.push_back(parse_double(section, key, item));
  }
  if (out.empty())
    throw ConfigError("[" + section + "] " + key + ": empty list");
  return out;
}

using Section = std::map<std::string, std::string>;

// Consume key by key so leftovers can be reported as unknown.
class SectionReader {
 public:
  SectionReader(std::string name, Section sec)
      : name_(std::move(name)), sec_(std::move(sec)) {}

  bool take(const std::string& key, std::string& out) {
    auto it = sec_.find(key);
    if (it == sec_.end()) return false;
    out = it->second;
    sec_.erase(it);
    return true;
  }
  void number(const std::string& key, double& out) {
    std::string v;
    if (take(key, v)) out = parse_double(name_, key, v);
  }
  void integer(const std::string& key, int& out) {
    std::string v;
    if (take(key, v)) out = parse_int(name_, key, v);
  }
  void list(const std::string& key, std::vector<double>& out) {
    std::string v;
    if (take(key, v)) out = parse_list(name_, key, v);
  }
  void text(const std::string& key, std::string& out) {
    std::string v;
    if (take(key, v)) out = v;
  }
  void finish() const {
    if (!sec_.empty())
      throw ConfigError("[" + name_ + "]: unknown key '" + sec_.begin()->first +
                        "'");
  }

 private:
  std::string name_;
  Section sec_;
};

}  // namespace

std::map<std::string, Section> parse_ini(const std::string& text) {
  std::map<std::string, Section> out;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) +
                          ": empty section name");
      if (out.count(section))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": duplicate section [" + section + "]");
      out[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": key outside of any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (out[section].count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "' in [" + section + "]");
    out[section][key] = value;
  }
  return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
  auto ini = parse_ini(text);
  static const std::set<std::string> known_sections = {
      "run", "system", "pulse", "numeric", "kex-sweep", "pe-map", "wigner"};
  for (const auto& [name, _] : ini)
    if (!known_sections.count(name))
      throw ConfigError("unknown section [" + name + "]");

  RunConfig cfg;
  cfg.raw_text = text;

  auto section = [&](const char* name) {
    auto it = ini.find(name);
    return SectionReader(name, it == ini.end() ? Section{} : it->second);
  };

  {
    auto r = section("run");
    r.text("experiment", cfg.experiment);
    r.text("unit", cfg.unit);
    r.finish();
  }
  static const std::set<std::string> experiments = {
      "single-cat", "four-cat", "pe-map", "kex-sweep", "wigner"};
  if (!experiments.count(cfg.experiment))
    throw ConfigError("[run] experiment must be one of single-cat, four-cat, "
                      "pe-map, kex-sweep, wigner (got '" +
                      cfg.experiment + "')");
  if (cfg.unit != "g" && cfg.unit != "gamma")
    throw ConfigError("[run] unit must be 'g' or 'gamma'");

  {
    auto r = section("system");
    r.number("g", cfg.system.g);
    r.number("delta", cfg.system.delta);
    r.number("gamma", cfg.system.gamma);
    r.number("kappa_ex", cfg.system.kappa_ex);
    r.number("kappa_in", cfg.system.kappa_in);
    r.number("delta_g", cfg.system.delta_g);
    r.number("delta_e", cfg.system.delta_e);
    r.number("r1", cfg.system.r1);
    r.number("r2", cfg.system.r2);
    r.finish();
  }

  {
    auto r = section("pulse");
    r.number("kappa_tau", cfg.pulse.kappa_tau);
    r.number("t0_over_tau", cfg.pulse.t0_over_tau);
    r.number("window_over_tau", cfg.pulse.window_over_tau);
    r.integer("grid", cfg.pulse.grid);
    double re = cfg.pulse.alpha.real(), im = cfg.pulse.alpha.imag();
    r.number("alpha_re", re);
    r.number("alpha_im", im);
    cfg.pulse.alpha = cplx(re, im);
    r.text("envelope_file", cfg.pulse.envelope_file);
    r.finish();
  }
  if (cfg.pulse.kappa_tau <= 0.0)
    throw ConfigError("[pulse] kappa_tau must be > 0");

  {
    auto r = section("numeric");
    r.number("rtol", cfg.numeric.rtol);
    r.number("atol", cfg.numeric.atol);
    r.integer("n_cavity", cfg.numeric.n_cavity);
    r.integer("n_virtual", cfg.numeric.n_virtual);
    r.integer("save_points", cfg.numeric.save_points);
    r.number("tail_tol", cfg.numeric.tail_tol);
    r.number("coherent_tail_tol", cfg.numeric.coherent_tail_tol);
    r.finish();
  }
  if (cfg.numeric.n_cavity < 2 || cfg.numeric.n_virtual < 2)
    throw ConfigError("[numeric] truncations must be >= 2");
  if (cfg.numeric.save_points < 2)
    throw ConfigError("[numeric] save_points must be >= 2");

  {
    auto r = section("kex-sweep");
    r.list("kappa_in_values", cfg.sweep.kappa_in_values);
    r.text("variant", cfg.sweep.variant);
    r.number("bracket_lo", cfg.sweep.bracket_lo);
    r.number("bracket_hi", cfg.sweep.bracket_hi);
    r.number("rel_tol", cfg.sweep.rel_tol);
    r.finish();
  }
  if (cfg.sweep.variant != "two-cat" && cfg.sweep.variant != "four-cat")
    throw ConfigError("[kex-sweep] variant must be 'two-cat' or 'four-cat'");
  if (cfg.experiment == "kex-sweep" && cfg.sweep.kappa_in_values.empty())
    throw ConfigError("[kex-sweep] kappa_in_values is required");

  {
    auto r = section("pe-map");
    r.list("kappa_over_g", cfg.pe_map.kappa_over_g);
    r.list("kappa_tau", cfg.pe_map.kappa_tau);
    r.integer("n_cavity", cfg.pe_map.n_cavity);
    r.finish();
  }

  {
    auto r = section("wigner");
    r.number("x_min", cfg.wigner.x_min);
    r.number("x_max", cfg.wigner.x_max);
    r.number("p_min", cfg.wigner.p_min);
    r.number("p_max", cfg.wigner.p_max);
    r.integer("points", cfg.wigner.points);
    r.text("variant", cfg.wigner.variant);
    r.finish();
  }
  if (cfg.wigner.variant != "single-cat" && cfg.wigner.variant != "four-cat")
    throw ConfigError("[wigner] variant must be 'single-cat' or 'four-cat'");
  if (cfg.wigner.points < 2)
    throw ConfigError("[wigner] points must be >= 2");

  // The emitter count follows the experiment, not the config.
  const bool four = cfg.experiment == "four-cat" ||
                    (cfg.experiment == "wigner" &&
                     cfg.wigner.variant == "four-cat") ||
                    (cfg.experiment == "kex-sweep" &&
                     cfg.sweep.variant == "four-cat");
  cfg.system.n_emitters = four ? 2 : 1;

  try {
    cfg.system.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("[system]: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::vector<std::string> RunConfig::physics_warnings() const {
  std::vector<std::string> w;
  const double kappa = system.kappa();
  if (kappa > 0.0) {
    const double tau = pulse.kappa_tau / kappa;
    const double tc = tau_c(system);
    if (tau < 10.0 * tc)
      w.push_back("pulse is short: tau = " + std::to_string(tau) +
                  " but the adiabatic scale tau_c = " + std::to_string(tc) +
                  "; expect excess excited population");
    const double w0 = std::abs(system.omega0());
    if (w0 > 0.2 * kappa)
      w.push_back("|omega0|/kappa = " + std::to_string(w0 / kappa) +
                  " is not small; dispersive closed forms degrade");
  }
  if (pulse.t0_over_tau < 4.0 ||
      pulse.window_over_tau < pulse.t0_over_tau + 4.0)
    w.push_back("pulse window clips the Gaussian; keep t0 >= 4 tau and "
                "window >= t0 + 4 tau");
  return w;
}

}  // namespace catpulse
