#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "catpulse/runner.hpp"

namespace {

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("CATPULSE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catpulse: propagating cat-state experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int threads = 0;
  std::string forced_experiment;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (INI sections)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--threads", threads,
                    "worker threads (default: CATPULSE_THREADS or 1)");
  };

  CLI::App* run = app.add_subcommand("run", "run the experiment named in the config");
  add_common(run);
  CLI::App* validate =
      app.add_subcommand("validate", "check a config and report physics warnings");
  validate->add_option("--config", config_path, "config file")->required();

  // Direct experiment subcommands override [run] experiment.
  for (const char* name :
       {"single-cat", "four-cat", "pe-map", "kex-sweep", "wigner"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name +
                                                 " experiment");
    add_common(sub);
    sub->callback([&forced_experiment, name] { forced_experiment = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    catpulse::RunConfig cfg = catpulse::RunConfig::from_file(config_path);
    if (!forced_experiment.empty() && cfg.experiment != forced_experiment) {
      // Re-parse with the experiment forced so emitter counts etc. follow.
      std::string text = cfg.raw_text;
      auto pos = text.find("experiment");
      std::string patched;
      if (pos != std::string::npos) {
        auto eol = text.find('\n', pos);
        patched = text.substr(0, pos) + "experiment = " + forced_experiment +
                  (eol == std::string::npos ? "" : text.substr(eol));
      } else {
        patched = "[run]\nexperiment = " + forced_experiment + "\n" + text;
      }
      cfg = catpulse::RunConfig::from_text(patched);
      cfg.raw_text = text;  // the record echoes the file as given
    }
    if (validate->parsed()) return catpulse::validate_config(cfg, std::cout);
    return catpulse::run_experiment(cfg, out_dir, resolve_threads(threads),
                                    std::cout);
  } catch (const catpulse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const catpulse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
