// thermoform validate <config.json>
// thermoform run <config.json> [--out DIR] [--jobs N]

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "thermoform/experiment.hpp"

namespace {

enum Exit { ok = 0, invalid = 1, diverged = 2, internal = 3 };

template <class Fn>
int guarded(Fn&& fn) {
  using namespace thermoform;
  try {
    return fn();
  } catch (const NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return diverged;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const NotPrimitive& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return internal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermodynamic formalism on subshifts of finite type"};
  app.require_subcommand(1);

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "Parse and check a config without computing");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string out_dir;
  unsigned jobs = 0;
  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides THERMOFORM_OUTPUT_DIR and the config)");
  run->add_option("--jobs", jobs, "Worker threads (default: config value, else 1)")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }

  if (validate->parsed()) {
    return guarded([&] {
      const auto config = thermoform::load_config(config_path);
      std::cout << "ok: " << to_string(config.task) << " \"" << config.name << "\"\n";
      return static_cast<int>(ok);
    });
  }

  return guarded([&] {
    const auto config = thermoform::load_config(config_path);
    std::filesystem::path dir = ".";
    if (!out_dir.empty())
      dir = out_dir;
    else if (const char* env = std::getenv("THERMOFORM_OUTPUT_DIR"); env && *env)
      dir = env;
    else if (config.output_dir)
      dir = *config.output_dir;
    const unsigned threads = jobs ? jobs : config.limits.jobs;
    const auto report = thermoform::run_experiment(config, dir, threads);
    std::cout << report.summary << "\n";
    for (const auto& a : report.artifacts) std::cout << "  wrote " << a.string() << "\n";
    if (report.non_convergence) {
      std::cerr << "non-convergence: " << *report.non_convergence << "\n";
      return static_cast<int>(diverged);
    }
    return static_cast<int>(ok);
  });
}
