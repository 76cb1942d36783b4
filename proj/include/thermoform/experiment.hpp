#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "thermoform/io.hpp"

namespace thermoform {

enum class Task { pressure_sweep, equilibrium, rate_sweep, ldp_report, entropy_approx, pressure_2d };

std::string to_string(Task t);

struct PressureSweepParams {
  std::vector<Route> routes;
  std::vector<int> ns;
  int r = 0;
};

struct RateSweepParams {
  std::vector<std::vector<double>> points;
};

struct LdpParams {
  Variant variant = Variant::gibbs;
  std::vector<int> ns;
  BoxQuery box;
  int r = 0;
};

struct EntropyApproxParams {
  std::optional<InvariantMeasure> target;
  int max_window = 1;
  double perturbation = 1e-6;
};

struct Pressure2dParams {
  std::optional<PairInteraction> interaction;
  std::vector<int> widths;
  std::vector<std::pair<int, int>> boxes;
};

/// A parsed, fully validated experiment. Construction performs every check
/// that run() would otherwise hit, so a validated config never fails validation later.
struct ExperimentConfig {
  io::Json raw;
  std::string name = "experiment";
  Task task = Task::equilibrium;
  ShiftSpace space = ShiftSpace::full(2);
  std::optional<Potential> potential;
  std::optional<ObservableFamily> observables;
  DualOptions dual;
  Limits limits;
  std::optional<std::string> output_dir;
  std::variant<std::monostate, PressureSweepParams, RateSweepParams, LdpParams, EntropyApproxParams, Pressure2dParams>
      params;
};

ExperimentConfig parse_config(const io::Json& raw);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunReport {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
  /// Set when some numerical step did not converge; artifacts are still written.
  std::optional<std::string> non_convergence;
};

/// Runs the task and writes `<name>.json` plus CSV tables into out_dir.
RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned jobs);

}  // namespace thermoform
