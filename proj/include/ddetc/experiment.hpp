#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddetc/errors.hpp"
#include "ddetc/hybrid_engine.hpp"
#include "ddetc/lyapunov_monitor.hpp"
#include "ddetc/plant_models.hpp"

namespace ddetc {

/// Malformed or inconsistent scenario configuration.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct PlantSpec {
  PlantKind kind = PlantKind::Switching;
  Mat a0 = reference_a0();
  Mat b0 = reference_b0();
  /// Second input matrix of the switching plant; derived from ell if unset.
  std::optional<Mat> b_alt;
  double ell = 1.0;
  int period = 12;
  double delta = 0.8;
  int t_delta = 30;
  double delta0 = 1.0;
  std::string file;
};

struct ScenarioConfig {
  std::string name = "scenario";
  PlantSpec plant;
  /// run.window <= 0 means n_x + n_u.
  RunConfig run;
  std::filesystem::path out_dir = "out";
  bool svg = true;
  std::optional<double> lambda_c;
  std::optional<double> lambda_d;
  /// Candidate time for the eventual-membership check; the vanishing plant
  /// defaults to t_delta + window.
  std::optional<long> corollary_tstar;
};

/// Parses the key = value format with [section] headers. Relative file
/// paths are resolved against `base_dir`.
ScenarioConfig parse_config(std::istream& in,
                            const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Fills defaults that depend on the plant and checks ranges.
void finalize_config(ScenarioConfig& cfg);

LtvPlant build_plant(const PlantSpec& spec);

struct Summary {
  std::string name;
  std::string mode;
  std::uint64_t seed = 0;
  std::string status;
  double final_norm = 0.0;
  double max_norm = 0.0;
  std::vector<long> episodes;
  /// ||x(k)|| <= 1e-2 max ||x|| for every k >= 0.8 horizon.
  bool converged = false;
  bool bound_ok = false;
  bool databased_dominates = false;
  std::optional<bool> corollary;
  bool breakdown = false;
  int warnings = 0;
};

struct ScenarioOutcome {
  ScenarioConfig config;
  Trajectory traj;
  DiagnosticsReport diag;
  Summary summary;
};

ScenarioOutcome simulate_scenario(ScenarioConfig cfg);

/// Writes trajectory.csv, diagnostics.csv, bundles.txt, summary.txt and
/// optionally norm.svg into `dir`; returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ScenarioOutcome& o,
                                                 const std::filesystem::path& dir);

struct ScenarioResult {
  ScenarioOutcome outcome;
  std::vector<std::filesystem::path> paths;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct BatchRow {
  std::string source;
  std::optional<Summary> summary;
  std::string error;
};

/// Runs every scenario (concurrently) and writes summary.csv in `out_root`.
std::vector<BatchRow> batch(const std::vector<std::filesystem::path>& configs,
                            const std::filesystem::path& out_root);

void write_summary(std::ostream& out, const Summary& s);
void write_summary_table(std::ostream& out, const std::vector<BatchRow>& rows);
void write_norm_svg(std::ostream& out, const Trajectory& traj);

/// The reference scenario set: switching plant (event, fixed, time
/// triggered), sinusoidal sweep and vanishing perturbation.
ScenarioConfig switching_scenario(double ell, ControllerMode mode, int n_p,
                                  std::uint64_t seed);
ScenarioConfig sinusoidal_scenario(int period, std::uint64_t seed);
ScenarioConfig vanishing_scenario(std::uint64_t seed);

}  // namespace ddetc
