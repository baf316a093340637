#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddetc/experiment.hpp"
#include "ddetc/verify_suites.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;
constexpr int kSolverBreakdown = 3;
constexpr int kDiverged = 4;

int simulate(const std::string& config, std::optional<std::uint64_t> seed,
             const std::string& out) {
  auto cfg = ddetc::load_config(config);
  if (seed) cfg.run.seed = *seed;
  if (!out.empty()) cfg.out_dir = out;
  const auto res = ddetc::run_scenario(cfg);
  ddetc::write_summary(std::cout, res.outcome.summary);
  for (const auto& p : res.paths) std::cout << "# wrote " << p.string() << "\n";
  for (const auto& w : res.outcome.traj.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (res.outcome.summary.breakdown) return kSolverBreakdown;
  if (res.outcome.traj.status == ddetc::RunStatus::Diverged) return kDiverged;
  return kOk;
}

int run_batch(const std::string& dir, const std::string& out) {
  if (!fs::is_directory(dir)) {
    throw ddetc::ConfigError("not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".cfg" || ext == ".ini")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  const fs::path root = out.empty() ? fs::path(dir) / "out" : fs::path(out);
  const auto rows = ddetc::batch(files, root);
  ddetc::write_summary_table(std::cout, rows);
  std::cerr << "# wrote " << (root / "summary.csv").string() << "\n";
  return kOk;
}

int verify(const std::string& suite, std::uint64_t seed, int samples) {
  ddetc::SuiteOptions opts;
  opts.seed = seed;
  opts.samples = samples;
  const auto res = ddetc::run_suite(suite, opts);
  for (const auto& l : res.lines) std::cout << l << "\n";
  std::cout << (res.passed ? "PASS " : "FAIL ") << "suite " << res.name << "\n";
  return res.passed ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven event-triggered control experiments", "ddetc"};
  app.set_version_flag("--version", std::string("ddetc ") + DDETC_VERSION);
  app.require_subcommand(1);

  std::string config, out, config_dir, suite;
  std::optional<std::uint64_t> seed;
  std::uint64_t verify_seed = 42;
  int samples = 500;

  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  sim->add_option("--config", config, "Scenario file")->required();
  sim->add_option("--seed", seed, "Override run.seed");
  sim->add_option("--out", out, "Override output.dir");

  auto* bat = app.add_subcommand("batch", "Run every .cfg/.ini file in a directory");
  bat->add_option("--config-dir", config_dir, "Directory of scenario files")
      ->required();
  bat->add_option("--out", out, "Output root (default <config-dir>/out)");

  auto* ver = app.add_subcommand("verify", "Run a property suite");
  ver->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(ddetc::suite_names()));
  ver->add_option("--seed", verify_seed, "Seed of the reference runs");
  ver->add_option("--samples", samples, "Samples per check")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return simulate(config, seed, out);
    if (*bat) return run_batch(config_dir, out);
    if (*ver) return verify(suite, verify_seed, samples);
  } catch (const ddetc::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ddetc::SolverBreakdown& e) {
    std::cerr << "solver breakdown: " << e.what() << "\n";
    return kSolverBreakdown;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
