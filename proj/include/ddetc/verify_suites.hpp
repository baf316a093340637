#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddetc/experiment.hpp"

namespace ddetc {

struct SuiteResult {
  std::string name;
  bool passed = true;
  /// One "PASS ..." or "FAIL ..." line per check.
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what);
};

struct SuiteOptions {
  std::uint64_t seed = 42;
  int samples = 500;
};

/// lemma3, property1, lemma5, prop3, solver.
const std::vector<std::string>& suite_names();

/// Switching (event, fixed with ell 1 and 2.5, time triggered with n_p 8, 12
/// and 16), sinusoidal p in {10, 20, 40} and vanishing runs for one seed.
std::vector<ScenarioOutcome> reference_outcomes(std::uint64_t seed);

SuiteResult run_suite(const std::string& name,
                      const std::vector<ScenarioOutcome>& runs,
                      const SuiteOptions& opts = {});
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {});

// Individual pieces, exposed for the acceptance runner.
SuiteResult suite_lemma3(const std::vector<ScenarioOutcome>& runs,
                         const SuiteOptions& opts);
SuiteResult suite_property1(const std::vector<ScenarioOutcome>& runs,
                            const SuiteOptions& opts);
SuiteResult suite_lemma5(const std::vector<ScenarioOutcome>& runs);
SuiteResult suite_prop3(const std::vector<ScenarioOutcome>& runs);
SuiteResult suite_solver(const std::vector<ScenarioOutcome>& runs,
                         const SuiteOptions& opts);

}  // namespace ddetc
