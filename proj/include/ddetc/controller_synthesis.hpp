#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddetc/data_window.hpp"
#include "ddetc/maxdet_solver.hpp"
#include "ddetc/matrix_core.hpp"

namespace ddetc {

/// Output of the synthesis map: gain, Lyapunov-like matrix, proximity-set
/// shape and decay constants, plus the solver variables they came from.
/// All matrices are in the units of the data window.
struct ControllerBundle {
  Mat K;
  SymMat S;
  SymMat F;
  double a1 = 1.0;
  double a2 = 0.0;
  double a = 0.0;
  double varsigma = 0.0;
  Mat Y;
  SymMat H;
  double eps_F = 0.1;
  /// Data normalization factor: the SDP is solved on window / scale.
  double scale = 1.0;
};

struct SynthesisOptions {
  double eps_F = 0.1;
  SolverOptions solver;
  /// Declare the map empty when [Xhat; U] lacks full row rank instead of
  /// attempting the solve on a restricted gain space.
  bool reject_low_rank = false;
  /// Solve on the window divided by its norm. The LMIs are invariant under
  /// this scaling, so the map is unchanged in exact arithmetic while the
  /// strict margin becomes relative to the data size.
  bool normalize_data = false;
};

struct SynthesisReport {
  std::optional<ControllerBundle> bundle;
  /// Problem and solution in normalized units.
  SdpProblem problem;
  SdpSolution solution;
  bool breakdown = false;
  std::string diagnostic;
};

SynthesisReport synthesize_detailed(const DataWindow& w,
                                    const SynthesisOptions& opts = {});

/// Empty result means the synthesis map is empty for this window.
std::optional<ControllerBundle> synthesize(const DataWindow& w,
                                           const SynthesisOptions& opts = {});

/// Decay factor a1 + a2 eps guaranteed for members of the eps-inflated set.
double decay_rate_bound(const ControllerBundle& b, double eps);

/// Bundle variables re-expressed in the normalized units of the solve, used
/// to check the extraction identities at unit scale.
ControllerBundle normalized(const ControllerBundle& b);

struct PropertyReport {
  int samples = 0;
  int violations = 0;
  /// min over samples of (bound - theta) / bound; negative on violation.
  double worst_slack = 0.0;
  /// Inflation values for which the sampled set was empty.
  std::vector<double> vacuous_eps;
  /// Sampled matrices that failed the direct membership test.
  int membership_failures = 0;
};

/// Samples (MA, MB) in the eps-inflated proximity set of w for each eps in
/// `eps_values` (default {0, a / (2 a2), 2 a / a2}) and checks the
/// worst-case Lyapunov ratio against a1 + a2 eps.
PropertyReport verify_property(const ControllerBundle& b, const DataWindow& w,
                               int num_samples, std::uint64_t seed,
                               std::vector<double> eps_values = {});

void write_bundle(std::ostream& out, const ControllerBundle& b);
ControllerBundle read_bundle(std::istream& in);

}  // namespace ddetc
