#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddetc/controller_synthesis.hpp"
#include "ddetc/data_window.hpp"
#include "ddetc/plant_models.hpp"

namespace ddetc {

struct HybridTime {
  long k = 0;
  int j = 0;
};

/// Closed-loop state. The counter kappa lives in the window.
struct HybridState {
  Vec x;
  DataWindow window;
  ControllerBundle bundle;
  Vec xhat;
  int tau = 1;
  /// Episode that produced `bundle`; -1 for the fallback controller.
  int bundle_episode = -1;

  long kappa() const { return window.kappa(); }
};

enum class Mode { InC, InD };

/// sigma(a1) = 1 - c_sigma (1 - a1).
double sigma(double a1, double c_sigma);

/// V(x, S) = x^T S x.
double lyap(const Vec& x, const SymMat& s);

struct Classification {
  Mode mode = Mode::InC;
  /// Present when the decrease test failed with tau = 1, i.e. when the
  /// synthesis map had to be evaluated.
  std::optional<SynthesisReport> synthesis;
};

struct TriggerOptions {
  double c_sigma = 0.1;
  /// Relative tie tolerance; equality V(x,S) = sigma V(xhat,S) stays in C.
  double tie_tol = 1e-12;
  SynthesisOptions synthesis;
};

Classification classify(const HybridState& q, const TriggerOptions& opts);

/// Flow with an explicit input (used by the exploration phase).
HybridState flow(const HybridState& q, const LtvPlant& plant, const Vec& u);

/// One transition. InC flows with u = K x; InD installs the cached bundle.
HybridState step(const HybridState& q, const LtvPlant& plant,
                 const Classification& c);

/// Controller update from a synthesis result; x, kappa, window, xhat stay.
HybridState jump(const HybridState& q, const ControllerBundle& b, int episode);

enum class ControllerMode { EventTriggered, Fixed, TimeTriggered };

const char* to_string(ControllerMode m);

struct RunConfig {
  Vec x0;
  int window = 4;
  long horizon = 100;
  std::uint64_t seed = 42;
  long kappa0 = 0;
  ControllerMode mode = ControllerMode::EventTriggered;
  int n_p = 12;
  TriggerOptions trigger;
  /// Gain used when the first synthesis fails (default zero).
  std::optional<Mat> fallback_gain;
  double divergence_threshold = 1e6;
};

enum class RunStatus { Completed, Diverged };

/// One hybrid time with its state and the transition taken from it.
struct StepRecord {
  HybridTime t;
  HybridState q;
  /// Input applied by the outgoing flow; empty for jumps and the final record.
  Vec u;
  double V = 0.0;
  double sigma_a1 = 1.0;
  bool trigger = false;
  /// -1 synthesis not attempted, 0 attempted and empty, 1 succeeded.
  int synth = -1;
  bool exploration = false;
  bool terminal = false;
};

struct Trajectory {
  std::vector<StepRecord> records;
  /// Physical times of the controller updates.
  std::vector<long> episodes;
  std::vector<std::string> warnings;
  RunStatus status = RunStatus::Completed;
  /// First record of the closed loop, right after the initial synthesis.
  std::size_t analysis_start = 0;
  /// Synthesis reports of every attempted solve, in order.
  std::vector<SynthesisReport> syntheses;
  /// Window each successful episode was designed from, by episode index.
  std::vector<DataWindow> episode_windows;
  int nx = 0;
  int nu = 0;
};

Trajectory run(const LtvPlant& plant, const RunConfig& cfg);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace ddetc
