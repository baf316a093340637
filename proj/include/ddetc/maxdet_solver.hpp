#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddetc/matrix_core.hpp"

namespace ddetc {

/// F(x) = constant + sum_i x_i * coefficients[i].
struct AffineMatFn {
  SymMat constant;
  std::vector<SymMat> coefficients;

  Eigen::Index dim() const { return constant.dim(); }
  SymMat eval(const Vec& x) const;
};

/// Lower bound x[index] >= bound, compiled into a 1x1 constraint.
struct VarBound {
  int index = 0;
  double bound = 0.0;
};

/// Constraints are all required to be positive definite. `det_block`, when
/// set, indexes the constraint whose log-determinant is maximized.
struct SdpProblem {
  int num_vars = 0;
  std::vector<AffineMatFn> constraints;
  std::optional<std::size_t> det_block;
  std::vector<VarBound> var_bounds;
};

enum class SdpStatus { Feasible, Optimal, Infeasible, MaxIter };

const char* to_string(SdpStatus s);

struct SolverOptions {
  /// Strict inequalities F(x) > 0 are enforced as F(x) >= strict_margin * I.
  double strict_margin = 1e-6;
  /// Newton steps across phase I and phase II of a single solve.
  int max_newton_steps = 200;
  double mu_start = 1.0;
  double mu_factor = 10.0;
  double mu_final = 1e6;
  /// Phase I keeps increasing mu up to this value before giving up.
  double phase1_mu_final = 1e12;
  /// Newton decrement threshold for centering.
  double kkt_tol = 1e-7;
  /// Radius of the implicit ball ||x|| < radius keeping the barrier bounded.
  double radius = 1e6;
  /// When non-empty, a CSV trace of every Newton step is written here.
  std::string trace_path;
};

struct SdpSolution {
  Vec x;
  SdpStatus status = SdpStatus::MaxIter;
  /// lambda_min of every constraint (bounds included, appended last) at x.
  std::vector<double> min_margins;
  std::optional<double> logdet_value;
  int iterations = 0;
  /// logdet of the det block at the end of every barrier stage.
  std::vector<double> stage_logdet;
  /// Newton decrement at the last centering step.
  double final_decrement = 0.0;
};

/// lambda_min of every constraint at x, bound constraints appended last.
std::vector<double> check_point(const SdpProblem& p, const Vec& x);

/// Phase I: maximize t subject to F_i(x) >= (strict_margin + t) I.
SdpSolution solve_feasibility(const SdpProblem& p,
                              const SolverOptions& opts = {},
                              std::optional<Vec> x0 = std::nullopt);

/// Phase I followed by the log-barrier path for max logdet(F_det(x)).
SdpSolution solve_maxdet(const SdpProblem& p, const SolverOptions& opts = {});

}  // namespace ddetc
