#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ddetc/hybrid_engine.hpp"
#include "ddetc/plant_models.hpp"

namespace ddetc {

/// Smallest nu with S_next <= nu S.
double nu_d(const SymMat& s, const SymMat& s_next);

/// Smallest theta with (A + B K)^T S (A + B K) <= theta S.
double theta_exact(const Mat& a, const Mat& b, const Mat& k, const SymMat& s);

/// a1 + a2 eps.
double theta_databased(double eps, double a1, double a2);

enum class PiMode { Exact, Databased };

/// Per-record certificate data. Index r describes record r of the trajectory
/// and the transition leaving it; entries before the analysis origin are NaN.
struct PiSeries {
  std::vector<double> pi;
  /// Factor applied on the transition leaving record r.
  std::vector<double> factor;
  /// Flow transitions whose successor lies in C1.
  std::vector<bool> in_c1;
  std::vector<bool> is_jump;
  std::vector<double> theta_exact;
  std::vector<double> theta_databased;
  std::vector<double> nu_d;
  /// Whether the databased factor used the data-based bound (needs a
  /// synthesized controller).
  std::vector<bool> databased_applicable;
  std::size_t origin = 0;
};

/// The running product of sigma(a1) in C1, theta outside C1, and nu_d at
/// controller updates. The true plant is needed for theta and for the
/// inflation used by the databased mode.
PiSeries pi_product(const Trajectory& traj, const LtvPlant& plant, PiMode mode);

/// V(x, S) <= pi V(x0, S0) (1 + rel_tol) per record from the origin on.
std::vector<bool> check_bound(const Trajectory& traj, const PiSeries& pi,
                              double rel_tol = 1e-9);

struct DiagnosticsReport {
  PiSeries exact;
  PiSeries databased;
  std::vector<bool> bound_ok;
  /// Physical times whose flow successor lies in C1.
  std::vector<long> t1_membership;
  double lambda_c = 1.0;
  double lambda_d = 1.0;
  /// (k - 2j) ln lambda_c + (3j + 1) ln lambda_d per record, relative to the
  /// analysis origin.
  std::vector<double> thm4_lhs;
  double m1 = 0.0;
  double m2 = 0.0;
  /// First physical time after which every flow lands in C1 and no update
  /// occurs; empty when that only happens at the horizon.
  std::optional<long> tstar;
  /// Time at which membership of the true plant matrices in the proximity set
  /// of that time was checked for every later step.
  std::optional<long> corollary_tstar;
  std::optional<bool> corollary_membership;
  std::vector<long> corollary_failures;
  /// Earliest time from which the membership holds for all later steps.
  std::optional<long> corollary_earliest;
  std::vector<double> nu_d_events;
  std::vector<double> theta_events;
  /// sqrt(pi lambda_max(S0) / lambda_min(S)) per record.
  std::vector<double> pi_bar;
};

/// Default rates: lambda_c = max sigma(a1), lambda_d = max(1, theta outside
/// C1, nu_d).
std::pair<double, double> default_rates(const Trajectory& traj,
                                        const PiSeries& exact);

/// `corollary_candidate` is the time whose data and F define the proximity
/// set for the membership check; it is raised to the last controller update
/// if earlier, and defaults to T*.
DiagnosticsReport thm_diagnostics(
    const Trajectory& traj, const LtvPlant& plant,
    std::optional<double> lambda_c = std::nullopt,
    std::optional<double> lambda_d = std::nullopt,
    std::optional<long> corollary_candidate = std::nullopt);

void write_diagnostics_csv(std::ostream& out, const Trajectory& traj,
                           const DiagnosticsReport& d);

}  // namespace ddetc
