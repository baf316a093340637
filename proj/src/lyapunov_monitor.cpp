#include "ddetc/lyapunov_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ddetc/errors.hpp"
#include "ddetc/proximity_sets.hpp"

namespace ddetc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double nu_d(const SymMat& s, const SymMat& s_next) {
  return gen_eig_max(s_next, s);
}

double theta_exact(const Mat& a, const Mat& b, const Mat& k, const SymMat& s) {
  const Mat cl = a + b * k;
  if (!all_finite(s.mat())) throw InvalidInput("theta_exact: non-finite S");
  const SymMat m = congruence(s, cl);
  // Overflow of the closed-loop product means unbounded growth.
  if (!all_finite(m.mat())) return std::numeric_limits<double>::infinity();
  return std::max(0.0, gen_eig_max(m, s));
}

double theta_databased(double eps, double a1, double a2) {
  if (!(eps >= 0.0)) throw InvalidInput("theta_databased: eps must be >= 0");
  return a1 + a2 * eps;
}

PiSeries pi_product(const Trajectory& traj, const LtvPlant& plant,
                    PiMode mode) {
  const std::size_t n = traj.records.size();
  PiSeries out;
  out.origin = traj.analysis_start;
  out.pi.assign(n, kNaN);
  out.factor.assign(n, kNaN);
  out.in_c1.assign(n, false);
  out.is_jump.assign(n, false);
  out.theta_exact.assign(n, kNaN);
  out.theta_databased.assign(n, kNaN);
  out.nu_d.assign(n, kNaN);
  out.databased_applicable.assign(n, false);
  if (out.origin >= n) return out;

  out.pi[out.origin] = 1.0;
  for (std::size_t r = out.origin; r + 1 < n; ++r) {
    const auto& cur = traj.records[r];
    const auto& next = traj.records[r + 1];
    const HybridState& q = cur.q;
    double f = kNaN;
    if (cur.trigger) {
      out.is_jump[r] = true;
      out.nu_d[r] = nu_d(q.bundle.S, next.q.bundle.S);
      f = out.nu_d[r];
    } else {
      const double v = lyap(q.x, q.bundle.S);
      const double v_next = lyap(next.q.x, q.bundle.S);
      out.in_c1[r] = v_next <= cur.sigma_a1 * v;
      const auto m = plant.eval(q.kappa());
      out.theta_exact[r] = theta_exact(m.A, m.B, q.bundle.K, q.bundle.S);
      if (q.bundle_episode >= 0) {
        const auto& w = traj.episode_windows.at(
            static_cast<std::size_t>(q.bundle_episode));
        const double eps =
            min_inflation(w, q.bundle.F, q.bundle.S, m.A, m.B);
        out.theta_databased[r] = theta_databased(eps, q.bundle.a1, q.bundle.a2);
        out.databased_applicable[r] = true;
      } else {
        out.theta_databased[r] = out.theta_exact[r];
      }
      if (out.in_c1[r]) {
        f = cur.sigma_a1;
      } else {
        f = mode == PiMode::Exact ? out.theta_exact[r] : out.theta_databased[r];
      }
    }
    out.factor[r] = f;
    out.pi[r + 1] = out.pi[r] * f;
  }
  return out;
}

std::vector<bool> check_bound(const Trajectory& traj, const PiSeries& pi,
                              double rel_tol) {
  std::vector<bool> ok(traj.records.size(), true);
  if (pi.origin >= traj.records.size()) return ok;
  const auto& o = traj.records[pi.origin].q;
  const double v0 = lyap(o.x, o.bundle.S);
  for (std::size_t r = pi.origin; r < traj.records.size(); ++r) {
    const auto& q = traj.records[r].q;
    const double v = lyap(q.x, q.bundle.S);
    ok[r] = v <= pi.pi[r] * v0 * (1.0 + rel_tol);
  }
  return ok;
}

std::pair<double, double> default_rates(const Trajectory& traj,
                                        const PiSeries& exact) {
  double lc = 0.0;
  double ld = 1.0;
  for (std::size_t r = exact.origin; r < traj.records.size(); ++r) {
    lc = std::max(lc, traj.records[r].sigma_a1);
    if (exact.is_jump[r]) ld = std::max(ld, exact.nu_d[r]);
    if (!exact.is_jump[r] && !exact.in_c1[r] && std::isfinite(exact.theta_exact[r])) {
      ld = std::max(ld, exact.theta_exact[r]);
    }
  }
  if (lc <= 0.0) lc = 1.0;
  return {lc, std::max(ld, lc)};
}

namespace {

// Record holding the final hybrid time (k, j_k) at physical time k.
std::optional<std::size_t> last_record_at(const Trajectory& traj, long k,
                                          std::size_t from) {
  std::optional<std::size_t> at;
  for (std::size_t r = from; r < traj.records.size(); ++r) {
    if (traj.records[r].t.k == k) at = r;
  }
  return at;
}

// Flow steps after record `at` whose plant matrices leave the proximity set
// defined by the data and F of that record.
std::vector<long> membership_failures(const Trajectory& traj,
                                      const LtvPlant& plant, std::size_t at) {
  const auto& ref = traj.records[at].q;
  std::vector<long> fails;
  for (std::size_t r = at; r + 1 < traj.records.size(); ++r) {
    if (traj.records[r].trigger) continue;
    const auto& q = traj.records[r].q;
    const auto m = plant.eval(q.kappa());
    if (!contains(ref.window, ref.bundle.F, m.A, m.B)) {
      fails.push_back(q.kappa());
    }
  }
  return fails;
}

}  // namespace

DiagnosticsReport thm_diagnostics(const Trajectory& traj, const LtvPlant& plant,
                                  std::optional<double> lambda_c,
                                  std::optional<double> lambda_d,
                                  std::optional<long> corollary_candidate) {
  DiagnosticsReport d;
  d.exact = pi_product(traj, plant, PiMode::Exact);
  d.databased = pi_product(traj, plant, PiMode::Databased);
  d.bound_ok = check_bound(traj, d.exact);
  const auto rates = default_rates(traj, d.exact);
  d.lambda_c = lambda_c.value_or(rates.first);
  d.lambda_d = lambda_d.value_or(rates.second);
  if (!(d.lambda_c > 0.0 && d.lambda_c <= 1.0) || d.lambda_d < d.lambda_c) {
    throw InvalidInput("thm_diagnostics: need 0 < lambda_c <= 1 <= lambda_d");
  }

  const std::size_t n = traj.records.size();
  const std::size_t o = d.exact.origin;
  d.thm4_lhs.assign(n, kNaN);
  d.pi_bar.assign(n, kNaN);
  if (o >= n) return d;

  const auto& r0 = traj.records[o];
  const double smax0 = lambda_max(r0.q.bundle.S);
  const double lc = std::log(d.lambda_c);
  const double ld = std::log(d.lambda_d);
  std::vector<double> xs, ys;
  for (std::size_t r = o; r < n; ++r) {
    const auto& rec = traj.records[r];
    const double k = static_cast<double>(rec.t.k - r0.t.k);
    const double j = static_cast<double>(rec.t.j - r0.t.j);
    d.thm4_lhs[r] = (k - 2.0 * j) * lc + (3.0 * j + 1.0) * ld;
    d.pi_bar[r] = std::sqrt(d.exact.pi[r] * smax0 / lambda_min(rec.q.bundle.S));
    xs.push_back(k + j);
    ys.push_back(d.thm4_lhs[r]);
    if (r + 1 < n) {
      if (d.exact.is_jump[r]) {
        d.nu_d_events.push_back(d.exact.nu_d[r]);
      } else if (d.exact.in_c1[r]) {
        d.t1_membership.push_back(rec.t.k);
      } else {
        d.theta_events.push_back(d.exact.theta_exact[r]);
      }
    }
  }

  // Least-squares slope of lhs against k + j, m2 clamped at zero, then the
  // smallest m1 making lhs <= m1 - m2 (k + j) hold on the whole run.
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  d.m2 = sxx > 0.0 ? std::max(0.0, -sxy / sxx) : 0.0;
  d.m1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.m1 = std::max(d.m1, ys[i] + d.m2 * xs[i]);
  }

  // T*: first physical time after the last controller update or exit from C1.
  if (traj.status == RunStatus::Completed) {
    long tstar = r0.t.k;
    for (std::size_t r = o; r + 1 < n; ++r) {
      if (d.exact.is_jump[r]) {
        tstar = traj.records[r].t.k;
      } else if (!d.exact.in_c1[r]) {
        tstar = traj.records[r].t.k + 1;
      }
    }
    if (tstar < traj.records.back().t.k) d.tstar = tstar;
  }
  if (traj.status != RunStatus::Completed) return d;
  long cand = corollary_candidate.value_or(d.tstar.value_or(traj.records.back().t.k));
  if (!traj.episodes.empty()) cand = std::max(cand, traj.episodes.back());
  cand = std::max(cand, r0.t.k);
  if (cand < traj.records.back().t.k) {
    if (const auto at = last_record_at(traj, cand, o)) {
      d.corollary_tstar = cand;
      d.corollary_failures = membership_failures(traj, plant, *at);
      d.corollary_membership = d.corollary_failures.empty();
    }
  }
  for (long k = traj.records.back().t.k - 1; k >= r0.t.k; --k) {
    const auto at = last_record_at(traj, k, o);
    if (!at || !membership_failures(traj, plant, *at).empty()) break;
    d.corollary_earliest = k;
  }
  return d;
}

void write_diagnostics_csv(std::ostream& out, const Trajectory& traj,
                           const DiagnosticsReport& d) {
  out << "k,j,V,pi_exact,pi_databased,in_C1,nu_d_event,theta_exact,"
         "theta_databased,thm4_lhs,pi_bar\n";
  const auto old = out.precision(17);
  auto cell = [&](double v) {
    out << ',';
    if (std::isfinite(v)) out << v;
  };
  for (std::size_t r = 0; r < traj.records.size(); ++r) {
    const auto& rec = traj.records[r];
    out << rec.t.k << ',' << rec.t.j << ',' << rec.V;
    cell(d.exact.pi[r]);
    cell(d.databased.pi[r]);
    out << ',';
    const bool flow = r >= d.exact.origin && r + 1 < traj.records.size() &&
                      !d.exact.is_jump[r];
    if (flow) out << (d.exact.in_c1[r] ? 1 : 0);
    cell(d.exact.nu_d[r]);
    cell(d.exact.theta_exact[r]);
    cell(d.exact.theta_databased[r]);
    cell(d.thm4_lhs[r]);
    cell(d.pi_bar[r]);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace ddetc
