#include "ddetc/verify_suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <sstream>

#include "ddetc/proximity_sets.hpp"
#include "ddetc/rng.hpp"

namespace ddetc {

void SuiteResult::check(bool ok, const std::string& what) {
  lines.push_back((ok ? "PASS " : "FAIL ") + what);
  if (!ok) passed = false;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"lemma3", "property1",
                                                 "lemma5", "prop3", "solver"};
  return names;
}

std::vector<ScenarioOutcome> reference_outcomes(std::uint64_t seed) {
  std::vector<ScenarioConfig> cfgs = {
      switching_scenario(1.0, ControllerMode::EventTriggered, 12, seed),
      switching_scenario(1.0, ControllerMode::Fixed, 12, seed),
      switching_scenario(2.5, ControllerMode::Fixed, 12, seed),
      switching_scenario(1.0, ControllerMode::TimeTriggered, 8, seed),
      switching_scenario(1.0, ControllerMode::TimeTriggered, 12, seed),
      switching_scenario(1.0, ControllerMode::TimeTriggered, 16, seed),
      sinusoidal_scenario(10, seed),
      sinusoidal_scenario(20, seed),
      sinusoidal_scenario(40, seed),
      vanishing_scenario(seed)};
  std::vector<std::future<ScenarioOutcome>> jobs;
  for (auto& c : cfgs) {
    jobs.push_back(std::async(std::launch::async,
                              [c]() { return simulate_scenario(c); }));
  }
  std::vector<ScenarioOutcome> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// (bundle, window) of every successful synthesis along a run.
std::vector<std::pair<ControllerBundle, DataWindow>> episode_bundles(
    const Trajectory& traj) {
  std::map<int, ControllerBundle> found;
  for (const auto& r : traj.records) {
    if (r.q.bundle_episode >= 0) found.emplace(r.q.bundle_episode, r.q.bundle);
  }
  std::vector<std::pair<ControllerBundle, DataWindow>> out;
  for (const auto& [e, b] : found) {
    out.emplace_back(b, traj.episode_windows.at(static_cast<std::size_t>(e)));
  }
  return out;
}

double norm2(const SymMat& s) {
  return std::max(std::abs(lambda_min(s)), std::abs(lambda_max(s)));
}

}  // namespace

SuiteResult suite_lemma3(const std::vector<ScenarioOutcome>& runs,
                         const SuiteOptions& opts) {
  SuiteResult res{"lemma3", true, {}};

  // Hand example: Xhat = [1, 0.5], U = 0, X = [0.5, 0.25], F = 0.01.
  {
    Mat xhat(1, 2), x(1, 2), u = Mat::Zero(1, 2);
    xhat << 1.0, 0.5;
    x << 0.5, 0.25;
    const DataWindow w(xhat, x, u, 2);
    const SymMat f(Mat::Constant(1, 1, 0.01));
    const auto e = ellipsoid_params(w, f);
    const double eps = min_inflation(w, f, SymMat::Identity(1),
                                     Mat::Constant(1, 1, 0.7), Mat::Zero(1, 1));
    const bool ok = std::abs(e.Delta.mat()(0, 0) - 0.01) <= 1e-12 &&
                    std::abs(e.Zc(0, 0) - 0.5) <= 1e-12 &&
                    std::abs(e.Zc(1, 0)) <= 1e-12 &&
                    std::abs(eps - 0.04) <= 1e-12;
    res.check(ok, "1-D hand values: Delta " + fmt(e.Delta.mat()(0, 0)) +
                      ", Zc (" + fmt(e.Zc(0, 0)) + ", " + fmt(e.Zc(1, 0)) +
                      "), eps " + fmt(eps));
  }

  long windows = 0, residual_fail = 0;
  double worst_residual = 0.0;
  long samples = 0, decisive = 0, disagreements = 0;
  long cert_checks = 0, cert_fail = 0;
  Rng rng = Rng(opts.seed).split("lemma3");

  for (const auto& o : runs) {
    const auto plant = build_plant(o.config.plant);
    const int T = o.config.run.window;
    const long genuine_from = o.config.run.kappa0 + T;
    for (const auto& r : o.traj.records) {
      const auto& w = r.q.window;
      if (r.t.j != 0 && r.q.tau == 0) continue;  // same window as before the jump
      if (w.kappa() < genuine_from || !w.x().allFinite()) continue;
      ++windows;
      const double resid = consistency_residual(w, plant.stacked(w.kappa(), T));
      const double rel = resid / (1.0 + spectral_norm(w.x()));
      worst_residual = std::max(worst_residual, rel);
      if (!(resid <= 1e-9 * (1.0 + spectral_norm(w.x())))) ++residual_fail;

      if (r.q.bundle_episode < 0) continue;
      const auto& b = r.q.bundle;
      const auto e = ellipsoid_params(w, b.F);
      const double m_big = std::max(lambda_max(e.M), 1e-300);
      const double f_big = std::max(norm2(b.F), 1e-300);
      const double radius = std::sqrt(f_big / m_big);
      const Mat z = w.z();
      for (int i = 0; i < opts.samples; ++i) {
        const double s = radius * std::pow(10.0, rng.uniform(-1.0, 1.0));
        const Mat zhat = e.Zc + s * rng.normal_mat(e.Zc.rows(), e.Zc.cols());
        const Mat ma = zhat.topRows(w.nx()).transpose();
        const Mat mb = zhat.bottomRows(w.nu()).transpose();
        const Mat d = data_mismatch(w, ma, mb);
        const double g1 = lambda_min(b.F - SymMat(d * d.transpose()));
        const double g2 =
            lambda_min(e.Delta - congruence(e.M, zhat - e.Zc));
        ++samples;
        // Decisions closer to the boundary than the roundoff of either form
        // are not counted.
        const double scale = f_big + spectral_norm(d) * spectral_norm(d) +
                             spectral_norm(w.x()) * spectral_norm(w.x()) +
                             spectral_norm(zhat) * spectral_norm(zhat) *
                                 spectral_norm(z) * spectral_norm(z);
        if (std::abs(g1) <= 1e-10 * scale) continue;
        ++decisive;
        if ((g1 >= 0.0) != (g2 >= 0.0)) ++disagreements;
      }

      // Inflation certificate against each plant instant inside the window.
      const SymMat s_inv = sym_inverse(b.S);
      for (int i = 0; i < T; ++i) {
        const auto m = plant.eval(w.kappa() - T + i);
        const double eps = min_inflation(w, b.F, b.S, m.A, m.B);
        const Mat d = data_mismatch(w, m.A, m.B);
        const SymMat dd(d * d.transpose());
        const double tol =
            1e-9 * (norm2(b.F) + norm2(dd) + eps * norm2(s_inv)) + 1e-300;
        ++cert_checks;
        bool ok = lambda_min(b.F + s_inv * eps - dd) >= -tol;
        if (eps > 1e-6 * (norm2(b.F) + norm2(dd)) / norm2(s_inv)) {
          ok = ok && lambda_min(b.F + s_inv * (0.99 * eps) - dd) < 0.0;
        }
        if (!ok) ++cert_fail;
      }
    }
  }
  res.check(windows > 0 && residual_fail == 0,
            "consistency residual on " + std::to_string(windows) +
                " windows, worst relative " + fmt(worst_residual));
  res.check(samples > 0 && disagreements == 0,
            "membership forms agree on " + std::to_string(decisive) + "/" +
                std::to_string(samples) + " decisive samples, " +
                std::to_string(disagreements) + " disagreements");
  res.check(cert_checks > 0 && cert_fail == 0,
            "inflation certificate on " + std::to_string(cert_checks) +
                " plant instants, " + std::to_string(cert_fail) + " failures");
  return res;
}

SuiteResult suite_property1(const std::vector<ScenarioOutcome>& runs,
                            const SuiteOptions& opts) {
  SuiteResult res{"property1", true, {}};
  for (const auto& o : runs) {
    int bundles = 0, violations = 0, member_fail = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::uint64_t sub = 0;
    for (const auto& [b, w] : episode_bundles(o.traj)) {
      const auto rep = verify_property(b, w, opts.samples, opts.seed + sub++);
      ++bundles;
      violations += rep.violations;
      member_fail += rep.membership_failures;
      worst = std::min(worst, rep.worst_slack);
    }
    res.check(violations == 0 && member_fail == 0,
              o.summary.name + ": " + std::to_string(bundles) + " bundles, " +
                  std::to_string(violations) + " violations, " +
                  std::to_string(member_fail) +
                  " membership failures, worst slack " + fmt(worst));
  }
  return res;
}

SuiteResult suite_lemma5(const std::vector<ScenarioOutcome>& runs) {
  SuiteResult res{"lemma5", true, {}};
  for (const auto& o : runs) {
    const auto& d = o.diag;
    long checked = 0, bound_fail = 0, dom_fail = 0;
    for (std::size_t r = d.exact.origin; r < o.traj.records.size(); ++r) {
      ++checked;
      if (!d.bound_ok[r]) ++bound_fail;
      if (d.databased.pi[r] < d.exact.pi[r] * (1.0 - 1e-9)) ++dom_fail;
    }
    res.check(bound_fail == 0 && dom_fail == 0,
              o.summary.name + ": " + std::to_string(checked) + " records, " +
                  std::to_string(bound_fail) + " bound failures, " +
                  std::to_string(dom_fail) + " databased < exact");
  }
  return res;
}

SuiteResult suite_prop3(const std::vector<ScenarioOutcome>& runs) {
  SuiteResult res{"prop3", true, {}};
  for (const auto& o : runs) {
    const auto plant = build_plant(o.config.plant);
    const auto& cfg = o.config.run;
    const auto& recs = o.traj.records;
    long back_to_back = 0, bad_time = 0, bad_tau = 0, bad_replay = 0,
         bad_mode = 0;
    for (std::size_t r = 0; r + 1 < recs.size(); ++r) {
      const auto& a = recs[r];
      const auto& b = recs[r + 1];
      const bool is_jump = b.t.k == a.t.k;
      if (is_jump) {
        if (b.t.j != a.t.j + 1) ++bad_time;
        if (r + 2 < recs.size() && recs[r + 2].t.k == b.t.k) ++back_to_back;
        if (b.q.tau != 0 || !a.trigger) ++bad_tau;
        if (!(b.q.x == a.q.x) || b.q.kappa() != a.q.kappa()) ++bad_replay;
        const long since = a.t.k - cfg.window;
        if (cfg.mode == ControllerMode::Fixed && a.t.k != cfg.window) {
          ++bad_mode;
        }
        if (cfg.mode == ControllerMode::TimeTriggered &&
            (since < 0 || since % cfg.n_p != 0)) {
          ++bad_mode;
        }
        if (cfg.mode == ControllerMode::EventTriggered && a.t.k != cfg.window &&
            !(a.V > a.sigma_a1 * lyap(a.q.xhat, a.q.bundle.S))) {
          ++bad_mode;
        }
      } else {
        if (b.t.k != a.t.k + 1 || b.t.j != a.t.j) ++bad_time;
        if (b.q.tau != 1) ++bad_tau;
        if (b.terminal && o.traj.status == RunStatus::Diverged) continue;
        // Replay the flow from the logged state and input.
        const Vec x_next = plant.step(a.q.kappa(), a.q.x, a.u);
        const auto w_next = a.q.window.push(a.q.x, x_next, a.u);
        bool ok = x_next == b.q.x && w_next.xhat() == b.q.window.xhat() &&
                  w_next.x() == b.q.window.x() &&
                  w_next.u() == b.q.window.u() &&
                  w_next.kappa() == b.q.window.kappa() && b.q.xhat == a.q.x;
        if (!a.exploration) ok = ok && a.u == Vec(a.q.bundle.K * a.q.x);
        if (!ok) ++bad_replay;
      }
    }
    if (!recs.empty() && recs.front().q.tau != 1) ++bad_tau;
    res.check(back_to_back == 0 && bad_time == 0,
              o.summary.name + ": hybrid time steps well formed, " +
                  std::to_string(back_to_back) + " back-to-back jumps");
    res.check(bad_tau == 0, o.summary.name + ": tau is 0 exactly after jumps (" +
                                std::to_string(bad_tau) + " mismatches)");
    res.check(bad_replay == 0 && bad_mode == 0,
              o.summary.name + ": replay and trigger rule (" +
                  std::to_string(bad_replay) + " replay, " +
                  std::to_string(bad_mode) + " trigger mismatches)");
  }
  return res;
}

namespace {

// max logdet over a 2-D box by successive grid refinement.
double grid_logdet(const std::function<double(double, double)>& f, double lo,
                   double hi) {
  double best = -std::numeric_limits<double>::infinity();
  double bx = 0.0, by = 0.0;
  double x0 = lo, x1 = hi, y0 = lo, y1 = hi;
  constexpr int kN = 200;
  for (int level = 0; level < 5; ++level) {
    const double hx = (x1 - x0) / kN, hy = (y1 - y0) / kN;
    for (int i = 0; i <= kN; ++i) {
      for (int j = 0; j <= kN; ++j) {
        const double x = x0 + i * hx, y = y0 + j * hy;
        const double v = f(x, y);
        if (v > best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    }
    x0 = std::max(lo, bx - 3 * hx);
    x1 = std::min(hi, bx + 3 * hx);
    y0 = std::max(lo, by - 3 * hy);
    y1 = std::min(hi, by + 3 * hy);
  }
  return best;
}

SymMat random_sym(Rng& rng, Eigen::Index n, double scale) {
  return SymMat(rng.normal_mat(n, n) * scale);
}

}  // namespace

SuiteResult suite_solver(const std::vector<ScenarioOutcome>& runs,
                         const SuiteOptions& opts) {
  SuiteResult res{"solver", true, {}};
  const SolverOptions sopt;

  {
    Rng rng = Rng(opts.seed).split("constant-problems");
    int mismatches = 0, infeasible = 0;
    for (int t = 0; t < 100; ++t) {
      SdpProblem p;
      p.num_vars = 1 + static_cast<int>(rng.next() % 2);
      bool expect_feasible = true;
      const int blocks = 1 + static_cast<int>(rng.next() % 3);
      for (int b = 0; b < blocks; ++b) {
        const auto n = static_cast<Eigen::Index>(1 + rng.next() % 3);
        AffineMatFn f;
        f.constant = random_sym(rng, n, 0.5) +
                     SymMat::Identity(n) * rng.uniform(-0.5, 2.0);
        for (int v = 0; v < p.num_vars; ++v) {
          f.coefficients.push_back(SymMat::Zero(n));
        }
        if (lambda_min(f.constant) < sopt.strict_margin) {
          expect_feasible = false;
        }
        p.constraints.push_back(std::move(f));
      }
      const auto sol = solve_feasibility(p, sopt);
      const bool got = sol.status == SdpStatus::Feasible;
      if (!expect_feasible) ++infeasible;
      if (got != expect_feasible ||
          (sol.status != SdpStatus::Feasible &&
           sol.status != SdpStatus::Infeasible)) {
        ++mismatches;
      }
    }
    res.check(mismatches == 0,
              "constant problems: 100 decisions (" +
                  std::to_string(infeasible) + " infeasible), " +
                  std::to_string(mismatches) + " mismatches");
  }

  {
    Rng rng = Rng(opts.seed).split("maxdet-2var");
    double worst = 0.0;
    int failures = 0;
    for (int t = 0; t < 20; ++t) {
      const SymMat c1 = random_sym(rng, 2, 0.7);
      const SymMat c2 = random_sym(rng, 2, 0.7);
      SdpProblem p;
      p.num_vars = 2;
      p.constraints.push_back({SymMat::Identity(2), {c1, c2}});
      p.det_block = 0;
      for (int v = 0; v < 2; ++v) {
        AffineMatFn up;
        up.constant = SymMat::Identity(1);
        up.coefficients = {SymMat::Zero(1), SymMat::Zero(1)};
        up.coefficients[static_cast<std::size_t>(v)] =
            SymMat(Mat::Constant(1, 1, -1.0));
        p.constraints.push_back(std::move(up));
        p.var_bounds.push_back({v, -1.0});
      }
      const auto sol = solve_maxdet(p, sopt);
      auto f = [&](double x, double y) {
        const Mat d = Mat::Identity(2, 2) + x * c1.mat() + y * c2.mat();
        const double det = d.determinant();
        if (!(det > 0.0 && d.trace() > 0.0)) {
          return -std::numeric_limits<double>::infinity();
        }
        return std::log(det);
      };
      const double oracle = grid_logdet(f, -1.0, 1.0);
      const double got = sol.logdet_value.value_or(
          -std::numeric_limits<double>::infinity());
      const double gap = std::abs(got - oracle);
      worst = std::max(worst, gap);
      if (sol.status != SdpStatus::Optimal || !(gap <= 1e-3)) ++failures;
    }
    res.check(failures == 0, "2-variable instances: 20 solved, worst gap " +
                                 fmt(worst) + " to the grid oracle");
  }

  long accepted = 0, margin_fail = 0, identity_fail = 0;
  double worst_identity = 0.0;
  for (const auto& o : runs) {
    const double margin = o.config.run.trigger.synthesis.solver.strict_margin;
    for (const auto& rep : o.traj.syntheses) {
      if (!rep.bundle) continue;
      ++accepted;
      const auto m = check_point(rep.problem, rep.solution.x);
      if (*std::min_element(m.begin(), m.end()) < margin / 2.0) ++margin_fail;
      const auto& b = *rep.bundle;
      const Mat resid = b.H.mat() - (1.0 + 1.0 / b.varsigma) * b.F.mat() -
                        b.eps_F * b.H.mat();
      const double rel = spectral_norm(resid) / spectral_norm(b.H.mat());
      worst_identity = std::max(worst_identity, rel);
      if (!(rel <= 1e-12)) ++identity_fail;
    }
  }
  res.check(accepted > 0 && margin_fail == 0,
            "accepted syntheses: " + std::to_string(accepted) + ", " +
                std::to_string(margin_fail) + " below half the strict margin");
  res.check(accepted > 0 && identity_fail == 0,
            "extraction identity H - (1 + 1/varsigma) F = eps_F H, worst "
            "relative " + fmt(worst_identity));
  return res;
}

SuiteResult run_suite(const std::string& name,
                      const std::vector<ScenarioOutcome>& runs,
                      const SuiteOptions& opts) {
  if (name == "lemma3") return suite_lemma3(runs, opts);
  if (name == "property1") return suite_property1(runs, opts);
  if (name == "lemma5") return suite_lemma5(runs);
  if (name == "prop3") return suite_prop3(runs);
  if (name == "solver") return suite_solver(runs, opts);
  throw InvalidInput("unknown suite '" + name + "'");
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  if (std::find(suite_names().begin(), suite_names().end(), name) ==
      suite_names().end()) {
    throw InvalidInput("unknown suite '" + name + "'");
  }
  return run_suite(name, reference_outcomes(opts.seed), opts);
}

}  // namespace ddetc
