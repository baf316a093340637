// Prints one PASS/FAIL line per acceptance criterion. Criteria listed in
// kKnownFailures are documented shortfalls; the exit status is non-zero when
// the observed failures differ from that list in either direction.
#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddetc/experiment.hpp"
#include "ddetc/verify_suites.hpp"

using namespace ddetc;

namespace {

constexpr std::uint64_t kSeed = 42;
const std::set<int> kKnownFailures = {1, 2, 3};

struct Line {
  int id;
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string episodes_str(const std::vector<long>& e) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < e.size(); ++i) s << (i ? " " : "") << e[i];
  s << "]";
  return s.str();
}

long first_switch(const ScenarioConfig& cfg) {
  const auto plant = build_plant(cfg.plant);
  for (long k = 1; k <= cfg.run.horizon; ++k) {
    if (plant.eval(k).B != plant.eval(k - 1).B) return k;
  }
  return -1;
}

Line criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = switching_scenario(1.0, ControllerMode::EventTriggered, 12, kSeed);
  const auto o = simulate_scenario(cfg);
  const double secs = seconds_since(t0);
  const long sw = first_switch(cfg);
  const auto& e = o.summary.episodes;
  const bool after_switch = std::any_of(e.begin(), e.end(), [&](long k) {
    return k >= sw && k <= sw + 3;
  });
  std::ostringstream d;
  d << "converged " << o.summary.converged << ", episodes " << e.size() << " "
    << episodes_str(e) << ", episode within 3 steps of switch at k=" << sw
    << ": " << after_switch << ", " << secs << " s";
  return {1, o.summary.converged && e.size() <= 10 && after_switch && secs < 10.0,
          d.str()};
}

Line criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto bad = simulate_scenario(
      switching_scenario(2.5, ControllerMode::Fixed, 12, kSeed));
  const auto good = simulate_scenario(
      switching_scenario(1.0, ControllerMode::Fixed, 12, kSeed));
  const double secs = seconds_since(t0);
  const bool bad_div = bad.traj.status == RunStatus::Diverged &&
                       bad.traj.records.back().t.k < 100;
  const bool good_div = good.traj.status == RunStatus::Diverged;
  std::ostringstream d;
  d << "ell=2.5 diverged " << bad_div << " (final |x| " << bad.summary.final_norm
    << "), ell=1 diverged " << good_div << ", " << secs << " s";
  return {2, bad_div && !good_div && secs < 5.0, d.str()};
}

Line criterion3() {
  const std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
  auto median_final = [&](int n_p) {
    std::vector<double> v;
    for (auto s : seeds) {
      v.push_back(simulate_scenario(
                      switching_scenario(1.0, ControllerMode::TimeTriggered, n_p, s))
                      .summary.final_norm);
    }
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double m8 = median_final(8), m12 = median_final(12), m16 = median_final(16);
  std::ostringstream d;
  d << "median final |x|: n_p=8 " << m8 << ", n_p=12 " << m12 << ", n_p=16 "
    << m16 << " over " << seeds.size() << " seeds";
  return {3, m12 < m8 && m12 < m16, d.str()};
}

Line criterion4() {
  bool ok = true;
  std::ostringstream d;
  for (int p : {10, 20, 40}) {
    const auto o = simulate_scenario(sinusoidal_scenario(p, kSeed));
    const bool pass = o.summary.converged && o.summary.episodes.size() <= 10;
    ok = ok && pass;
    d << "p=" << p << " converged " << o.summary.converged << " episodes "
      << o.summary.episodes.size() << "; ";
  }
  const auto v = simulate_scenario(vanishing_scenario(kSeed));
  const bool member = v.diag.corollary_membership.value_or(false);
  ok = ok && v.summary.converged && v.summary.episodes.size() <= 10 && member;
  d << "vanishing converged " << v.summary.converged << " episodes "
    << episodes_str(v.summary.episodes) << " membership from k="
    << v.diag.corollary_tstar.value_or(-1) << ": " << member;
  return {4, ok, d.str()};
}

Line from_suite(int id, const SuiteResult& r) {
  std::ostringstream d;
  d << "suite " << r.name << ": ";
  int failed = 0;
  for (const auto& l : r.lines) failed += l.rfind("FAIL", 0) == 0;
  d << r.lines.size() - failed << "/" << r.lines.size() << " checks";
  for (const auto& l : r.lines) {
    if (l.rfind("FAIL", 0) == 0) d << "; " << l;
  }
  return {id, r.passed, d.str()};
}

}  // namespace

int main() {
  std::vector<Line> lines;
  lines.push_back(criterion1());
  lines.push_back(criterion2());
  lines.push_back(criterion3());
  lines.push_back(criterion4());

  const auto runs = reference_outcomes(kSeed);
  SuiteOptions opts;
  opts.seed = kSeed;
  opts.samples = 500;
  lines.push_back(from_suite(5, suite_property1(runs, opts)));
  lines.push_back(from_suite(6, suite_lemma5(runs)));
  lines.push_back(from_suite(7, suite_prop3(runs)));
  lines.push_back(from_suite(8, suite_solver(runs, opts)));
  lines.push_back(from_suite(9, suite_lemma3(runs, opts)));

  std::set<int> failed;
  for (const auto& l : lines) {
    if (!l.pass) failed.insert(l.id);
    std::cout << "criterion " << l.id << ": " << (l.pass ? "PASS" : "FAIL")
              << (!l.pass && kKnownFailures.count(l.id) ? " (known)" : "")
              << " - " << l.detail << "\n";
  }
  const int passed = static_cast<int>(lines.size() - failed.size());
  std::cout << "summary: " << passed << "/" << lines.size() << " criteria pass";
  if (failed != kKnownFailures) {
    std::cout << "; failures differ from the documented list\n";
    return 1;
  }
  std::cout << "; remaining failures are documented\n";
  return 0;
}
