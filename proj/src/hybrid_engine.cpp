#include "ddetc/hybrid_engine.hpp"

#include <cmath>
#include <ostream>

#include "ddetc/errors.hpp"
#include "ddetc/rng.hpp"

namespace ddetc {

double sigma(double a1, double c_sigma) {
  if (!(a1 >= 0.0 && a1 <= 1.0)) throw InvalidInput("sigma: a1 outside [0,1]");
  if (!(c_sigma > 0.0 && c_sigma <= 1.0)) {
    throw InvalidInput("sigma: c_sigma outside (0,1]");
  }
  return 1.0 - c_sigma * (1.0 - a1);
}

double lyap(const Vec& x, const SymMat& s) { return x.dot(s.mat() * x); }

const char* to_string(ControllerMode m) {
  switch (m) {
    case ControllerMode::EventTriggered:
      return "event";
    case ControllerMode::Fixed:
      return "fixed";
    case ControllerMode::TimeTriggered:
      return "time";
  }
  return "?";
}

namespace {

double clamp_a1(double a1) { return std::min(1.0, std::max(0.0, a1)); }

bool decrease_violated(const HybridState& q, const TriggerOptions& opts) {
  const double s = sigma(clamp_a1(q.bundle.a1), opts.c_sigma);
  return lyap(q.x, q.bundle.S) >
         s * lyap(q.xhat, q.bundle.S) * (1.0 + opts.tie_tol);
}

}  // namespace

Classification classify(const HybridState& q, const TriggerOptions& opts) {
  Classification c;
  if (q.tau == 0 || !decrease_violated(q, opts)) return c;
  c.synthesis = synthesize_detailed(q.window, opts.synthesis);
  if (c.synthesis->bundle) c.mode = Mode::InD;
  return c;
}

HybridState flow(const HybridState& q, const LtvPlant& plant, const Vec& u) {
  HybridState n = q;
  n.x = plant.step(q.kappa(), q.x, u);
  n.window = q.window.push(q.x, n.x, u);
  n.xhat = q.x;
  n.tau = 1;
  return n;
}

HybridState jump(const HybridState& q, const ControllerBundle& b, int episode) {
  HybridState n = q;
  n.bundle = b;
  n.bundle_episode = episode;
  n.tau = 0;
  return n;
}

HybridState step(const HybridState& q, const LtvPlant& plant,
                 const Classification& c) {
  if (c.mode == Mode::InC) return flow(q, plant, q.bundle.K * q.x);
  if (!c.synthesis || !c.synthesis->bundle) {
    throw InternalError("jump requested without a synthesized controller");
  }
  return jump(q, *c.synthesis->bundle, q.bundle_episode + 1);
}

namespace {

ControllerBundle fallback_bundle(int nx, int nu, const std::optional<Mat>& k) {
  ControllerBundle b;
  b.K = k ? *k : Mat::Zero(nu, nx);
  if (b.K.rows() != nu || b.K.cols() != nx) {
    throw InvalidInput("run: fallback gain has the wrong shape");
  }
  b.S = SymMat::Identity(nx);
  b.F = SymMat::Identity(nx);
  b.H = SymMat::Identity(nx);
  b.Y = Mat::Zero(0, nx);
  b.a1 = 1.0;
  b.a2 = 0.0;
  b.a = 0.0;
  return b;
}

class Recorder {
 public:
  Recorder(Trajectory* t, const TriggerOptions& o) : traj_(t), opts_(o) {}

  StepRecord& add(const HybridTime& t, const HybridState& q) {
    StepRecord r;
    r.t = t;
    r.q = q;
    r.V = lyap(q.x, q.bundle.S);
    r.sigma_a1 = sigma(clamp_a1(q.bundle.a1), opts_.c_sigma);
    traj_->records.push_back(std::move(r));
    return traj_->records.back();
  }

 private:
  Trajectory* traj_;
  const TriggerOptions& opts_;
};

bool diverged(const Vec& x, double threshold) {
  return !x.allFinite() || x.norm() > threshold;
}

}  // namespace

Trajectory run(const LtvPlant& plant, const RunConfig& cfg) {
  const int nx = plant.nx();
  const int nu = plant.nu();
  if (cfg.x0.size() != nx) throw InvalidInput("run: x0 has the wrong size");
  if (cfg.window < 1) throw InvalidInput("run: window must be >= 1");
  if (cfg.horizon < cfg.window) throw InvalidInput("run: horizon < window");
  if (cfg.mode == ControllerMode::TimeTriggered && cfg.n_p < 1) {
    throw InvalidInput("run: n_p must be >= 1");
  }

  Trajectory traj;
  traj.nx = nx;
  traj.nu = nu;
  Recorder rec(&traj, cfg.trigger);
  Rng explore = Rng(cfg.seed).split("exploration");

  HybridState q;
  q.x = cfg.x0;
  q.window = DataWindow(nx, nu, cfg.window, cfg.kappa0);
  q.bundle = fallback_bundle(nx, nu, cfg.fallback_gain);
  q.xhat = cfg.x0;
  q.tau = 1;
  HybridTime t{0, 0};

  auto finish_diverged = [&]() {
    traj.status = RunStatus::Diverged;
    rec.add(t, q).terminal = true;
    return traj;
  };

  // Open-loop exploration with i.i.d. uniform inputs.
  for (; t.k < cfg.window; ++t.k) {
    const Vec u = explore.uniform_vec(nu, -1.0, 1.0);
    auto& r = rec.add(t, q);
    r.u = u;
    r.exploration = true;
    q = flow(q, plant, u);
    if (diverged(q.x, cfg.divergence_threshold)) {
      ++t.k;
      return finish_diverged();
    }
  }

  auto attempt = [&](StepRecord& r) -> bool {
    traj.syntheses.push_back(synthesize_detailed(q.window, cfg.trigger.synthesis));
    const auto& rep = traj.syntheses.back();
    r.synth = rep.bundle ? 1 : 0;
    if (!rep.bundle) {
      traj.warnings.push_back("k=" + std::to_string(t.k) +
                              ": synthesis empty (" + rep.diagnostic + ")");
      return false;
    }
    r.trigger = true;
    traj.episodes.push_back(t.k);
    traj.episode_windows.push_back(q.window);
    q = jump(q, *rep.bundle, static_cast<int>(traj.episode_windows.size()) - 1);
    ++t.j;
    return true;
  };

  {
    auto& r = rec.add(t, q);
    const std::size_t idx = traj.records.size() - 1;
    if (!attempt(r)) {
      traj.warnings.push_back("initial synthesis failed; using fallback gain");
      traj.analysis_start = idx;
    } else {
      traj.analysis_start = idx + 1;
    }
  }

  while (t.k < cfg.horizon) {
    auto& r = rec.add(t, q);
    bool jumped = false;
    switch (cfg.mode) {
      case ControllerMode::Fixed:
        break;
      case ControllerMode::TimeTriggered:
        if (q.tau == 1 && (t.k - cfg.window) % cfg.n_p == 0) {
          jumped = attempt(r);
        }
        break;
      case ControllerMode::EventTriggered: {
        auto c = classify(q, cfg.trigger);
        if (c.synthesis) {
          const bool ok = c.synthesis->bundle.has_value();
          traj.syntheses.push_back(std::move(*c.synthesis));
          r.synth = ok ? 1 : 0;
          if (ok) {
            r.trigger = true;
            traj.episodes.push_back(t.k);
            traj.episode_windows.push_back(q.window);
            q = jump(q, *traj.syntheses.back().bundle,
                     static_cast<int>(traj.episode_windows.size()) - 1);
            ++t.j;
            jumped = true;
          }
        }
        break;
      }
    }
    if (jumped) continue;
    const Vec u = q.bundle.K * q.x;
    r.u = u;
    q = flow(q, plant, u);
    ++t.k;
    if (diverged(q.x, cfg.divergence_threshold)) return finish_diverged();
  }
  rec.add(t, q).terminal = true;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "k,j";
  for (int i = 1; i <= traj.nx; ++i) out << ",x_" << i;
  for (int i = 1; i <= traj.nu; ++i) out << ",u_" << i;
  out << ",V,sigma_a1,a1,trigger,synth_feasible,kappa\n";
  const auto old = out.precision(17);
  for (const auto& r : traj.records) {
    out << r.t.k << ',' << r.t.j;
    for (int i = 0; i < traj.nx; ++i) out << ',' << r.q.x(i);
    for (int i = 0; i < traj.nu; ++i) {
      out << ',';
      if (r.u.size() == traj.nu) out << r.u(i);
    }
    out << ',' << r.V << ',' << r.sigma_a1 << ',' << r.q.bundle.a1 << ','
        << (r.trigger ? 1 : 0) << ',';
    if (r.synth >= 0) out << r.synth;
    out << ',' << r.q.kappa() << '\n';
  }
  out.precision(old);
}

}  // namespace ddetc
