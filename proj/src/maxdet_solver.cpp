#include "ddetc/maxdet_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "ddetc/errors.hpp"

namespace ddetc {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Feasible:
      return "Feasible";
    case SdpStatus::Optimal:
      return "Optimal";
    case SdpStatus::Infeasible:
      return "Infeasible";
    case SdpStatus::MaxIter:
      return "MaxIter";
  }
  return "?";
}

SymMat AffineMatFn::eval(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != coefficients.size()) {
    throw InvalidInput("AffineMatFn::eval: wrong number of variables");
  }
  Mat out = constant.mat();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double xi = x(static_cast<Eigen::Index>(i));
    if (xi != 0.0) out += xi * coefficients[i].mat();
  }
  return SymMat(out);
}

namespace {

// Bounds become ordinary 1x1 constraints appended after the user's blocks.
std::vector<AffineMatFn> all_constraints(const SdpProblem& p) {
  std::vector<AffineMatFn> out = p.constraints;
  for (const auto& b : p.var_bounds) {
    if (b.index < 0 || b.index >= p.num_vars) {
      throw InvalidInput("SdpProblem: variable bound index out of range");
    }
    AffineMatFn f;
    f.constant = SymMat(Mat::Constant(1, 1, -b.bound));
    f.coefficients.assign(static_cast<std::size_t>(p.num_vars),
                          SymMat::Zero(1));
    f.coefficients[static_cast<std::size_t>(b.index)] = SymMat::Identity(1);
    out.push_back(std::move(f));
  }
  return out;
}

void validate(const SdpProblem& p) {
  if (p.num_vars < 0) throw InvalidInput("SdpProblem: negative num_vars");
  for (const auto& c : p.constraints) {
    if (c.coefficients.size() != static_cast<std::size_t>(p.num_vars)) {
      throw InvalidInput("SdpProblem: coefficient count != num_vars");
    }
    if (c.dim() == 0) throw InvalidInput("SdpProblem: empty constraint block");
    for (const auto& a : c.coefficients) {
      if (a.dim() != c.dim()) {
        throw InvalidInput("SdpProblem: coefficient dimension mismatch");
      }
    }
  }
  if (p.det_block && *p.det_block >= p.constraints.size()) {
    throw InvalidInput("SdpProblem: det_block out of range");
  }
}

// Affine block over the barrier's own variable vector z.
struct Block {
  Mat constant;
  std::vector<Mat> coef;

  Mat eval(const Vec& z) const {
    Mat out = constant;
    for (std::size_t i = 0; i < coef.size(); ++i) {
      const double zi = z(static_cast<Eigen::Index>(i));
      if (zi != 0.0) out += zi * coef[i];
    }
    return out;
  }
};

std::optional<double> logdet_pd(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Mat& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return std::nullopt;
    s += std::log(l(i, i));
  }
  return 2.0 * s;
}

class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path) {
    if (!path.empty()) {
      out_ = std::make_unique<std::ofstream>(path);
      if (*out_) *out_ << "iteration,phase,mu,min_margin,logdet,decrement\n";
    }
  }
  bool enabled() const { return out_ && *out_; }
  void row(int it, int phase, double mu, double margin, double logdet,
           double dec) {
    if (!out_ || !*out_) return;
    *out_ << it << ',' << phase << ',' << mu << ',' << margin << ',' << logdet
          << ',' << dec << '\n';
  }

 private:
  std::unique_ptr<std::ofstream> out_;
};

// Minimizes  mu * (lin . z - logdet(obj(z)))  - sum_i logdet(B_i(z))
//            - log(radius^2 - ||z_{0..ball_dim}||^2)
// by damped Newton steps.
class Barrier {
 public:
  std::vector<Block> blocks;
  Vec lin;
  std::optional<Block> objective;
  Eigen::Index ball_dim = 0;
  double radius = 1e6;

  int barrier_dim() const {
    int m = 1;
    for (const auto& b : blocks) m += static_cast<int>(b.constant.rows());
    return m;
  }

  std::optional<double> value(const Vec& z, double mu) const {
    const double r2 = radius * radius - z.head(ball_dim).squaredNorm();
    if (!(r2 > 0.0)) return std::nullopt;
    double v = -std::log(r2);
    if (lin.size() > 0) v += mu * lin.dot(z);
    for (const auto& b : blocks) {
      const auto ld = logdet_pd(b.eval(z));
      if (!ld) return std::nullopt;
      v -= *ld;
    }
    if (objective) {
      const auto ld = logdet_pd(objective->eval(z));
      if (!ld) return std::nullopt;
      v -= mu * *ld;
    }
    return v;
  }

  void derivatives(const Vec& z, double mu, Vec* g, Mat* h) const {
    const Eigen::Index n = z.size();
    *g = Vec::Zero(n);
    *h = Mat::Zero(n, n);
    if (lin.size() > 0) *g += mu * lin;

    auto add_logdet = [&](const Block& b, double w) {
      const Mat f = b.eval(z);
      Eigen::LLT<Mat> llt(f);
      if (llt.info() != Eigen::Success) {
        throw SolverBreakdown("barrier block lost positive definiteness");
      }
      std::vector<Mat> fa(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        fa[static_cast<std::size_t>(i)] = llt.solve(b.coef[static_cast<std::size_t>(i)]);
        (*g)(i) -= w * fa[static_cast<std::size_t>(i)].trace();
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
          const double v = w * (fa[static_cast<std::size_t>(i)].cwiseProduct(
                                    fa[static_cast<std::size_t>(j)].transpose()))
                                   .sum();
          (*h)(i, j) += v;
          if (j != i) (*h)(j, i) += v;
        }
      }
    };
    for (const auto& b : blocks) add_logdet(b, 1.0);
    if (objective) add_logdet(*objective, mu);

    const Vec zb = z.head(ball_dim);
    const double r2 = radius * radius - zb.squaredNorm();
    g->head(ball_dim) += 2.0 * zb / r2;
    h->topLeftCorner(ball_dim, ball_dim) +=
        2.0 * Mat::Identity(ball_dim, ball_dim) / r2 +
        4.0 * zb * zb.transpose() / (r2 * r2);
  }
};

struct StepResult {
  // Newton decrement of the barrier divided by mu, i.e. of the equivalent
  // objective f0 + barrier / mu.
  double decrement = 0.0;
  bool stalled = false;
};

StepResult newton_step(const Barrier& bar, Vec* z, double mu) {
  Vec g;
  Mat h;
  bar.derivatives(*z, mu, &g, &h);
  if (!g.allFinite() || !h.allFinite()) {
    throw SolverBreakdown("non-finite barrier derivatives");
  }
  if (lambda_min(SymMat(h)) < 1e-12) {
    h += 1e-10 * Mat::Identity(h.rows(), h.cols());
  }
  Eigen::LDLT<Mat> ldlt(h);
  const Vec dz = ldlt.solve(-g);
  if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
    throw SolverBreakdown("singular Newton system");
  }
  StepResult out;
  const double dec2 = -g.dot(dz);
  out.decrement = std::sqrt(std::max(0.0, dec2) / mu);

  const auto f0 = bar.value(*z, mu);
  if (!f0) throw SolverBreakdown("current iterate left the barrier domain");
  double alpha = 1.0;
  constexpr double kArmijo = 0.25;
  while (alpha > 1e-14) {
    const Vec trial = *z + alpha * dz;
    const auto f1 = bar.value(trial, mu);
    if (f1 && *f1 <= *f0 + kArmijo * alpha * g.dot(dz)) {
      // Progress below the rounding level of f means the iterate is as
      // centered as double precision allows.
      if (*f0 - *f1 <= 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(*f0))) {
        out.stalled = true;
      }
      *z = trial;
      return out;
    }
    alpha *= 0.5;
  }
  out.stalled = true;
  return out;
}

Block shifted_block(const AffineMatFn& f, double shift, int extra_vars) {
  Block b;
  const Eigen::Index d = f.dim();
  b.constant = f.constant.mat() - shift * Mat::Identity(d, d);
  for (const auto& a : f.coefficients) b.coef.push_back(a.mat());
  for (int i = 0; i < extra_vars; ++i) b.coef.push_back(Mat::Zero(d, d));
  return b;
}

bool strictly_above(const std::vector<double>& margins, double m) {
  for (double v : margins) {
    if (!(v > m)) return false;
  }
  return true;
}

SdpSolution finish(const SdpProblem& p, Vec x, SdpStatus status, int iters) {
  SdpSolution s;
  s.min_margins = check_point(p, x);
  if (p.det_block) {
    s.logdet_value = logdet_pd(p.constraints[*p.det_block].eval(x).mat());
  }
  s.x = std::move(x);
  s.status = status;
  s.iterations = iters;
  return s;
}

SdpSolution phase_one(const SdpProblem& p, const SolverOptions& opts,
                      const Vec& x0, TraceWriter* trace, int* iters) {
  const auto cons = all_constraints(p);
  if (cons.empty()) throw InvalidInput("solve_feasibility: no constraints");
  const double margin = opts.strict_margin;

  std::vector<double> lm;
  for (const auto& c : cons) lm.push_back(lambda_min(c.eval(x0)));
  if (strictly_above(lm, margin)) {
    return finish(p, x0, SdpStatus::Feasible, *iters);
  }

  // z = (x, t) with constraints F_i(x) - (margin + t) I > 0.
  Barrier bar;
  const int n = p.num_vars;
  for (const auto& c : cons) {
    Block b = shifted_block(c, margin, 1);
    b.coef.back() = -Mat::Identity(c.dim(), c.dim());
    bar.blocks.push_back(std::move(b));
  }
  bar.lin = Vec::Zero(n + 1);
  bar.lin(n) = -1.0;
  bar.ball_dim = n;
  bar.radius = opts.radius;
  if (!(x0.squaredNorm() < opts.radius * opts.radius)) {
    throw InvalidInput("solve_feasibility: start point outside solver ball");
  }

  double worst = lm.front();
  for (double v : lm) worst = std::min(worst, v);
  Vec z(n + 1);
  z.head(n) = x0;
  z(n) = worst - margin - 1.0;
  const double m_bar = bar.barrier_dim();

  for (double mu = opts.mu_start;; mu *= opts.mu_factor) {
    while (true) {
      if (*iters >= opts.max_newton_steps) {
        return finish(p, z.head(n), SdpStatus::MaxIter, *iters);
      }
      const auto step = newton_step(bar, &z, mu);
      ++*iters;
      if (trace) trace->row(*iters, 1, mu, z(n), 0.0, step.decrement);
      if (z(n) > 0.0) {
        auto sol = finish(p, z.head(n), SdpStatus::Feasible, *iters);
        // Rounding can leave t marginally positive while a block sits on the
        // margin; keep centering in that case.
        if (strictly_above(sol.min_margins, margin)) return sol;
      }
      if (step.stalled || step.decrement <= opts.kkt_tol) break;
    }
    if (z(n) + m_bar / mu < 0.0) {
      return finish(p, z.head(n), SdpStatus::Infeasible, *iters);
    }
    if (mu >= opts.phase1_mu_final) {
      return finish(p, z.head(n), SdpStatus::MaxIter, *iters);
    }
  }
}

}  // namespace

std::vector<double> check_point(const SdpProblem& p, const Vec& x) {
  validate(p);
  if (x.size() != p.num_vars) {
    throw InvalidInput("check_point: decision vector has wrong length");
  }
  std::vector<double> out;
  for (const auto& c : all_constraints(p)) out.push_back(lambda_min(c.eval(x)));
  return out;
}

SdpSolution solve_feasibility(const SdpProblem& p, const SolverOptions& opts,
                              std::optional<Vec> x0) {
  validate(p);
  const Vec start = x0.value_or(Vec::Zero(p.num_vars));
  if (start.size() != p.num_vars) {
    throw InvalidInput("solve_feasibility: start point has wrong length");
  }
  TraceWriter trace(opts.trace_path);
  int iters = 0;
  return phase_one(p, opts, start, &trace, &iters);
}

SdpSolution solve_maxdet(const SdpProblem& p, const SolverOptions& opts) {
  validate(p);
  if (!p.det_block) throw InvalidInput("solve_maxdet: det_block not set");
  TraceWriter trace(opts.trace_path);
  int iters = 0;
  auto feas = phase_one(p, opts, Vec::Zero(p.num_vars), &trace, &iters);
  if (feas.status != SdpStatus::Feasible) return feas;

  Barrier bar;
  for (const auto& c : all_constraints(p)) {
    bar.blocks.push_back(shifted_block(c, opts.strict_margin, 0));
  }
  bar.objective = shifted_block(p.constraints[*p.det_block], 0.0, 0);
  bar.ball_dim = p.num_vars;
  bar.radius = opts.radius;

  Vec x = feas.x;
  std::vector<double> stage_logdet;
  double last_dec = 0.0;
  for (double mu = opts.mu_start; mu <= opts.mu_final * (1.0 + 1e-12);
       mu *= opts.mu_factor) {
    while (true) {
      if (iters >= opts.max_newton_steps) {
        auto s = finish(p, x, SdpStatus::MaxIter, iters);
        s.stage_logdet = std::move(stage_logdet);
        s.final_decrement = last_dec;
        return s;
      }
      const auto step = newton_step(bar, &x, mu);
      ++iters;
      last_dec = step.decrement;
      if (trace.enabled()) {
        const auto ld = logdet_pd(p.constraints[*p.det_block].eval(x).mat());
        const auto m = check_point(p, x);
        trace.row(iters, 2, mu, *std::min_element(m.begin(), m.end()),
                  ld.value_or(std::nan("")), step.decrement);
      }
      if (step.stalled || step.decrement <= opts.kkt_tol) break;
    }
    stage_logdet.push_back(
        logdet_pd(p.constraints[*p.det_block].eval(x).mat()).value_or(
            -std::numeric_limits<double>::infinity()));
  }
  auto s = finish(p, x, SdpStatus::Optimal, iters);
  s.stage_logdet = std::move(stage_logdet);
  s.final_decrement = last_dec;
  return s;
}

}  // namespace ddetc
