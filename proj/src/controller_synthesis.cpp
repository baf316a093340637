#include "ddetc/controller_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "ddetc/errors.hpp"
#include "ddetc/proximity_sets.hpp"
#include "ddetc/rng.hpp"

namespace ddetc {

namespace {

// Basis of {Y : Xhat Y symmetric}, returned as T x nx matrices.
std::vector<Mat> symmetric_product_basis(const Mat& xhat) {
  const Eigen::Index nx = xhat.rows();
  const Eigen::Index t = xhat.cols();
  const Eigen::Index n = t * nx;
  const Eigen::Index p = nx * (nx - 1) / 2;
  auto idx = [t](Eigen::Index row, Eigen::Index col) { return row + t * col; };

  std::vector<Mat> basis;
  if (p == 0) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Mat y = Mat::Zero(t, nx);
      y(k % t, k / t) = 1.0;
      basis.push_back(std::move(y));
    }
    return basis;
  }
  // Row (i, j): (Xhat Y)_ij - (Xhat Y)_ji as a linear form in vec(Y).
  Mat l = Mat::Zero(p, n);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = i + 1; j < nx; ++j, ++r) {
      for (Eigen::Index s = 0; s < t; ++s) {
        l(r, idx(s, j)) += xhat(i, s);
        l(r, idx(s, i)) -= xhat(j, s);
      }
    }
  }
  const auto e = sym_eig(SymMat(l.transpose() * l));
  const double cutoff = 1e-12 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (e.values(k) > cutoff) continue;
    Mat y(t, nx);
    for (Eigen::Index c = 0; c < nx; ++c) {
      for (Eigen::Index s = 0; s < t; ++s) y(s, c) = e.vectors(idx(s, c), k);
    }
    basis.push_back(std::move(y));
  }
  return basis;
}

// Symmetric unit matrix for the (i, j) entry of svec(H).
Mat sym_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Mat e = Mat::Zero(n, n);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

struct Layout {
  int num_vars = 0;
  int y_offset = 1;
  int h_offset = 0;
  std::vector<Mat> y_basis;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> h_entries;
};

SdpProblem build_problem(const Mat& xhat, const Mat& x, Layout* lay) {
  const Eigen::Index nx = xhat.rows();
  const Eigen::Index t = xhat.cols();
  lay->y_basis = symmetric_product_basis(xhat);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = i; j < nx; ++j) lay->h_entries.emplace_back(i, j);
  }
  lay->y_offset = 1;
  lay->h_offset = 1 + static_cast<int>(lay->y_basis.size());
  lay->num_vars = lay->h_offset + static_cast<int>(lay->h_entries.size());
  const auto nv = static_cast<std::size_t>(lay->num_vars);

  AffineMatFn decrease;  // [[Xhat Y - s X X^T - H, X Y], [*, Xhat Y]]
  decrease.constant = SymMat::Zero(2 * nx);
  decrease.coefficients.resize(nv);
  AffineMatFn gain;  // [[I_T, Y], [*, Xhat Y]]
  Mat c2 = Mat::Zero(t + nx, t + nx);
  c2.topLeftCorner(t, t).setIdentity();
  gain.constant = SymMat(c2);
  gain.coefficients.resize(nv);
  AffineMatFn hpos;
  hpos.constant = SymMat::Zero(nx);
  hpos.coefficients.resize(nv);

  Mat m = Mat::Zero(2 * nx, 2 * nx);
  m.topLeftCorner(nx, nx) = -x * x.transpose();
  decrease.coefficients[0] = SymMat(m);
  gain.coefficients[0] = SymMat::Zero(t + nx);
  hpos.coefficients[0] = SymMat::Zero(nx);

  for (std::size_t k = 0; k < lay->y_basis.size(); ++k) {
    const Mat& yb = lay->y_basis[k];
    const Mat p = xhat * yb;
    const Mat q = x * yb;
    Mat d = Mat::Zero(2 * nx, 2 * nx);
    d.topLeftCorner(nx, nx) = p;
    d.topRightCorner(nx, nx) = q;
    d.bottomLeftCorner(nx, nx) = q.transpose();
    d.bottomRightCorner(nx, nx) = p;
    const auto v = static_cast<std::size_t>(lay->y_offset) + k;
    decrease.coefficients[v] = SymMat(d);
    Mat g = Mat::Zero(t + nx, t + nx);
    g.topRightCorner(t, nx) = yb;
    g.bottomLeftCorner(nx, t) = yb.transpose();
    g.bottomRightCorner(nx, nx) = p;
    gain.coefficients[v] = SymMat(g);
    hpos.coefficients[v] = SymMat::Zero(nx);
  }
  for (std::size_t k = 0; k < lay->h_entries.size(); ++k) {
    const auto [i, j] = lay->h_entries[k];
    const Mat e = sym_unit(nx, i, j) * (i == j ? 0.5 : 1.0);
    Mat d = Mat::Zero(2 * nx, 2 * nx);
    d.topLeftCorner(nx, nx) = -e;
    const auto v = static_cast<std::size_t>(lay->h_offset) + k;
    decrease.coefficients[v] = SymMat(d);
    gain.coefficients[v] = SymMat::Zero(t + nx);
    hpos.coefficients[v] = SymMat(e);
  }

  SdpProblem prob;
  prob.num_vars = lay->num_vars;
  prob.constraints = {std::move(decrease), std::move(gain), std::move(hpos)};
  prob.det_block = 2;
  prob.var_bounds = {VarBound{0, 0.0}};
  return prob;
}

Mat unpack_y(const Layout& lay, const Vec& z) {
  Mat y = Mat::Zero(lay.y_basis.front().rows(), lay.y_basis.front().cols());
  for (std::size_t k = 0; k < lay.y_basis.size(); ++k) {
    y += z(lay.y_offset + static_cast<Eigen::Index>(k)) * lay.y_basis[k];
  }
  return y;
}

SymMat unpack_h(const Layout& lay, const Vec& z, Eigen::Index nx) {
  Mat h = Mat::Zero(nx, nx);
  for (std::size_t k = 0; k < lay.h_entries.size(); ++k) {
    const auto [i, j] = lay.h_entries[k];
    const double v = z(lay.h_offset + static_cast<Eigen::Index>(k));
    h(i, j) = v;
    h(j, i) = v;
  }
  return SymMat(h);
}

}  // namespace

namespace {

SynthesisReport solve_and_extract(const DataWindow& w,
                                  const SynthesisOptions& opts) {
  if (!(opts.eps_F > 0.0 && opts.eps_F < 1.0)) {
    throw InvalidInput("synthesize: eps_F must lie in (0, 1)");
  }
  SynthesisReport rep;
  const double norm = std::max(spectral_norm(w.z()), spectral_norm(w.x()));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    rep.diagnostic = "zero or non-finite data window";
    rep.solution.status = SdpStatus::Infeasible;
    return rep;
  }
  if (opts.reject_low_rank && z_matrix(w).rank < w.nx() + w.nu()) {
    rep.diagnostic = "data matrix [Xhat; U] is rank deficient";
    rep.solution.status = SdpStatus::Infeasible;
    return rep;
  }
  const double scale = opts.normalize_data ? norm : 1.0;
  const Mat xhat = w.xhat() / scale;
  const Mat x = w.x() / scale;
  const Mat u = w.u() / scale;

  Layout lay;
  rep.problem = build_problem(xhat, x, &lay);
  try {
    rep.solution = solve_maxdet(rep.problem, opts.solver);
  } catch (const SolverBreakdown& e) {
    rep.breakdown = true;
    rep.diagnostic = std::string("solver breakdown: ") + e.what();
    return rep;
  }
  if (rep.solution.status != SdpStatus::Optimal) {
    rep.diagnostic = std::string("solver status ") + to_string(rep.solution.status);
    return rep;
  }

  const Vec& z = rep.solution.x;
  const Eigen::Index nx = w.nx();
  ControllerBundle b;
  b.eps_F = opts.eps_F;
  b.scale = scale;
  b.varsigma = z(0);
  const Mat y = unpack_y(lay, z);
  const SymMat h = unpack_h(lay, z, nx);
  const SymMat p(xhat * y);
  SymMat s;
  try {
    s = sym_inverse(p);
  } catch (const NotPositiveDefinite&) {
    rep.diagnostic = "Xhat Y is not positive definite at the solution";
    return rep;
  }
  const double shat = b.varsigma / (b.varsigma + 1.0);
  const SymMat f = h * ((1.0 - opts.eps_F) * shat);
  b.a = gen_eig_min(h * opts.eps_F, p);
  b.a1 = 1.0 - b.a;
  b.a2 = 1.0 + 1.0 / b.varsigma;
  b.K = u * y * s.mat();
  // Back to data units: Y scales with the data, H and F quadratically,
  // S inversely quadratically.
  const double s2 = scale * scale;
  b.Y = y * scale;
  b.H = h * s2;
  b.F = f * s2;
  b.S = s * (1.0 / s2);
  rep.bundle = std::move(b);
  return rep;
}

}  // namespace

SynthesisReport synthesize_detailed(const DataWindow& w,
                                    const SynthesisOptions& opts) {
  try {
    return solve_and_extract(w, opts);
  } catch (const NotPositiveDefinite& e) {
    SynthesisReport rep;
    rep.breakdown = true;
    rep.diagnostic = std::string("numerical breakdown: ") + e.what();
    return rep;
  } catch (const InvalidInput& e) {
    // Argument errors are rethrown; overflow inside the solve is a breakdown.
    if (!(opts.eps_F > 0.0 && opts.eps_F < 1.0)) throw;
    SynthesisReport rep;
    rep.breakdown = true;
    rep.diagnostic = std::string("numerical breakdown: ") + e.what();
    return rep;
  }
}

std::optional<ControllerBundle> synthesize(const DataWindow& w,
                                           const SynthesisOptions& opts) {
  return synthesize_detailed(w, opts).bundle;
}

double decay_rate_bound(const ControllerBundle& b, double eps) {
  if (!(eps >= 0.0)) throw InvalidInput("decay_rate_bound: eps must be >= 0");
  return b.a1 + b.a2 * eps;
}

ControllerBundle normalized(const ControllerBundle& b) {
  ControllerBundle n = b;
  const double s2 = b.scale * b.scale;
  n.Y = b.Y / b.scale;
  n.H = b.H * (1.0 / s2);
  n.F = b.F * (1.0 / s2);
  n.S = b.S * s2;
  n.scale = 1.0;
  return n;
}

PropertyReport verify_property(const ControllerBundle& b, const DataWindow& w,
                               int num_samples, std::uint64_t seed,
                               std::vector<double> eps_values) {
  if (num_samples < 1) throw InvalidInput("verify_property: num_samples < 1");
  if (eps_values.empty()) {
    eps_values = {0.0, b.a / (2.0 * b.a2), 2.0 * b.a / b.a2};
  }
  const Eigen::Index nx = w.nx();
  const Eigen::Index nz = w.nx() + w.nu();
  const SymMat s_inv = sym_inverse(b.S);
  Rng rng = Rng(seed).split("verify_property");

  PropertyReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (double eps : eps_values) {
    const SymMat f_eps = b.F + s_inv * eps;
    const auto e = ellipsoid_params(w, f_eps);
    if (!is_nonempty(e)) {
      rep.vacuous_eps.push_back(eps);
      continue;
    }
    // Members are Zc + (M^+)^{1/2} Q Delta^{1/2} with Q in range(M) and
    // ||Q|| <= 1; unbounded directions (kernel of M) stay at Zc.
    const Mat m_pinv = pinv(e.M.mat());
    const SymMat m_pinv_half = sym_sqrt(SymMat(m_pinv));
    const Mat range_proj = e.M.mat() * m_pinv;
    const SymMat delta_half = sym_sqrt(e.Delta);
    const double bound = decay_rate_bound(b, eps);
    for (int i = 0; i < num_samples; ++i) {
      Mat q = Mat::Zero(nz, nx);
      if (i > 0) {
        q = range_proj * rng.normal_mat(nz, nx);
        const double nq = spectral_norm(q);
        if (nq > 0.0) {
          // Most samples sit on the boundary ||Q|| = 1.
          const double radius = rng.uniform01() < 0.7 ? 1.0 : rng.uniform01();
          q *= radius / nq;
        }
      }
      const Mat zhat = e.Zc + m_pinv_half.mat() * q * delta_half.mat();
      const Mat ma = zhat.topRows(nx).transpose();
      const Mat mb = zhat.bottomRows(nz - nx).transpose();
      if (!contains(w, f_eps, ma, mb)) ++rep.membership_failures;
      const Mat cl = ma + mb * b.K;
      const double theta = gen_eig_max(congruence(b.S, cl), b.S);
      const double slack = (bound - theta) / bound;
      rep.worst_slack = std::min(rep.worst_slack, slack);
      if (theta > bound * (1.0 + 1e-7)) ++rep.violations;
      ++rep.samples;
    }
  }
  if (rep.samples == 0) rep.worst_slack = 0.0;
  return rep;
}

namespace {

void write_mat(std::ostream& out, const char* name, const Mat& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << m(r, c);
    }
    out << '\n';
  }
}

Mat read_mat(std::istream& in, const std::string& expect) {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols) || name != expect || rows < 0 || cols < 0) {
    throw InvalidInput("read_bundle: expected matrix " + expect);
  }
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (c > 0) {
        char comma = 0;
        in >> comma;
        if (comma != ',') throw InvalidInput("read_bundle: malformed row");
      }
      if (!(in >> m(r, c))) throw InvalidInput("read_bundle: bad number");
    }
  }
  return m;
}

double read_scalar(std::istream& in, const std::string& expect) {
  std::string name;
  double v = 0.0;
  if (!(in >> name >> v) || name != expect) {
    throw InvalidInput("read_bundle: expected scalar " + expect);
  }
  return v;
}

}  // namespace

void write_bundle(std::ostream& out, const ControllerBundle& b) {
  const auto old = out.precision(17);
  out << "a1 " << b.a1 << "\na2 " << b.a2 << "\na " << b.a << "\nvarsigma "
      << b.varsigma << "\neps_F " << b.eps_F << "\nscale " << b.scale << '\n';
  write_mat(out, "K", b.K);
  write_mat(out, "S", b.S.mat());
  write_mat(out, "F", b.F.mat());
  write_mat(out, "Y", b.Y);
  write_mat(out, "H", b.H.mat());
  out.precision(old);
}

ControllerBundle read_bundle(std::istream& in) {
  ControllerBundle b;
  b.a1 = read_scalar(in, "a1");
  b.a2 = read_scalar(in, "a2");
  b.a = read_scalar(in, "a");
  b.varsigma = read_scalar(in, "varsigma");
  b.eps_F = read_scalar(in, "eps_F");
  b.scale = read_scalar(in, "scale");
  b.K = read_mat(in, "K");
  b.S = SymMat(read_mat(in, "S"));
  b.F = SymMat(read_mat(in, "F"));
  b.Y = read_mat(in, "Y");
  b.H = SymMat(read_mat(in, "H"));
  return b;
}

}  // namespace ddetc
