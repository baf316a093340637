#include "ddetc/proximity_sets.hpp"

#include <algorithm>

#include "ddetc/errors.hpp"

namespace ddetc {

namespace {

void check_f(const DataWindow& w, const SymMat& f) {
  if (f.dim() != w.nx()) throw InvalidInput("proximity set: F has wrong size");
}

Mat stack_ab(const DataWindow& w, const Mat& ma, const Mat& mb) {
  if (ma.rows() != w.nx() || ma.cols() != w.nx() || mb.rows() != w.nx() ||
      mb.cols() != w.nu()) {
    throw InvalidInput("proximity set: (MA, MB) have wrong shapes");
  }
  Mat ab(w.nx(), w.nx() + w.nu());
  ab << ma, mb;
  return ab;
}

}  // namespace

EllipsoidParams ellipsoid_params(const DataWindow& w, const SymMat& f) {
  check_f(w, f);
  const Mat z = w.z();
  EllipsoidParams e;
  e.M = SymMat(z * z.transpose());
  const Mat zx = z * w.x().transpose();
  e.Zc = pinv(e.M.mat()) * zx;
  e.Delta = SymMat(zx.transpose() * e.Zc - w.x() * w.x().transpose()) + f;
  e.F = f;
  return e;
}

bool is_nonempty(const EllipsoidParams& e) { return is_psd(e.Delta); }

bool is_bounded(const EllipsoidParams& e) { return is_pd(e.M); }

double membership_tolerance(const SymMat& f) {
  return 1e-9 * (1.0 + std::max(std::abs(lambda_min(f)), std::abs(lambda_max(f))));
}

Mat data_mismatch(const DataWindow& w, const Mat& ma, const Mat& mb) {
  return stack_ab(w, ma, mb) * w.z() - w.x();
}

bool contains(const DataWindow& w, const SymMat& f, const Mat& ma,
              const Mat& mb, std::optional<double> tol) {
  check_f(w, f);
  const Mat d = data_mismatch(w, ma, mb);
  const SymMat gap = f - SymMat(d * d.transpose());
  return lambda_min(gap) >= -tol.value_or(membership_tolerance(f));
}

bool contains_ellipsoid(const EllipsoidParams& e, const Mat& ma, const Mat& mb,
                        std::optional<double> tol) {
  const Eigen::Index nx = e.Delta.dim();
  if (ma.rows() != nx || ma.cols() != nx || mb.rows() != nx ||
      ma.cols() + mb.cols() != e.M.dim()) {
    throw InvalidInput("contains_ellipsoid: (MA, MB) have wrong shapes");
  }
  Mat zhat(e.M.dim(), nx);
  zhat.topRows(nx) = ma.transpose();
  zhat.bottomRows(mb.cols()) = mb.transpose();
  const Mat diff = zhat - e.Zc;
  const SymMat gap = e.Delta - congruence(e.M, diff);
  return lambda_min(gap) >= -tol.value_or(membership_tolerance(e.F));
}

double min_inflation(const DataWindow& w, const SymMat& f, const SymMat& s,
                     const Mat& a_true, const Mat& b_true) {
  check_f(w, f);
  const Mat d = data_mismatch(w, a_true, b_true);
  const SymMat excess = SymMat(d * d.transpose()) - f;
  return std::max(0.0, gen_eig_max(excess, sym_inverse(s)));
}

}  // namespace ddetc
