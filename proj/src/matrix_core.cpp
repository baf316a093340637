#include "ddetc/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ddetc/errors.hpp"

namespace ddetc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 100;

void require_finite(const Mat& m, const char* what) {
  if (!all_finite(m)) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

bool is_exactly_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) return false;
    }
  }
  return true;
}

// Eigen-pairs of a symmetric matrix with the pseudo-inverse applied to the
// spectrum: 1 / lambda above the cutoff, 0 below.
Mat spectral_pinv(const SymEig& e, double cutoff) {
  Vec inv = Vec::Zero(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (std::abs(e.values(i)) > cutoff) inv(i) = 1.0 / e.values(i);
  }
  return e.vectors * inv.asDiagonal() * e.vectors.transpose();
}

}  // namespace

bool all_finite(const Mat& m) { return m.allFinite(); }

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("SymMat: matrix is not square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::Zero(Eigen::Index dim) { return SymMat(Mat::Zero(dim, dim)); }

SymMat SymMat::Identity(Eigen::Index dim) {
  return SymMat(Mat::Identity(dim, dim));
}

SymMat SymMat::Diagonal(const Vec& diag) {
  return SymMat(Mat(diag.asDiagonal()));
}

SymMat SymMat::operator+(const SymMat& o) const { return SymMat(m_ + o.m_); }
SymMat SymMat::operator-(const SymMat& o) const { return SymMat(m_ - o.m_); }
SymMat SymMat::operator*(double s) const { return SymMat(m_ * s); }

SymMat congruence(const SymMat& s, const Mat& b) {
  return SymMat(b.transpose() * s.mat() * b);
}

SymEig sym_eig(const SymMat& s) {
  require_finite(s.mat(), "sym_eig");
  const Eigen::Index n = s.dim();
  Mat a = s.mat();
  Mat v = Mat::Identity(n, n);

  const double scale = a.norm();
  if (n > 1 && scale > 0.0) {
    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
      double off = 0.0;
      for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
      }
      if (std::sqrt(off) <= kEps * scale * 1e-2) break;

      for (Eigen::Index p = 0; p < n - 1; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          // Rotation annihilating a(p, q); t = tan(phi) with |phi| <= pi/4.
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double sn = t * c;
          for (Eigen::Index k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - sn * akq;
            a(k, q) = sn * akp + c * akq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - sn * aqk;
            a(q, k) = sn * apk + c * aqk;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - sn * vkq;
            v(k, q) = sn * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i) < a(j, j);
  });
  SymEig out{Vec(n), Mat(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src);
    out.vectors.col(i) = v.col(src);
  }
  return out;
}

double lambda_min(const SymMat& s) {
  if (s.dim() == 0) throw InvalidInput("lambda_min: empty matrix");
  return sym_eig(s).values(0);
}

double lambda_max(const SymMat& s) {
  if (s.dim() == 0) throw InvalidInput("lambda_max: empty matrix");
  const auto e = sym_eig(s);
  return e.values(e.values.size() - 1);
}

double psd_tolerance(const SymMat& s, double rel) {
  if (s.dim() == 0) return rel;
  const auto e = sym_eig(s);
  const double big = std::max(std::abs(e.values(0)),
                              std::abs(e.values(e.values.size() - 1)));
  return rel * (1.0 + big);
}

bool is_psd(const SymMat& s, std::optional<double> tol) {
  const double t = tol.value_or(psd_tolerance(s));
  return lambda_min(s) >= -t;
}

bool is_pd(const SymMat& s, std::optional<double> tol) {
  const double t = tol.value_or(psd_tolerance(s));
  return lambda_min(s) >= t;
}

Mat pinv(const Mat& m, std::optional<double> tol) {
  require_finite(m, "pinv");
  if (tol && *tol < 0.0) throw InvalidInput("pinv: negative tolerance");
  if (m.size() == 0) return Mat::Zero(m.cols(), m.rows());

  if (is_exactly_symmetric(m)) {
    const auto e = sym_eig(SymMat(m));
    const double big = e.values.cwiseAbs().maxCoeff();
    const double cutoff =
        tol ? *tol : static_cast<double>(m.rows()) * kEps * big;
    if (big == 0.0) return Mat::Zero(m.cols(), m.rows());
    return spectral_pinv(e, cutoff);
  }

  // M^+ = (M^T M)^+ M^T.
  const SymMat gram(m.transpose() * m);
  const auto e = sym_eig(gram);
  const double big = e.values.cwiseAbs().maxCoeff();
  if (big == 0.0) return Mat::Zero(m.cols(), m.rows());
  const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
  const double cutoff = tol ? (*tol) * (*tol) : dim * kEps * big;
  return spectral_pinv(e, cutoff) * m.transpose();
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const SymMat gram(m.rows() <= m.cols() ? Mat(m * m.transpose())
                                          : Mat(m.transpose() * m));
  return std::sqrt(std::max(0.0, lambda_max(gram)));
}

SymMat sym_sqrt(const SymMat& s) {
  const auto e = sym_eig(s);
  const Vec r = e.values.cwiseMax(0.0).cwiseSqrt();
  return SymMat(e.vectors * r.asDiagonal() * e.vectors.transpose());
}

namespace {

void require_pd(const SymEig& e, const SymMat& s, const char* what) {
  const double norm = e.values.cwiseAbs().maxCoeff();
  if (!(e.values(0) > 1e-12 * norm) || norm == 0.0) {
    throw NotPositiveDefinite(std::string(what) +
                              ": matrix is not positive definite");
  }
  (void)s;
}

}  // namespace

SymMat sym_inv_sqrt(const SymMat& s) {
  const auto e = sym_eig(s);
  require_pd(e, s, "sym_inv_sqrt");
  const Vec r = e.values.cwiseSqrt().cwiseInverse();
  return SymMat(e.vectors * r.asDiagonal() * e.vectors.transpose());
}

SymMat sym_inverse(const SymMat& s) {
  const auto e = sym_eig(s);
  require_pd(e, s, "sym_inverse");
  return SymMat(e.vectors * e.values.cwiseInverse().asDiagonal() *
                e.vectors.transpose());
}

namespace {

SymEig whitened(const SymMat& a, const SymMat& b, SymMat* w_out) {
  if (a.dim() != b.dim()) throw InvalidInput("gen_eig: dimension mismatch");
  require_finite(a.mat(), "gen_eig");
  const auto eb = sym_eig(b);
  require_pd(eb, b, "gen_eig");
  const Vec r = eb.values.cwiseSqrt().cwiseInverse();
  SymMat w(eb.vectors * r.asDiagonal() * eb.vectors.transpose());
  auto out = sym_eig(congruence(a, w.mat()));
  if (w_out) *w_out = std::move(w);
  return out;
}

}  // namespace

double gen_eig_max(const SymMat& a, const SymMat& b) {
  const auto e = whitened(a, b, nullptr);
  return e.values(e.values.size() - 1);
}

double gen_eig_min(const SymMat& a, const SymMat& b) {
  return whitened(a, b, nullptr).values(0);
}

Vec gen_eig_max_vector(const SymMat& a, const SymMat& b) {
  SymMat w;
  const auto e = whitened(a, b, &w);
  return w.mat() * e.vectors.col(e.vectors.cols() - 1);
}

Mat n_map(const Mat& z) {
  if (z.size() == 0) throw InvalidInput("n_map: empty matrix");
  const Eigen::Index n = z.rows();
  const Eigen::Index t = z.cols();
  Mat out = Mat::Zero(n * t, t);
  for (Eigen::Index c = 0; c < t; ++c) out.block(n * c, c, n, 1) = z.col(c);
  return out;
}

Mat shift_append(const Mat& m, const Vec& col) {
  if (col.size() != m.rows() || m.cols() == 0) {
    throw InvalidInput("shift_append: column length does not match rows");
  }
  Mat out(m.rows(), m.cols());
  if (m.cols() > 1) out.leftCols(m.cols() - 1) = m.rightCols(m.cols() - 1);
  out.col(m.cols() - 1) = col;
  return out;
}

}  // namespace ddetc
