#pragma once

#include <optional>

#include <Eigen/Dense>

namespace ddetc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetric matrix. Every constructor mirrors its argument through
/// (M + M^T) / 2, so symmetry holds exactly in floating point.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat Zero(Eigen::Index dim);
  static SymMat Identity(Eigen::Index dim);
  static SymMat Diagonal(const Vec& diag);

  Eigen::Index dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }  // NOLINT
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMat operator+(const SymMat& o) const;
  SymMat operator-(const SymMat& o) const;
  SymMat operator*(double s) const;
  friend SymMat operator*(double s, const SymMat& m) { return m * s; }

 private:
  Mat m_;
};

/// Congruence B^T S B, symmetrized.
SymMat congruence(const SymMat& s, const Mat& b);

struct SymEig {
  Vec values;    // ascending
  Mat vectors;   // orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Cyclic Jacobi eigendecomposition. Throws InvalidInput on non-finite input.
SymEig sym_eig(const SymMat& s);

double lambda_min(const SymMat& s);
double lambda_max(const SymMat& s);

/// Default PSD tolerance 1e-9 * (1 + max |lambda|).
double psd_tolerance(const SymMat& s, double rel = 1e-9);
/// lambda_min >= -tol (tol defaults to psd_tolerance).
bool is_psd(const SymMat& s, std::optional<double> tol = std::nullopt);
/// lambda_min >= +tol.
bool is_pd(const SymMat& s, std::optional<double> tol = std::nullopt);

/// Moore-Penrose pseudoinverse. `tol` is a singular-value cutoff; by default
/// eigenvalues of M^T M (or of M itself when symmetric) below
/// dim * eps * lambda_max are treated as zero.
Mat pinv(const Mat& m, std::optional<double> tol = std::nullopt);

/// Spectral norm via the largest eigenvalue of M^T M.
double spectral_norm(const Mat& m);

/// Principal square root and inverse square root of a PSD / PD matrix.
SymMat sym_sqrt(const SymMat& s);
SymMat sym_inv_sqrt(const SymMat& s);
SymMat sym_inverse(const SymMat& s);

/// Extreme eigenvalues of B^{-1/2} A B^{-1/2}. gen_eig_min(A, B) is the
/// largest t with t B <= A; gen_eig_max(A, B) the smallest t with A <= t B.
/// Throws NotPositiveDefinite unless lambda_min(B) > 1e-12 * ||B||.
double gen_eig_max(const SymMat& a, const SymMat& b);
double gen_eig_min(const SymMat& a, const SymMat& b);
/// Eigenvector x (unit in the B-norm) attaining gen_eig_max.
Vec gen_eig_max_vector(const SymMat& a, const SymMat& b);

/// Block-diagonal column stacking: an n x T matrix maps to nT x T with column
/// t holding z_t in rows [n t, n (t+1)).
Mat n_map(const Mat& z);

/// Drops the first column and appends `col` as the last one.
Mat shift_append(const Mat& m, const Vec& col);

bool all_finite(const Mat& m);

}  // namespace ddetc
