#pragma once

#include <optional>

#include "ddetc/data_window.hpp"
#include "ddetc/matrix_core.hpp"

namespace ddetc {

/// Ellipsoidal description of the proximity set: Zhat = [MA MB]^T is a member
/// iff (Zhat - Zc)^T M (Zhat - Zc) <= Delta.
struct EllipsoidParams {
  SymMat M;      // Z Z^T
  Mat Zc;        // M^+ Z X^T
  SymMat Delta;  // X Z^T M^+ Z X^T - X X^T + F
  SymMat F;
};

EllipsoidParams ellipsoid_params(const DataWindow& w, const SymMat& f);

bool is_nonempty(const EllipsoidParams& e);
bool is_bounded(const EllipsoidParams& e);

/// Tolerance shared by both membership forms: 1e-9 * (1 + ||F||).
double membership_tolerance(const SymMat& f);

/// Data mismatch [MA MB] Z - X.
Mat data_mismatch(const DataWindow& w, const Mat& ma, const Mat& mb);

/// D D^T <= F with D the data mismatch of (MA, MB).
bool contains(const DataWindow& w, const SymMat& f, const Mat& ma,
              const Mat& mb, std::optional<double> tol = std::nullopt);

/// Same test through the quadratic form of the ellipsoid.
bool contains_ellipsoid(const EllipsoidParams& e, const Mat& ma, const Mat& mb,
                        std::optional<double> tol = std::nullopt);

/// Smallest eps >= 0 with D D^T <= F + eps S^{-1}, D built from the true
/// plant matrices.
double min_inflation(const DataWindow& w, const SymMat& f, const SymMat& s,
                     const Mat& a_true, const Mat& b_true);

}  // namespace ddetc
