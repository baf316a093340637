#pragma once

#include <iosfwd>
#include <string>

#include "ddetc/matrix_core.hpp"
#include "ddetc/plant_models.hpp"

namespace ddetc {

/// Sliding data matrices (Xhat, X, U) of width T with counter kappa.
/// Column i of Xhat holds a state, the same column of X its successor and of
/// U the input applied in between.
class DataWindow {
 public:
  DataWindow() = default;
  /// Zero-initialized window.
  DataWindow(int nx, int nu, int width, long kappa0 = 0);
  DataWindow(Mat xhat, Mat x, Mat u, long kappa);

  int nx() const { return static_cast<int>(xhat_.rows()); }
  int nu() const { return static_cast<int>(u_.rows()); }
  int width() const { return static_cast<int>(xhat_.cols()); }
  long kappa() const { return kappa_; }
  const Mat& xhat() const { return xhat_; }
  const Mat& x() const { return x_; }
  const Mat& u() const { return u_; }

  /// New window with (x, x_plus, u) appended and kappa incremented.
  DataWindow push(const Vec& x, const Vec& x_plus, const Vec& u) const;

  /// Z = [Xhat; U].
  Mat z() const;

 private:
  Mat xhat_;
  Mat x_;
  Mat u_;
  long kappa_ = 0;
};

struct ZMatrix {
  Mat Z;
  int rank = 0;
};

/// Z = [Xhat; U] and its numerical rank from the spectrum of Z Z^T.
ZMatrix z_matrix(const DataWindow& w);

/// ||X - calA N(Xhat) - calB N(U)||_2.
double consistency_residual(const DataWindow& w, const StackedMats& s);

/// CSV snapshot: header kappa,Xhat_1..,X_1..,U_1.. then one line per row
/// index; the shorter U block is padded with empty cells.
void write_window_csv(std::ostream& out, const DataWindow& w);
std::string window_csv(const DataWindow& w);

}  // namespace ddetc
