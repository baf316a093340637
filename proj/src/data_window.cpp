#include "ddetc/data_window.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <sstream>

#include "ddetc/errors.hpp"

namespace ddetc {

DataWindow::DataWindow(int nx, int nu, int width, long kappa0)
    : xhat_(Mat::Zero(nx, width)),
      x_(Mat::Zero(nx, width)),
      u_(Mat::Zero(nu, width)),
      kappa_(kappa0) {
  if (nx < 1 || nu < 1 || width < 1) {
    throw InvalidInput("DataWindow: nx, nu and width must be >= 1");
  }
}

DataWindow::DataWindow(Mat xhat, Mat x, Mat u, long kappa)
    : xhat_(std::move(xhat)), x_(std::move(x)), u_(std::move(u)), kappa_(kappa) {
  if (xhat_.cols() < 1 || x_.cols() != xhat_.cols() ||
      u_.cols() != xhat_.cols() || x_.rows() != xhat_.rows() ||
      xhat_.rows() < 1 || u_.rows() < 1) {
    throw InvalidInput("DataWindow: inconsistent matrix shapes");
  }
}

DataWindow DataWindow::push(const Vec& x, const Vec& x_plus,
                            const Vec& u) const {
  if (x.size() != nx() || x_plus.size() != nx() || u.size() != nu()) {
    throw InvalidInput("DataWindow::push: dimension mismatch");
  }
  DataWindow out;
  out.xhat_ = shift_append(xhat_, x);
  out.x_ = shift_append(x_, x_plus);
  out.u_ = shift_append(u_, u);
  out.kappa_ = kappa_ + 1;
  return out;
}

Mat DataWindow::z() const {
  Mat z(nx() + nu(), width());
  z.topRows(nx()) = xhat_;
  z.bottomRows(nu()) = u_;
  return z;
}

ZMatrix z_matrix(const DataWindow& w) {
  ZMatrix out{w.z(), 0};
  const SymMat m(out.Z * out.Z.transpose());
  const auto e = sym_eig(m);
  const double big = e.values.cwiseAbs().maxCoeff();
  if (big == 0.0) return out;
  const double cutoff = static_cast<double>(m.dim()) *
                        std::numeric_limits<double>::epsilon() * big;
  out.rank = static_cast<int>((e.values.array() > cutoff).count());
  return out;
}

double consistency_residual(const DataWindow& w, const StackedMats& s) {
  if (s.calA.cols() != static_cast<Eigen::Index>(w.nx()) * w.width() ||
      s.calB.cols() != static_cast<Eigen::Index>(w.nu()) * w.width()) {
    throw InvalidInput("consistency_residual: stacked matrices do not match");
  }
  const Mat r = w.x() - s.calA * n_map(w.xhat()) - s.calB * n_map(w.u());
  return spectral_norm(r);
}

void write_window_csv(std::ostream& out, const DataWindow& w) {
  const int t = w.width();
  out << "kappa";
  for (const char* name : {"Xhat", "X", "U"}) {
    for (int c = 1; c <= t; ++c) out << ',' << name << '_' << c;
  }
  out << '\n';
  out.precision(17);
  const int rows = std::max(w.nx(), w.nu());
  for (int r = 0; r < rows; ++r) {
    out << w.kappa();
    for (const Mat* m : {&w.xhat(), &w.x(), &w.u()}) {
      for (int c = 0; c < t; ++c) {
        out << ',';
        if (r < m->rows()) out << (*m)(r, c);
      }
    }
    out << '\n';
  }
}

std::string window_csv(const DataWindow& w) {
  std::ostringstream s;
  write_window_csv(s, w);
  return s.str();
}

}  // namespace ddetc
