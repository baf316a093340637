#pragma once

#include <initializer_list>

#include "ddetc/matrix_core.hpp"

namespace ddetc::test {

// Row-major literal: mat(2, 2, {1, 2, 3, 4}).
inline Mat mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  Mat m(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
  }
  return m;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace ddetc::test
