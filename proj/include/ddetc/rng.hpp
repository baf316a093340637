#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ddetc/matrix_core.hpp"

namespace ddetc {

/// Seedable, splittable generator. Uniform draws are built from raw 64-bit
/// output so sequences are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Independent child stream keyed by name; does not advance this stream.
  Rng split(std::string_view name) const;

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Standard normal via Box-Muller.
  double normal();
  Vec uniform_vec(Eigen::Index n, double lo, double hi);
  Mat normal_mat(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace ddetc
