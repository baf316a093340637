#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddetc/matrix_core.hpp"

namespace ddetc {

enum class PlantKind {
  Switching,
  Sinusoidal,
  VanishingPerturbation,
  PiecewiseFile,
  ConstantLti
};

const char* to_string(PlantKind k);

enum class Interpolation { Hold, Linear };

struct PlantMatrices {
  Mat A;
  Mat B;
};

/// Row-concatenated plant matrices over a data window:
/// calA = [A(kappa - T) ... A(kappa - 1)], calB likewise.
struct StackedMats {
  Mat calA;
  Mat calB;
};

struct Knot {
  long k = 0;
  Mat A;
  Mat B;
};

/// Discrete-time LTV plant x(k+1) = A(k) x(k) + B(k) u(k). Immutable.
class LtvPlant {
 public:
  /// B alternates between b_first and b_second on blocks of `period` steps:
  /// k in [1 + p(z-1), p z] uses b_first for odd z, b_second for even z.
  /// k = 0 belongs to the first branch.
  static LtvPlant switching(Mat a0, Mat b_first, Mat b_second, int period);

  /// A(k) = A0 (I + delta * diag(c, -c, c, -c, ...)), c = cos(2 pi k / p).
  static LtvPlant sinusoidal(Mat a0, Mat b0, int period, double delta);

  /// Sinusoidal perturbation whose amplitude decays linearly:
  /// delta(k) = delta0 (1 - k / t_delta) for k <= t_delta, 0 afterwards.
  static LtvPlant vanishing(Mat a0, Mat b0, int period, int t_delta,
                            double delta0 = 1.0);

  static LtvPlant constant(Mat a, Mat b);

  /// Knot-based plant; `knots` need not be sorted.
  static LtvPlant piecewise(std::vector<Knot> knots, Interpolation mode);

  /// Text format: "nx nu num_knots mode" (mode = hold | linear), then per
  /// knot its time k followed by row-major A then row-major B.
  static LtvPlant parse_piecewise(std::istream& in);
  static LtvPlant load_piecewise(const std::string& path);

  PlantKind kind() const { return kind_; }
  int nx() const { return static_cast<int>(a0_.rows()); }
  int nu() const { return static_cast<int>(b0_.cols()); }

  PlantMatrices eval(long k) const;
  Vec step(long k, const Vec& x, const Vec& u) const;
  StackedMats stacked(long kappa, int window) const;

 private:
  LtvPlant() = default;
  Mat perturbed_a(double delta, long k) const;

  PlantKind kind_ = PlantKind::ConstantLti;
  Mat a0_;
  Mat b0_;
  Mat b_alt_;
  int period_ = 1;
  double delta_ = 0.0;
  int t_delta_ = 1;
  std::vector<Knot> knots_;
  Interpolation mode_ = Interpolation::Hold;
};

/// The two-state, two-input nominal plant used by the reference scenarios.
Mat reference_a0();
Mat reference_b0();
/// b0 with its last column scaled by -ell: [[0.5, -ell], [0.1, -0.2 ell]]
/// for the reference b0.
Mat flipped_input_matrix(const Mat& b0, double ell);

}  // namespace ddetc
