#include "ddetc/plant_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>

#include "ddetc/errors.hpp"

namespace ddetc {

const char* to_string(PlantKind k) {
  switch (k) {
    case PlantKind::Switching:
      return "switching";
    case PlantKind::Sinusoidal:
      return "sinusoidal";
    case PlantKind::VanishingPerturbation:
      return "vanishing";
    case PlantKind::PiecewiseFile:
      return "piecewise";
    case PlantKind::ConstantLti:
      return "constant";
  }
  return "?";
}

Mat reference_a0() {
  Mat a(2, 2);
  a << 1.1, 0.1, 0.1, 0.2;
  return a;
}

Mat reference_b0() {
  Mat b(2, 2);
  b << 0.5, 1.0, 0.1, 0.2;
  return b;
}

Mat flipped_input_matrix(const Mat& b0, double ell) {
  Mat b = b0;
  b.col(b.cols() - 1) *= -ell;
  return b;
}

namespace {

void check_pair(const Mat& a, const Mat& b) {
  if (a.rows() == 0 || a.rows() != a.cols() || b.rows() != a.rows() ||
      b.cols() == 0) {
    throw InvalidInput("plant: A must be nx x nx and B nx x nu");
  }
  if (!all_finite(a) || !all_finite(b)) {
    throw InvalidInput("plant: non-finite matrix entries");
  }
}

}  // namespace

LtvPlant LtvPlant::switching(Mat a0, Mat b_first, Mat b_second, int period) {
  check_pair(a0, b_first);
  check_pair(a0, b_second);
  if (b_first.cols() != b_second.cols()) {
    throw InvalidInput("switching plant: input matrices differ in shape");
  }
  if (period < 1) throw InvalidInput("switching plant: period must be >= 1");
  LtvPlant p;
  p.kind_ = PlantKind::Switching;
  p.a0_ = std::move(a0);
  p.b0_ = std::move(b_first);
  p.b_alt_ = std::move(b_second);
  p.period_ = period;
  return p;
}

LtvPlant LtvPlant::sinusoidal(Mat a0, Mat b0, int period, double delta) {
  check_pair(a0, b0);
  if (period < 1) throw InvalidInput("sinusoidal plant: period must be >= 1");
  if (!std::isfinite(delta)) throw InvalidInput("sinusoidal plant: bad delta");
  LtvPlant p;
  p.kind_ = PlantKind::Sinusoidal;
  p.a0_ = std::move(a0);
  p.b0_ = std::move(b0);
  p.period_ = period;
  p.delta_ = delta;
  return p;
}

LtvPlant LtvPlant::vanishing(Mat a0, Mat b0, int period, int t_delta,
                             double delta0) {
  check_pair(a0, b0);
  if (period < 1 || t_delta < 1) {
    throw InvalidInput("vanishing plant: period and t_delta must be >= 1");
  }
  LtvPlant p;
  p.kind_ = PlantKind::VanishingPerturbation;
  p.a0_ = std::move(a0);
  p.b0_ = std::move(b0);
  p.period_ = period;
  p.t_delta_ = t_delta;
  p.delta_ = delta0;
  return p;
}

LtvPlant LtvPlant::constant(Mat a, Mat b) {
  check_pair(a, b);
  LtvPlant p;
  p.kind_ = PlantKind::ConstantLti;
  p.a0_ = std::move(a);
  p.b0_ = std::move(b);
  return p;
}

LtvPlant LtvPlant::piecewise(std::vector<Knot> knots, Interpolation mode) {
  if (knots.empty()) throw InvalidInput("piecewise plant: no knots");
  for (const auto& kn : knots) {
    check_pair(kn.A, kn.B);
    if (kn.A.rows() != knots.front().A.rows() ||
        kn.B.cols() != knots.front().B.cols()) {
      throw InvalidInput("piecewise plant: knot shapes differ");
    }
  }
  std::stable_sort(knots.begin(), knots.end(),
                   [](const Knot& a, const Knot& b) { return a.k < b.k; });
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].k == knots[i - 1].k) {
      throw InvalidInput("piecewise plant: duplicate knot time");
    }
  }
  LtvPlant p;
  p.kind_ = PlantKind::PiecewiseFile;
  p.a0_ = knots.front().A;
  p.b0_ = knots.front().B;
  p.knots_ = std::move(knots);
  p.mode_ = mode;
  return p;
}

LtvPlant LtvPlant::parse_piecewise(std::istream& in) {
  int nx = 0, nu = 0, count = 0;
  std::string mode;
  if (!(in >> nx >> nu >> count >> mode) || nx < 1 || nu < 1 || count < 1) {
    throw InvalidInput("piecewise plant: bad header");
  }
  Interpolation interp;
  if (mode == "hold") {
    interp = Interpolation::Hold;
  } else if (mode == "linear") {
    interp = Interpolation::Linear;
  } else {
    throw InvalidInput("piecewise plant: unknown mode '" + mode + "'");
  }
  std::vector<Knot> knots;
  for (int i = 0; i < count; ++i) {
    Knot kn;
    kn.A.resize(nx, nx);
    kn.B.resize(nx, nu);
    if (!(in >> kn.k)) throw InvalidInput("piecewise plant: truncated file");
    for (int r = 0; r < nx; ++r) {
      for (int c = 0; c < nx; ++c) {
        if (!(in >> kn.A(r, c))) {
          throw InvalidInput("piecewise plant: truncated A entries");
        }
      }
    }
    for (int r = 0; r < nx; ++r) {
      for (int c = 0; c < nu; ++c) {
        if (!(in >> kn.B(r, c))) {
          throw InvalidInput("piecewise plant: truncated B entries");
        }
      }
    }
    knots.push_back(std::move(kn));
  }
  return piecewise(std::move(knots), interp);
}

LtvPlant LtvPlant::load_piecewise(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("piecewise plant: cannot open " + path);
  return parse_piecewise(in);
}

Mat LtvPlant::perturbed_a(double delta, long k) const {
  const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                            static_cast<double>(period_));
  Vec d(a0_.rows());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d(i) = 1.0 + delta * (i % 2 == 0 ? c : -c);
  }
  return a0_ * d.asDiagonal();
}

PlantMatrices LtvPlant::eval(long k) const {
  if (k < 0) throw InvalidInput("plant eval: negative time index");
  switch (kind_) {
    case PlantKind::ConstantLti:
      return {a0_, b0_};
    case PlantKind::Switching: {
      const long z = k == 0 ? 1 : (k - 1) / period_ + 1;
      return {a0_, z % 2 == 1 ? b0_ : b_alt_};
    }
    case PlantKind::Sinusoidal:
      return {perturbed_a(delta_, k), b0_};
    case PlantKind::VanishingPerturbation: {
      const double d =
          k <= t_delta_ ? delta_ * (1.0 - static_cast<double>(k) / t_delta_)
                        : 0.0;
      return {perturbed_a(d, k), b0_};
    }
    case PlantKind::PiecewiseFile: {
      if (k <= knots_.front().k) return {knots_.front().A, knots_.front().B};
      if (k >= knots_.back().k) return {knots_.back().A, knots_.back().B};
      const auto hi = std::upper_bound(
          knots_.begin(), knots_.end(), k,
          [](long v, const Knot& kn) { return v < kn.k; });
      const auto lo = hi - 1;
      if (mode_ == Interpolation::Hold) return {lo->A, lo->B};
      const double w = static_cast<double>(k - lo->k) /
                       static_cast<double>(hi->k - lo->k);
      return {(1.0 - w) * lo->A + w * hi->A, (1.0 - w) * lo->B + w * hi->B};
    }
  }
  throw InvalidInput("plant eval: unknown plant kind");
}

Vec LtvPlant::step(long k, const Vec& x, const Vec& u) const {
  if (x.size() != nx() || u.size() != nu()) {
    throw InvalidInput("plant step: state or input has the wrong size");
  }
  const auto m = eval(k);
  return m.A * x + m.B * u;
}

StackedMats LtvPlant::stacked(long kappa, int window) const {
  if (window < 1) throw InvalidInput("stacked: window must be >= 1");
  if (kappa < window) throw InvalidInput("stacked: kappa < window");
  StackedMats s{Mat(nx(), nx() * window), Mat(nx(), nu() * window)};
  for (int i = 0; i < window; ++i) {
    const auto m = eval(kappa - window + i);
    s.calA.block(0, nx() * i, nx(), nx()) = m.A;
    s.calB.block(0, nu() * i, nx(), nu()) = m.B;
  }
  return s;
}

}  // namespace ddetc
