#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace qwalk {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Spinor = Eigen::Vector2cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Which asymptotic half-line a quantity belongs to.
enum class Side { left, right };

/// Eigenvalue branch of the Fourier symbol. `first` carries velocity
/// -ς/η (it is the left mover for a diagonal coin).
enum class Branch : int { first = 1, second = 2 };

/// Half-period index of the momentum intervals on which the velocity is
/// invertible.
enum class HalfPeriod : int { zero = 0, one = 1 };

inline constexpr std::array<Branch, 2> kBranches{Branch::first, Branch::second};
inline constexpr std::array<HalfPeriod, 2> kHalfPeriods{HalfPeriod::zero, HalfPeriod::one};
inline constexpr std::array<Side, 2> kSides{Side::left, Side::right};

inline int index(Branch j) { return static_cast<int>(j) - 1; }

/// (-1)^j
inline double parity(Branch j) { return j == Branch::first ? -1.0 : 1.0; }

/// (-1)^(j+m)
inline double parity(Branch j, HalfPeriod m) {
  return m == HalfPeriod::zero ? parity(j) : -parity(j);
}

inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double t) {
  double r = std::remainder(t, two_pi);
  if (r <= -pi) r += two_pi;
  return r;
}

/// Reduces an angle into [0, 2pi).
inline double wrap_positive(double t) {
  double r = std::fmod(t, two_pi);
  if (r < 0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r;
}

/// Signed distance between two angles, in (-pi, pi].
inline double angle_distance(double s, double t) { return wrap_angle(s - t); }

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qwalk
