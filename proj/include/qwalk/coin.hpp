#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "qwalk/errors.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// A 2x2 unitary together with its (a, b, alpha, beta, delta) coordinates,
///
///   C = e^{i delta/2} [[ a e^{i(alpha - delta/2)},  b e^{i(beta - delta/2)} ],
///                      [-b e^{-i(beta - delta/2)}, a e^{-i(alpha - delta/2)} ]],
///
/// so that C00 = a e^{i alpha}, C01 = b e^{i beta} and det C = e^{i delta}.
/// Angles live in (-pi, pi]; alpha is pinned to 0 when a = 0 and beta when b = 0.
struct CoinMatrix {
  Mat2 entries = Mat2::Identity();
  double a = 1.0;
  double b = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;

  /// k-independent phase offset alpha - delta/2 that appears in every symbol formula.
  double phase_shift() const { return alpha - 0.5 * delta; }
};

/// Threshold used to decide that a coordinate vanishes when pinning angles.
inline constexpr double kDegenerateTol = 1e-14;

inline double unitarity_defect(const Mat2& m) {
  return max_abs(m.adjoint() * m - Mat2::Identity());
}

inline bool is_unitary(const Mat2& m, double tol = 1e-12) {
  return m.allFinite() && unitarity_defect(m) <= tol;
}

inline Mat2 matrix_from_params(double a, double b, double alpha, double beta, double delta) {
  const cplx i(0.0, 1.0);
  const cplx half = std::exp(i * (0.5 * delta));
  Mat2 m;
  m(0, 0) = a * std::exp(i * (alpha - 0.5 * delta));
  m(0, 1) = b * std::exp(i * (beta - 0.5 * delta));
  m(1, 0) = -b * std::exp(-i * (beta - 0.5 * delta));
  m(1, 1) = a * std::exp(-i * (alpha - 0.5 * delta));
  return half * m;
}

inline CoinMatrix coin_from_params(double a, double alpha, double beta, double delta) {
  if (!(a >= 0.0 && a <= 1.0)) {
    std::ostringstream os;
    os << "coin parameter a = " << a << " is outside [0, 1]";
    throw DomainError(os.str(), "a");
  }
  CoinMatrix c;
  c.a = a;
  c.b = std::sqrt(std::max(0.0, 1.0 - a * a));
  c.alpha = c.a <= kDegenerateTol ? 0.0 : wrap_angle(alpha);
  c.beta = c.b <= kDegenerateTol ? 0.0 : wrap_angle(beta);
  c.delta = wrap_angle(delta);
  c.entries = matrix_from_params(c.a, c.b, c.alpha, c.beta, c.delta);
  return c;
}

/// Inverse of coin_from_params. Throws ValidationError for non-unitary input.
inline CoinMatrix params_from_matrix(const Mat2& m, double tol = 1e-10) {
  if (!m.allFinite() || unitarity_defect(m) > tol) {
    std::ostringstream os;
    os << "matrix is not unitary (defect " << unitarity_defect(m) << ")";
    throw ValidationError(os.str());
  }
  CoinMatrix c;
  c.entries = m;
  c.a = std::min(1.0, std::abs(m(0, 0)));
  c.b = std::sqrt(std::max(0.0, 1.0 - c.a * c.a));
  c.delta = wrap_angle(std::arg(m.determinant()));
  c.alpha = c.a <= kDegenerateTol ? 0.0 : wrap_angle(std::arg(m(0, 0)));
  c.beta = c.b <= kDegenerateTol ? 0.0 : wrap_angle(std::arg(m(0, 1)));
  return c;
}

/// Nearest unitary (polar factor) of an invertible 2x2 matrix.
inline Mat2 unitarize(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Decay rule for the coin far from the origin on one side:
///   C(x) = polar(C_side + |x|^{-1-epsilon} P).
/// `kappa` is the declared constant of the short-range bound
///   ||C(x) - C_side|| <= kappa |x|^{-1-epsilon}.
struct TailRule {
  double epsilon = 1.0;
  double kappa = 2.0;
  Mat2 perturbation = Mat2::Zero();
};

/// Position-dependent coin x -> C(x) with left/right asymptotic coins,
/// finitely many site overrides and optional algebraic tails.
/// Sites x >= 0 belong to the right asymptotic region.
class CoinField {
 public:
  CoinField() = default;
  CoinField(CoinMatrix left, CoinMatrix right) : left_(std::move(left)), right_(std::move(right)) {}

  static CoinField homogeneous(const CoinMatrix& c) { return CoinField(c, c); }

  /// Two-phase field: C_left on x < 0, C_right on x >= 0.
  static CoinField two_phase(const CoinMatrix& left, const CoinMatrix& right) {
    return CoinField(left, right);
  }

  CoinField with_override(long x, const Mat2& m) const {
    if (!is_unitary(m)) {
      std::ostringstream os;
      os << "override at x = " << x << " is not unitary (defect " << unitarity_defect(m) << ")";
      throw ValidationError(os.str(), "override." + std::to_string(x));
    }
    CoinField f = *this;
    f.overrides_[x] = m;
    return f;
  }

  CoinField with_tail(Side side, const TailRule& rule) const {
    if (!(rule.epsilon > 0.0) || !(rule.kappa > 0.0)) {
      throw ValidationError("tail rule needs epsilon > 0 and kappa > 0",
                            std::string("tail.") + to_string(side));
    }
    CoinField f = *this;
    (side == Side::left ? f.left_tail_ : f.right_tail_) = rule;
    f.validate_tail(side);
    return f;
  }

  const CoinMatrix& left() const { return left_; }
  const CoinMatrix& right() const { return right_; }
  const CoinMatrix& asymptotic(Side s) const { return s == Side::left ? left_ : right_; }
  const std::map<long, Mat2>& overrides() const { return overrides_; }
  const std::optional<TailRule>& tail(Side s) const {
    return s == Side::left ? left_tail_ : right_tail_;
  }

  bool has_tail() const { return left_tail_.has_value() || right_tail_.has_value(); }

  /// True when C(x) is the same matrix for every x.
  bool is_homogeneous() const {
    return overrides_.empty() && !has_tail() && left_.entries == right_.entries;
  }

  Mat2 at(long x) const {
    if (auto it = overrides_.find(x); it != overrides_.end()) return it->second;
    const bool beyond_overrides =
        overrides_.empty() || x < overrides_.begin()->first || x > overrides_.rbegin()->first;
    if (beyond_overrides && x != 0) {
      const Side s = x < 0 ? Side::left : Side::right;
      if (const auto& t = tail(s)) return tail_value(asymptotic(s), *t, x);
    }
    return x < 0 ? left_.entries : right_.entries;
  }

 private:
  static Mat2 tail_value(const CoinMatrix& c, const TailRule& t, long x) {
    const double scale = std::pow(std::abs(static_cast<double>(x)), -1.0 - t.epsilon);
    return unitarize(c.entries + scale * t.perturbation);
  }

  // Samples the declared short-range bound on a geometric set of sites.
  void validate_tail(Side s) const {
    const auto& t = *tail(s);
    const CoinMatrix& c = asymptotic(s);
    for (long r = 1; r <= (1L << 20); r *= 2) {
      for (long d : {r, r + r / 3 + 1}) {
        const long x = s == Side::left ? -d : d;
        const Mat2 m = tail_value(c, t, x);
        const double dev = (m - c.entries).operatorNorm();
        const double bound = t.kappa * std::pow(static_cast<double>(d), -1.0 - t.epsilon);
        if (dev > bound * (1.0 + 1e-12)) {
          std::ostringstream os;
          os << "tail on the " << to_string(s) << " violates the declared bound at x = " << x
             << " (deviation " << dev << " > " << bound << ")";
          throw ValidationError(os.str(), std::string("tail.") + to_string(s) + ".kappa");
        }
      }
    }
  }

  CoinMatrix left_;
  CoinMatrix right_;
  std::map<long, Mat2> overrides_;
  std::optional<TailRule> left_tail_;
  std::optional<TailRule> right_tail_;
};

inline Mat2 coin_at(const CoinField& field, long x) { return field.at(x); }

}  // namespace qwalk
