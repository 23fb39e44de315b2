#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/momentum.hpp"
#include "qwalk/quadrature.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Konno function sqrt(1-r^2) / (pi (1-v^2) sqrt(r^2-v^2)) on |v| < r, zero elsewhere.
inline double konno_density(double v, double r) {
  if (!(r > 0.0) || r > 1.0) {
    std::ostringstream os;
    os << "Konno parameter r = " << r << " is outside (0, 1]";
    throw DomainError(os.str(), "r");
  }
  if (std::abs(v) >= r) return 0.0;
  return std::sqrt(1.0 - r * r) / (pi * (1.0 - v * v) * std::sqrt(r * r - v * v));
}

namespace detail {

inline void require_dispersive(const CoinMatrix& c) {
  if (c.a <= kDegenerateTol || c.b <= kDegenerateTol) {
    std::ostringstream os;
    os << "velocity change of variables needs 0 < a < 1 (got a = " << c.a << ")";
    throw UnsupportedCaseError(os.str());
  }
}

// Centre of the half-period interval I_m, where the velocity vanishes.
inline double interval_centre(const CoinMatrix& c, HalfPeriod m) {
  return 0.5 * c.delta - c.alpha + (m == HalfPeriod::one ? pi : 0.0);
}

// k_{j,m} written in the angle theta with v = a sin(theta). On [-pi/2, pi/2]
// arcsin(b v / (a sqrt(1 - v^2))) = atan2(b sin(theta), cos(theta)), which
// stays analytic up to the endpoints.
inline double k_of_theta(const CoinMatrix& c, double theta, Branch j, HalfPeriod m) {
  return wrap_positive(interval_centre(c, m) +
                       parity(j, m) * std::atan2(c.b * std::sin(theta), std::cos(theta)));
}

}  // namespace detail

/// k_{j,m}(v) = delta/2 - alpha + m pi + arcsin((-1)^{j+m} b v / (a sqrt(1-v^2))) mod 2 pi.
inline double k_map(double v, const CoinMatrix& c, Branch j, HalfPeriod m) {
  detail::require_dispersive(c);
  if (std::abs(v) > c.a) {
    std::ostringstream os;
    os << "velocity " << v << " is outside [-a, a] with a = " << c.a;
    throw DomainError(os.str(), "v");
  }
  const double s = std::clamp(c.b * v / (c.a * std::sqrt(1.0 - v * v)), -1.0, 1.0);
  return wrap_positive(detail::interval_centre(c, m) + parity(j, m) * std::asin(s));
}

/// dk_{j,m}/dv = (-1)^{j+m} pi f_K(v, a).
inline double k_map_derivative(double v, const CoinMatrix& c, Branch j, HalfPeriod m) {
  detail::require_dispersive(c);
  if (std::abs(v) >= c.a) {
    std::ostringstream os;
    os << "derivative of the momentum map is singular at |v| = " << std::abs(v) << " >= a";
    throw DomainError(os.str(), "v");
  }
  return parity(j, m) * pi * konno_density(v, c.a);
}

/// True when k lies in the closed half-period interval I_m.
inline bool in_interval(double k, const CoinMatrix& c, HalfPeriod m) {
  return std::abs(angle_distance(k, detail::interval_centre(c, m))) <= 0.5 * pi + 1e-12;
}

inline constexpr std::size_t kDefaultNodesPerHalf = 513;

/// Quadrature grid for G_* = L^2([-a, a], f_K/2 dv) in the angle v = a sin(theta).
/// The left and right halves [-a, 0) and (0, a] each carry a Gauss-Legendre
/// rule, so integrands with a jump at v = 0 are still integrated spectrally.
/// `weight` already contains the measure f_K/2 dv.
struct VelocityGrid {
  double a = 0.0;
  std::vector<double> theta;
  std::vector<double> upsilon;
  std::vector<double> weight;

  std::size_t size() const { return theta.size(); }

  static VelocityGrid half(double a, Side side, std::size_t nodes = kDefaultNodesPerHalf) {
    if (!(a > 0.0 && a < 1.0)) {
      std::ostringstream os;
      os << "velocity grid needs 0 < a < 1 (got a = " << a << ")";
      throw UnsupportedCaseError(os.str());
    }
    const QuadratureRule q = side == Side::left ? gauss_legendre(nodes, -0.5 * pi, 0.0)
                                                : gauss_legendre(nodes, 0.0, 0.5 * pi);
    VelocityGrid g;
    g.a = a;
    g.theta = q.nodes;
    g.upsilon.resize(nodes);
    g.weight.resize(nodes);
    const double c = std::sqrt(1.0 - a * a) / (2.0 * pi);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double s = std::sin(q.nodes[i]);
      g.upsilon[i] = a * s;
      g.weight[i] = q.weights[i] * c / (1.0 - a * a * s * s);
    }
    return g;
  }

  static VelocityGrid full(double a, std::size_t nodes_per_half = kDefaultNodesPerHalf) {
    VelocityGrid g = half(a, Side::left, nodes_per_half);
    const VelocityGrid r = half(a, Side::right, nodes_per_half);
    g.theta.insert(g.theta.end(), r.theta.begin(), r.theta.end());
    g.upsilon.insert(g.upsilon.end(), r.upsilon.begin(), r.upsilon.end());
    g.weight.insert(g.weight.end(), r.weight.begin(), r.weight.end());
    return g;
  }
};

/// Samples of a function on a VelocityGrid.
template <class T>
struct VelocitySamples {
  VelocityGrid grid;
  std::vector<T> values;
  Side side = Side::right;  ///< asymptotic side whose coin defines the grid

  /// Integral of |g|^2 (complex) or g (real) against f_K/2 dv.
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if constexpr (std::is_same_v<T, cplx>)
        s += grid.weight[i] * std::norm(values[i]);
      else
        s += grid.weight[i] * values[i];
    }
    return s;
  }
};

using VelocityDensitySamples = VelocitySamples<cplx>;

namespace detail {

inline void require_matching_grid(const CoinMatrix& c, const VelocityGrid& g) {
  require_dispersive(c);
  if (std::abs(g.a - c.a) > 1e-12) {
    std::ostringstream os;
    os << "velocity grid built for a = " << g.a << " used with a coin of a = " << c.a;
    throw DomainError(os.str(), "grid");
  }
}

}  // namespace detail

/// (K_{j,m} Psi)(v) = < u_j(k_{j,m}(v)), (F Psi)(k_{j,m}(v)) >.
inline VelocityDensitySamples apply_K(const LatticeState& state, const CoinMatrix& c, Branch j,
                                      HalfPeriod m, const VelocityGrid& grid) {
  detail::require_matching_grid(c, grid);
  VelocityDensitySamples out{grid, std::vector<cplx>(grid.size()), Side::right};
  if (state.empty()) return out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = detail::k_of_theta(c, grid.theta[i], j, m);
    out.values[i] = eigensystem(c, k).vector(j).dot(fourier_at(state, k));
  }
  return out;
}

inline VelocityDensitySamples apply_K(const LatticeState& state, const FreeModel& model, Branch j,
                                      HalfPeriod m, const VelocityGrid& grid) {
  return apply_K(state, model.coin, j, m, grid);
}

/// (K_{j,m}^* g)(x) = int e^{i k x} g(v) u_j(k) f_K/2 dv with k = k_{j,m}(v),
/// evaluated on the sites [first, last].
inline LatticeState apply_K_adjoint(const VelocityDensitySamples& g, const CoinMatrix& c, Branch j,
                                    HalfPeriod m, long first, long last) {
  detail::require_matching_grid(c, g.grid);
  LatticeState out = LatticeState::zeros(first, last);
  auto& amp = out.amplitudes();
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    if (g.values[i] == cplx(0.0)) continue;
    const double k = detail::k_of_theta(c, g.grid.theta[i], j, m);
    const Spinor coeff = (g.grid.weight[i] * g.values[i]) * eigensystem(c, k).vector(j);
    const cplx z = std::polar(1.0, k);
    cplx e = std::polar(1.0, k * static_cast<double>(first));
    for (auto& site : amp) {
      site += e * coeff;
      e *= z;
    }
  }
  return out;
}

inline LatticeState apply_K_adjoint(const VelocityDensitySamples& g, const FreeModel& model, Branch j,
                                    HalfPeriod m, long first, long last) {
  return apply_K_adjoint(g, model.coin, j, m, first, last);
}

}  // namespace qwalk
