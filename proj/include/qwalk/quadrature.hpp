#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "qwalk/errors.hpp"

namespace qwalk {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [lo, hi], nodes ascending.
inline QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
  if (n == 0) throw DomainError("quadrature needs at least one node", "grid_size");
  // Boost returns the nonnegative zeros of P_n in ascending order.
  const std::vector<double> half = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
  std::vector<double> x, w;
  x.reserve(n);
  w.reserve(n);
  auto weight = [n](double t) {
    const double d = boost::math::legendre_p_prime(static_cast<int>(n), t);
    return 2.0 / ((1.0 - t * t) * d * d);
  };
  for (std::size_t i = half.size(); i-- > 0;) {
    if (half[i] == 0.0) continue;
    x.push_back(-half[i]);
    w.push_back(weight(half[i]));
  }
  for (double t : half) {
    x.push_back(t);
    w.push_back(weight(t));
  }
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes[i] = c + h * x[i];
    r.weights[i] = h * w[i];
  }
  return r;
}

}  // namespace qwalk
