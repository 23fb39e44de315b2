#pragma once

#include <random>

#include "qwalk/momentum.hpp"

namespace qwalk::testing {

inline LatticeState random_state(std::mt19937_64& rng, long first, long last) {
  std::normal_distribution<double> g;
  LatticeState s = LatticeState::zeros(first, last);
  for (auto& v : s.amplitudes()) v = Spinor(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  s *= cplx(1.0 / s.norm());
  return s;
}

/// Gaussian packet of width sigma on the branch whose group velocity is
/// closest to `speed`, projected onto the matching velocity half-line and
/// renormalized.
inline LatticeState wave_packet(const CoinMatrix& c, double speed, double sigma, long centre = 0) {
  double best = 1e9, k_best = 0.0;
  Branch j_best = Branch::first;
  for (int n = 0; n < 4096; ++n) {
    const double k = two_pi * n / 4096.0;
    for (Branch j : kBranches) {
      const double d = std::abs(velocity(c, k, j) - speed);
      if (d < best) best = d, k_best = k, j_best = j;
    }
  }
  const Spinor u = eigensystem(c, k_best).vector(j_best);
  const long half = static_cast<long>(8 * sigma);
  LatticeState s = LatticeState::zeros(centre - half, centre + half);
  for (long x = centre - half; x <= centre + half; ++x)
    s.at(x) = std::exp(-0.5 * std::pow((x - centre) / sigma, 2)) * std::polar(1.0, k_best * x) * u;
  s = velocity_projection(s, c, speed > 0 ? velocity_sets::positive() : velocity_sets::negative());
  s.trim();
  s *= cplx(1.0 / s.norm());
  return s;
}

}  // namespace qwalk::testing
