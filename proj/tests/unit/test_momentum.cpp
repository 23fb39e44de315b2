#include <catch_amalgamated.hpp>

#include <boost/math/tools/minima.hpp>
#include <random>

#include <Eigen/Eigenvalues>

#include "qwalk/momentum.hpp"

using namespace qwalk;
using Catch::Matchers::WithinAbs;

namespace {

const double kH = 1.0 / std::sqrt(2.0);
const CoinMatrix kHadamard = coin_from_params(kH, 0.0, 0.0, pi);

LatticeState random_state(std::mt19937_64& rng, long first, long last) {
  std::normal_distribution<double> g;
  LatticeState s = LatticeState::zeros(first, last);
  for (auto& v : s.amplitudes()) v = Spinor(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  s *= cplx(1.0 / s.norm());
  return s;
}

CoinMatrix random_coin(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ua(0.05, 0.95), ang(-pi, pi);
  return coin_from_params(ua(rng), ang(rng), ang(rng), ang(rng));
}

// Eigenvalue of a generic eigensolve closest to `reference`.
cplx numerical_eigenvalue(const Mat2& m, cplx reference) {
  Eigen::ComplexEigenSolver<Mat2> es(m);
  const cplx l0 = es.eigenvalues()(0), l1 = es.eigenvalues()(1);
  return std::abs(l0 - reference) < std::abs(l1 - reference) ? l0 : l1;
}

}  // namespace

TEST_CASE("symbol_at") {
  CHECK(max_abs(symbol_at(kHadamard, 0.0) - kHadamard.entries) <= 1e-15);
  Mat2 expected = Mat2::Zero();
  expected(0, 0) = cplx(0, 1);
  expected(1, 1) = cplx(0, -1);
  CHECK(max_abs(symbol_at(coin_from_params(1, 0, 0, 0), 0.5 * pi) - expected) <= 1e-15);
  for (double k : {0.0, 0.4, 2.0, 5.5}) {
    Mat2 d = Mat2::Zero();
    d(0, 0) = std::exp(cplx(0, k));
    d(1, 1) = std::exp(cplx(0, -k));
    const Mat2 direct = d * kHadamard.entries;
    CHECK(std::abs(direct.trace() - 2.0 * symbol_tau(kHadamard, k) * std::polar(1.0, 0.5 * pi)) <= 1e-14);
    CHECK(is_unitary(symbol_at(kHadamard, k)));
  }
}

TEST_CASE("eigensystem: Hadamard at k = 0") {
  const Eigensystem es = eigensystem(kHadamard, 0.0);
  CHECK(std::abs(es.eigenvalue(Branch::first) - cplx(-1.0)) <= 1e-15);
  CHECK(std::abs(es.eigenvalue(Branch::second) - cplx(1.0)) <= 1e-15);
  for (Branch j : kBranches) {
    const cplx l = es.eigenvalue(j);
    CHECK(std::abs(numerical_eigenvalue(kHadamard.entries, l) - l) <= 1e-12);
  }
}

TEST_CASE("eigensystem: diagonal coin") {
  const CoinMatrix c = coin_from_params(1.0, 0.4, 0.0, 1.1);
  for (double k : {0.0, 1.0, 3.0}) {
    const Eigensystem es = eigensystem(c, k);
    const double phi = k + 0.4 - 0.55;
    CHECK(std::abs(es.eigenvalue(Branch::first) - std::polar(1.0, 0.55 + phi)) <= 1e-14);
    CHECK(std::abs(es.eigenvalue(Branch::second) - std::polar(1.0, 0.55 - phi)) <= 1e-14);
    CHECK(es.vector(Branch::first) == Spinor(1, 0));
    CHECK(es.vector(Branch::second) == Spinor(0, 1));
  }
}

TEST_CASE("eigensystem: antidiagonal coin has k-independent eigenvalues") {
  const CoinMatrix c = coin_from_params(0.0, 0.0, 0.7, 0.3);
  const Eigensystem e0 = eigensystem(c, 0.0);
  for (double k : {0.5, 2.0, 4.0}) {
    const Eigensystem ek = eigensystem(c, k);
    for (Branch j : kBranches) CHECK(std::abs(ek.eigenvalue(j) - e0.eigenvalue(j)) <= 1e-14);
  }
}

TEST_CASE("eigensystem: eigenpairs, completeness and gauge on random coins") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const CoinMatrix c = random_coin(rng);
    for (int n = 0; n < 256; ++n) {
      const double k = two_pi * n / 256.0;
      const Eigensystem es = eigensystem(c, k);
      const Mat2 u = symbol_at(c, k);
      for (Branch j : kBranches) {
        CHECK_THAT(std::abs(es.eigenvalue(j)), WithinAbs(1.0, 1e-12));
        CHECK((u * es.vector(j) - es.eigenvalue(j) * es.vector(j)).norm() <= 1e-10);
        CHECK_THAT(es.vector(j).norm(), WithinAbs(1.0, 1e-14));
        CHECK(es.vector(j)(0).imag() == 0.0);
        CHECK(es.vector(j)(0).real() > 0.0);
      }
      CHECK(max_abs(es.projector(Branch::first) + es.projector(Branch::second) - Mat2::Identity()) <= 1e-12);
    }
  }
}

TEST_CASE("eigensystem: the gauge is continuous in k") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const CoinMatrix c = random_coin(rng);
    const double h = 1e-4;
    for (int n = 0; n < 2048; ++n) {
      const double k = two_pi * n / 2048.0;
      for (Branch j : kBranches) {
        const double jump = (eigensystem(c, k + h).vector(j) - eigensystem(c, k).vector(j)).norm();
        CHECK(jump <= 1e-4 * 50.0);
      }
    }
  }
}

TEST_CASE("velocity: degenerate coins") {
  for (double k : {0.0, 1.0, 4.0}) {
    for (Branch j : kBranches) {
      CHECK(velocity(coin_from_params(0.0, 0, 0.3, 1.0), k, j) == 0.0);
      CHECK(velocity(coin_from_params(1.0, 0.2, 0, 1.0), k, j) == parity(j));
    }
  }
}

TEST_CASE("velocity: Hadamard at k = 0 against the eigenphase derivative") {
  CHECK_THAT(velocity(kHadamard, 0.0, Branch::first), WithinAbs(kH, 1e-15));
  CHECK_THAT(velocity(kHadamard, 0.0, Branch::second), WithinAbs(-kH, 1e-15));
  const double h = 1e-5;
  for (Branch j : kBranches) {
    const cplx l = eigensystem(kHadamard, 0.0).eigenvalue(j);
    const double up = std::arg(numerical_eigenvalue(symbol_at(kHadamard, h), l));
    const double dn = std::arg(numerical_eigenvalue(symbol_at(kHadamard, -h), l));
    CHECK_THAT(-wrap_angle(up - dn) / (2 * h), WithinAbs(velocity(kHadamard, 0.0, j), 1e-8));
  }
}

TEST_CASE("velocity: supremum equals a") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const CoinMatrix c = random_coin(rng);
    for (Branch j : kBranches) {
      const auto r = boost::math::tools::brent_find_minima(
          [&](double k) { return -velocity(c, k, j); }, 0.0, two_pi, 52);
      double best = -r.second;
      // The minimiser may settle on a neighbouring grid cell; check both half periods.
      const auto r2 = boost::math::tools::brent_find_minima(
          [&](double k) { return -velocity(c, k, j); }, pi, 3.0 * pi, 52);
      best = std::max(best, -r2.second);
      CHECK_THAT(best, WithinAbs(c.a, 1e-8));
    }
  }
}

TEST_CASE("fourier_at satisfies Parseval") {
  std::mt19937_64 rng(10);
  const LatticeState s = random_state(rng, -7, 12);
  const int n = 64;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += fourier_at(s, two_pi * i / n).squaredNorm() / n;
  CHECK_THAT(acc, WithinAbs(1.0, 1e-12));
  const Spinor f = fourier_at(LatticeState::delta(3, Spinor(1, 2)), 0.7);
  CHECK((f - std::polar(1.0, -2.1) * Spinor(1, 2)).norm() <= 1e-14);
}

TEST_CASE("velocity_projection: B = R is the identity") {
  std::mt19937_64 rng(11);
  const LatticeState s = random_state(rng, -10, 10);
  CHECK(distance(velocity_projection(s, kHadamard, velocity_sets::all()), s) <= 1e-12);
}

TEST_CASE("velocity_projection: diagonal coin, negative velocities keep component 0") {
  const CoinMatrix c = coin_from_params(1.0, 0.3, 0.0, 0.8);
  std::mt19937_64 rng(12);
  LatticeState s = random_state(rng, -5, 5);
  for (auto& v : s.amplitudes()) v(1) = 0.0;
  CHECK(distance(velocity_projection(s, c, velocity_sets::negative()), s) <= 1e-12);
  CHECK(velocity_projection(s, c, velocity_sets::positive()).norm() <= 1e-12);
}

TEST_CASE("velocity_projection: Hadamard splits the mass without an atom at zero") {
  std::mt19937_64 rng(13);
  const LatticeState s = random_state(rng, -15, 15);
  const LatticeState p = velocity_projection(s, kHadamard, velocity_sets::positive());
  const LatticeState m = velocity_projection(s, kHadamard, velocity_sets::negative());
  CHECK_THAT(p.norm_squared() + m.norm_squared(), WithinAbs(1.0, 1e-8));
  CHECK(distance(p + m, s) <= 1e-8);
  CHECK(std::abs(inner(p, m)) <= 1e-8);
}

TEST_CASE("velocity_projection: idempotent and complementary on random coins") {
  std::mt19937_64 rng(14);
  ProjectionOptions periodic;
  periodic.periodic = true;
  for (int i = 0; i < 5; ++i) {
    const CoinMatrix c = random_coin(rng);
    const LatticeState s = random_state(rng, -20, 20);
    const VelocitySet b = velocity_sets::interval(-0.2, 0.35);
    const LatticeState p = velocity_projection(s, c, b);
    // The output fills the transform window, so a second pass treats it as periodic.
    CHECK(distance(velocity_projection(p, c, b, periodic), p) <= 1e-8);
    const LatticeState q = velocity_projection(s, c, velocity_sets::complement(b));
    CHECK(distance(p + q, s) <= 1e-8);
  }
}

TEST_CASE("velocity_projection: mass near the window edge is an aliasing error") {
  std::mt19937_64 rng(15);
  const LatticeState s = random_state(rng, 0, 99);
  ProjectionOptions opt;
  opt.dft_size = 128;
  opt.margin = 20;
  CHECK_THROWS_AS(velocity_projection(s, kHadamard, velocity_sets::positive(), opt), AliasingError);
}

TEST_CASE("spectrum_arcs") {
  const SpectrumArcs z = spectrum_arcs(coin_from_params(0.0, 0, 0, 0));
  REQUIRE(z.thresholds.size() == 2);
  CHECK((std::abs(z.thresholds[0] - cplx(0, 1)) <= 1e-15 || std::abs(z.thresholds[0] - cplx(0, -1)) <= 1e-15));
  CHECK(std::abs(z.thresholds[0] + z.thresholds[1]) <= 1e-15);

  const SpectrumArcs h = spectrum_arcs(kHadamard);
  REQUIRE(h.thresholds.size() == 4);
  for (double s0 : {-1.0, 1.0}) {
    for (double s1 : {-1.0, 1.0}) {
      const cplx want = cplx(0, 1) * cplx(s0 * kH, s1 * kH);
      double d = 1e9;
      for (cplx t : h.thresholds) d = std::min(d, std::abs(t - want));
      CHECK(d <= 1e-14);
    }
  }
  // Every eigenvalue lies on an arc, and the scan reaches each threshold.
  std::vector<double> closest(4, 1e9);
  for (int n = 0; n < 20000; ++n) {
    const Eigensystem es = eigensystem(kHadamard, two_pi * n / 20000.0);
    for (Branch j : kBranches) {
      const double t = std::arg(es.eigenvalue(j));
      bool on_arc = false;
      for (const Arc& a : h.arcs)
        on_arc |= std::abs(angle_distance(t, 0.5 * (a.start + a.end))) <= 0.5 * (a.end - a.start) + 1e-12;
      CHECK(on_arc);
      for (std::size_t i = 0; i < 4; ++i) closest[i] = std::min(closest[i], std::abs(es.eigenvalue(j) - h.thresholds[i]));
    }
  }
  for (double d : closest) CHECK(d <= 1e-3);

  const SpectrumArcs full = spectrum_arcs(coin_from_params(1.0, 0, 0, 0.4));
  CHECK(full.full_circle);
  CHECK(full.thresholds.empty());
}

TEST_CASE("FreeModel tabulates the closed forms") {
  const FreeModel m = FreeModel::build(kHadamard, 16);
  REQUIRE(m.k.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(m.velocities[i][0] == velocity(kHadamard, m.k[i], Branch::first));
    CHECK(m.eigen[i].lambda == eigensystem(kHadamard, m.k[i]).lambda);
  }
}
