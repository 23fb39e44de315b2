#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qwalk/weaklimit.hpp"

using namespace qwalk;
using Catch::Matchers::WithinAbs;

namespace {

const double kH = 1.0 / std::sqrt(2.0);
const CoinMatrix kHadamard = coin_from_params(kH, 0.0, 0.0, pi);
const LatticeState kSymmetric = LatticeState::delta(0, Spinor(1.0, cplx(0.0, 1.0)) / std::sqrt(2.0));

}  // namespace

TEST_CASE("trapping coins give the point mass at zero") {
  const CoinField f = CoinField::homogeneous(coin_from_params(0.0, 0.0, 0.3, 0.2));
  const LimitDistribution d = limit_distribution(LatticeState::delta(2, Spinor(0.6, 0.8)), f);
  CHECK(d.kappa0 == 1.0);
  CHECK(d.kappa_l == 0.0);
  CHECK(d.kappa_r == 0.0);
  CHECK_FALSE(d.density_l);
  CHECK_FALSE(d.density_r);
  CHECK(cdf(d, -1e-9) == 0.0);
  CHECK(cdf(d, 0.0) == 1.0);
  for (int p = 1; p <= 8; ++p) CHECK(moment(d, p) == 0.0);
  CHECK(cf_limit(d, 3.0) == cplx(1.0));

  const ComparisonReport r = compare_empirical(LatticeState::delta(0, Spinor(0.6, 0.8)), f, d, {50, 100, 200},
                                               uniform_velocity_grid());
  for (const auto& row : r.rows) CHECK(row.kolmogorov <= 1e-13);
}

TEST_CASE("diagonal coin: ballistic atoms at -1 and +1") {
  const CoinField f = CoinField::homogeneous(coin_from_params(1.0, 0.2, 0.0, 0.4));
  const LimitDistribution left = limit_distribution(LatticeState::delta(-3, Spinor(cplx(0, 1), 0)), f);
  CHECK_THAT(left.kappa_l, WithinAbs(1.0, 1e-13));
  CHECK(left.kappa0 <= 1e-13);
  CHECK(left.kappa_r == 0.0);
  for (int p = 1; p <= 8; ++p) CHECK_THAT(moment(left, p), WithinAbs(p % 2 ? -1.0 : 1.0, 1e-13));
  for (double xi : {0.5, 2.0}) CHECK(std::abs(cf_limit(left, xi) - std::polar(1.0, -xi)) <= 1e-13);
  CHECK(cdf(left, -1.0001) == 0.0);
  CHECK_THAT(cdf(left, -1.0), WithinAbs(1.0, 1e-13));
  for (long n : {1L, 7L, 100L}) {
    const auto p = position_distribution(evolve(LatticeState::delta(0, Spinor(1, 0)), f, n));
    REQUIRE(p.size() == 1);
    CHECK(p.begin()->first == -n);
  }

  const LimitDistribution right = limit_distribution(LatticeState::delta(4, Spinor(0, 1)), f);
  CHECK_THAT(right.kappa_r, WithinAbs(1.0, 1e-13));
  for (int p = 1; p <= 8; ++p) CHECK_THAT(moment(right, p), WithinAbs(1.0, 1e-13));
}

TEST_CASE("mixed case: ballistic left, dispersive right") {
  const CoinField f = CoinField::two_phase(coin_from_params(1.0, 0, 0, 0), kHadamard);
  const LimitDistribution d = limit_distribution(kSymmetric, f);
  CHECK_FALSE(d.density_l);
  REQUIRE(d.density_r);
  CHECK(d.kappa_r == 0.0);
  CHECK(d.kappa_l > 0.0);
  CHECK_THAT(d.total_mass(), WithinAbs(1.0, 1e-2));
}

TEST_CASE("Hadamard from the origin: supports, atoms and the simulated law") {
  const CoinField f = CoinField::homogeneous(kHadamard);
  const LatticeState psi = LatticeState::delta(0, Spinor(1, 0));
  const LimitDistribution d = limit_distribution(psi, f);
  REQUIRE(d.density_l);
  REQUIRE(d.density_r);
  for (double v : d.density_l->grid.upsilon) CHECK((v >= -kH && v < 0.0));
  for (double v : d.density_r->grid.upsilon) CHECK((v > 0.0 && v <= kH));
  for (const auto* w : {&*d.density_l, &*d.density_r})
    for (double x : w->values) CHECK(x >= 0.0);
  CHECK(d.kappa0 <= 5e-3);
  CHECK(d.kappa_l == 0.0);
  CHECK(d.kappa_r == 0.0);
  CHECK_THAT(d.total_mass(), WithinAbs(1.0, 1e-2));
  CHECK(std::abs(cf_limit(d, 0.0) - d.total_mass()) <= 1e-14);

  const ComparisonReport r = compare_empirical(psi, f, d, {250, 1000}, uniform_velocity_grid());
  CHECK(r.rows[1].kolmogorov <= 0.05);
  CHECK(r.rows[1].kolmogorov < r.rows[0].kolmogorov);
  CHECK(std::abs(r.rows[1].mean_n - r.rows[1].mean_limit) < std::abs(r.rows[0].mean_n - r.rows[0].mean_limit));
}

TEST_CASE("Hadamard with the symmetric initial state has zero mean") {
  const CoinField f = CoinField::homogeneous(kHadamard);
  const LimitDistribution d = limit_distribution(kSymmetric, f);
  CHECK(std::abs(moment(d, 1)) <= 1e-3);
  double mean = 0.0;
  for (const auto& [x, p] : position_distribution(evolve(kSymmetric, f, 500))) mean += p * x / 500.0;
  CHECK(std::abs(mean) <= 1e-3);
}

TEST_CASE("cdf is monotone and bounded by the total mass") {
  const CoinField f = CoinField::two_phase(coin_from_params(0.8, 0, 0, pi), coin_from_params(0.6, 0, 0, pi));
  const LimitDistribution d = limit_distribution(kSymmetric, f);
  CHECK(cdf(d, -1.5) == 0.0);
  CHECK_THAT(cdf(d, 1.5), WithinAbs(d.total_mass(), 1e-14));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    CHECK(cdf(d, a) <= cdf(d, b));
  }
  for (double xi : {1.0, 4.0, 20.0}) CHECK(std::abs(cf_limit(d, xi)) <= 1.0 + 1e-12);
  CHECK_THROWS_AS(moment(d, 0), DomainError);
  CHECK_THROWS_AS(moment(d, 9), DomainError);
}

TEST_CASE("two-phase walk: Kolmogorov distance decreases with n") {
  const CoinField f = CoinField::two_phase(coin_from_params(0.8, 0, 0, pi), coin_from_params(0.6, 0, 0, pi));
  const LimitDistribution d = limit_distribution(kSymmetric, f);
  const ComparisonReport r = compare_empirical(kSymmetric, f, d, {250, 500, 1000, 2000}, uniform_velocity_grid());
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].kolmogorov < r.rows[i - 1].kolmogorov);
  CHECK(r.nonincreasing_tail);
  CHECK(r.guard_band == 0.02);
}

TEST_CASE("a finer velocity grid leaves the distribution unchanged") {
  const CoinField f = CoinField::two_phase(coin_from_params(0.8, 0, 0, pi), coin_from_params(0.6, 0, 0, pi));
  LimitOptions coarse, fine;
  coarse.nodes_per_half = 257;
  fine.nodes_per_half = 1025;
  const LimitDistribution a = limit_distribution(kSymmetric, f, coarse);
  const LimitDistribution b = limit_distribution(kSymmetric, f, fine);
  CHECK_THAT(a.kappa0, WithinAbs(b.kappa0, 1e-6));
  for (Side s : kSides) CHECK_THAT(a.density_mass(s), WithinAbs(b.density_mass(s), 1e-6));
  double worst = 0.0;
  for (double v : uniform_velocity_grid(-0.8, 0.8, 801)) worst = std::max(worst, std::abs(cdf(a, v) - cdf(b, v)));
  CHECK(worst <= 1e-4);
}

TEST_CASE("limit_distribution: errors") {
  const CoinField f = CoinField::homogeneous(kHadamard);
  CHECK_THROWS_AS(limit_distribution(LatticeState::delta(0, Spinor(1, 1)), f), DomainError);

  LimitOptions tight;
  tight.mass_tol = 1e-9;
  CHECK_THROWS_AS(limit_distribution(LatticeState::delta(0, Spinor(1, 0)), f, tight), MassDefectError);

  LimitOptions short_run;
  short_run.pure_point.schedule.n_min = 16;
  short_run.pure_point.schedule.n_max = 32;
  short_run.pure_point.schedule.tol = 1e-12;
  CHECK_THROWS_AS(limit_distribution(LatticeState::delta(0, Spinor(1, 0)), f, short_run), ConvergenceError);
}

TEST_CASE("state_hash identifies the initial state") {
  const LatticeState a = LatticeState::delta(0, Spinor(1, 0));
  CHECK(state_hash(a) == state_hash(LatticeState::delta(0, Spinor(1, 0))));
  CHECK(state_hash(a) != state_hash(LatticeState::delta(1, Spinor(1, 0))));
  CHECK(state_hash(a) != state_hash(LatticeState::delta(0, Spinor(0, 1))));
}
