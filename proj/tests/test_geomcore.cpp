#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gkflab/error.hpp"
#include "gkflab/geomcore.hpp"

using namespace gkflab;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

void check_lk(const LkVector& got, const std::vector<double>& want, double eps = 1e-12) {
  REQUIRE(got.dim() + 1 == static_cast<int>(want.size()));
  for (int j = 0; j <= got.dim(); ++j) {
    CHECK(got[j] == Approx(want[j]).epsilon(eps));
  }
}

// fraction of uniform points of the box [lo, hi] within rho of the set,
// scaled to a volume, with its binomial standard error
template <class Dist>
std::pair<double, double> mc_volume(const std::vector<double>& lo, const std::vector<double>& hi,
                                    double rho, int samples, unsigned seed, Dist dist) {
  std::mt19937_64 rng(seed);
  double box = 1.0;
  std::vector<std::uniform_real_distribution<double>> axes;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    box *= hi[a] - lo[a];
    axes.emplace_back(lo[a], hi[a]);
  }
  std::vector<double> x(lo.size());
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = axes[a](rng);
    if (dist(x) <= rho) ++hits;
  }
  const double p = static_cast<double>(hits) / samples;
  return {box * p, box * std::sqrt(p * (1 - p) / samples)};
}

}  // namespace

TEST_CASE("unit ball volume and sphere surface") {
  CHECK(unit_ball_volume(0) == Approx(1.0));
  CHECK(unit_ball_volume(1) == Approx(2.0));
  CHECK(unit_ball_volume(2) == Approx(kPi));
  CHECK(unit_ball_volume(3) == Approx(4.0 * kPi / 3.0));
  CHECK(sphere_surface(2) == Approx(2 * kPi));
  CHECK(sphere_surface(3) == Approx(4 * kPi));
  CHECK_THROWS_AS(sphere_surface(0), InvalidArgument);
  for (int n = 1; n <= 300; n += (n < 20 ? 1 : 31)) {
    CHECK(sphere_surface(n) / (n * unit_ball_volume(n)) == Approx(1.0).epsilon(1e-12));
  }
  // far past double range the log stays exact
  for (int n : {500, 1000, 2000}) {
    const double want = 0.5 * n * std::log(kPi) - std::lgamma(0.5 * n + 1.0);
    CHECK(log_unit_ball_volume(n) == Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("flag coefficients") {
  for (int n = 0; n <= 12; ++n) {
    CHECK(flag_coeff(n, 0) == Approx(1.0));
    CHECK(flag_coeff(n, n) == Approx(1.0));
    for (int k = 0; k <= n; ++k) {
      CHECK(flag_coeff(n, k) == Approx(flag_coeff(n, n - k)).epsilon(1e-12));
    }
  }
  CHECK(flag_coeff(2, 1) == Approx(kPi / 2));
  CHECK(flag_coeff(3, 1) == Approx(2.0));
  CHECK_THROWS_AS(flag_coeff(3, 4), InvalidArgument);
  CHECK_THROWS_AS(flag_coeff(3, -1), InvalidArgument);
}

TEST_CASE("hermite polynomials") {
  CHECK(hermite(2, 1.0) == Approx(0.0));
  CHECK(hermite(3, 2.0) == Approx(2.0));
  CHECK(hermite(-1, 0.0) == Approx(std::sqrt(2 * kPi) * 0.5));
  CHECK_THROWS_AS(hermite(-2, 0.0), InvalidArgument);
  for (double u = -5.0; u <= 5.0; u += 0.25) {
    CHECK(hermite(0, u) == 1.0);
    CHECK(hermite(1, u) == Approx(u));
    CHECK(hermite(2, u) == Approx(u * u - 1).epsilon(1e-12));
    for (int n = 1; n < 10; ++n) {
      const double lhs = hermite(n + 1, u);
      const double rhs = u * hermite(n, u) - n * hermite(n - 1, u);
      CHECK(lhs == Approx(rhs).epsilon(1e-10).scale(1.0));
    }
    for (int n = 0; n <= 10; ++n) {
      CHECK(hermite(n, -u) == Approx((n % 2 ? -1.0 : 1.0) * hermite(n, u)).epsilon(1e-12));
    }
    // H_{-1} convention reproduces the Gauss tail
    CHECK(hermite(-1, u) * gauss_density(u) == Approx(gauss_tail(u)).epsilon(1e-12));
  }
  CHECK(gauss_tail(0.0) == Approx(0.5));
  CHECK(gauss_tail(1.0) == Approx(0.158655253931457).epsilon(1e-12));
  CHECK(mills_ratio(30.0) == Approx(1.0 / 30.0).epsilon(2e-3));
}

TEST_CASE("curvatures of model spaces") {
  check_lk(lk_model_space({Rectangle{{3, 4}}, 1.0}), {1, 7, 12});
  check_lk(lk_model_space({Rectangle{{3, 4}}, 4.0}), {1, 14, 48});
  check_lk(lk_model_space({Sphere2{1.0}, 1.0}), {2, 0, 4 * kPi});
  check_lk(lk_model_space({Rectangle{{2, 3, 5}}, 1.0}), {1, 10, 31, 30});
  check_lk(lk_model_space(SpaceDescriptor::point()), {1});
  check_lk(lk_model_space({Ball{2, 1.0}, 1.0}), {1, kPi, kPi});
  check_lk(lk_model_space({Ball{3, 1.0}, 1.0}), {1, 4, 2 * kPi, 4 * kPi / 3});
  check_lk(lk_model_space({Sphere2{2.0}, 1.0}), {2, 0, 16 * kPi});

  SUBCASE("rectangle scaling") {
    const std::vector<double> sides{1.5, 2.0, 0.7};
    const auto base = lk_model_space({Rectangle{sides}, 1.0});
    for (double c : {0.5, 2.0, 3.3}) {
      std::vector<double> scaled;
      for (double s : sides) scaled.push_back(c * s);
      const auto lk = lk_model_space({Rectangle{scaled}, 1.0});
      for (int j = 0; j <= 3; ++j) {
        CHECK(lk[j] == Approx(std::pow(c, j) * base[j]).epsilon(1e-12));
      }
    }
  }

  SUBCASE("cap curvatures") {
    for (double alpha : {kPi / 6, kPi / 4, kPi / 3, kPi / 2}) {
      const auto lk = lk_model_space({Cap{alpha}, 1.0});
      CHECK(lk[0] == Approx(1.0));
      // half the boundary length
      CHECK(lk[1] == Approx(kPi * std::sin(alpha)).epsilon(1e-6));
      CHECK(lk[2] == Approx(2 * kPi * (1 - std::cos(alpha))).epsilon(1e-12));
    }
  }

  SUBCASE("invalid descriptors") {
    CHECK_THROWS_AS(lk_model_space({Rectangle{{3, -1}}, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(lk_model_space({Ball{2, 0.0}, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(lk_model_space({Cap{2.0}, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(lk_model_space({Rectangle{{1}}, 0.0}), InvalidArgument);
  }
}

TEST_CASE("kappa conversion") {
  const LkVector rect({1, 7, 12});
  check_lk(to_kappa(rect, 0.0), {1, 7, 12});
  check_lk(to_kappa(rect, 1.0), {1 - 6 / kPi, 7, 12});
  CHECK(to_kappa(rect, 1.0)[0] == Approx(-0.90986).epsilon(1e-5));
  check_lk(from_kappa(LkVector({1 - 6 / kPi, 7, 12}), 1.0), {1, 7, 12});
  check_lk(from_kappa(rect, 0.0), {1, 7, 12});
  // the round sphere has vanishing kappa = 1 Euler term
  const auto s = to_kappa(lk_model_space({Sphere2{1.0}, 1.0}), 1.0);
  CHECK(std::abs(s[0]) < 1e-12);
  CHECK(s[2] == Approx(4 * kPi));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_int_distribution<int> dim(0, 6);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(dim(rng) + 1);
    for (double& x : v) x = val(rng);
    const LkVector lk(v);
    for (double kappa : {-2.0, 0.5, 1.0, static_cast<double>(lk.dim()) - 1.0}) {
      const auto back = from_kappa(to_kappa(lk, kappa), kappa);
      CHECK(to_kappa(lk, kappa)[lk.dim()] == lk[lk.dim()]);
      for (int j = 0; j <= lk.dim(); ++j) {
        CHECK(back[j] == Approx(v[j]).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("euclidean tube polynomial") {
  const LkVector rect({1, 7, 12});
  CHECK(tube_volume_euclid(rect, 2, 0.0) == Approx(12.0));
  CHECK(tube_volume_euclid(rect, 2, 0.5) == Approx(12 + 7 + kPi / 4).epsilon(1e-12));
  CHECK(tube_volume_euclid(rect, 2, 0.5) == Approx(19.785398).epsilon(1e-7));
  CHECK(tube_volume_euclid(LkVector({1}), 2, 1.0) == Approx(kPi));
  CHECK(tube_volume_euclid(LkVector({1}), 3, 2.0) == Approx(4 * kPi / 3 * 8));
  CHECK_THROWS_AS(tube_volume_euclid(rect, 1, 0.1), InvalidArgument);
  CHECK_THROWS_AS(tube_volume_euclid(rect, 2, -0.1), InvalidArgument);

  SUBCASE("rectangle in the plane, Monte Carlo") {
    const double rho = 0.5;
    auto dist = [](const std::vector<double>& x) {
      const double dx = std::max({0.0, -x[0], x[0] - 3.0});
      const double dy = std::max({0.0, -x[1], x[1] - 4.0});
      return std::hypot(dx, dy);
    };
    auto [v, se] = mc_volume({-rho, -rho}, {3 + rho, 4 + rho}, rho, 400000, 11, dist);
    CHECK(std::abs(v - tube_volume_euclid(rect, 2, rho)) <= 3 * se);
  }
  SUBCASE("box in space, Monte Carlo") {
    const double rho = 0.3;
    const auto lk = lk_model_space({Rectangle{{1, 2, 0.5}}, 1.0});
    auto dist = [](const std::vector<double>& x) {
      const double hi[3] = {1, 2, 0.5};
      double s = 0;
      for (int a = 0; a < 3; ++a) {
        const double d = std::max({0.0, -x[a], x[a] - hi[a]});
        s += d * d;
      }
      return std::sqrt(s);
    };
    auto [v, se] = mc_volume({-rho, -rho, -rho}, {1 + rho, 2 + rho, 0.5 + rho}, rho, 400000, 12, dist);
    CHECK(std::abs(v - tube_volume_euclid(lk, 3, rho)) <= 3 * se);
  }
  SUBCASE("balls, Monte Carlo") {
    for (int n : {2, 3}) {
      const double rho = 0.4, r = 1.0;
      const auto lk = lk_model_space({Ball{n, r}, 1.0});
      auto dist = [r](const std::vector<double>& x) {
        double s = 0;
        for (double c : x) s += c * c;
        return std::max(0.0, std::sqrt(s) - r);
      };
      std::vector<double> lo(n, -r - rho), hi(n, r + rho);
      auto [v, se] = mc_volume(lo, hi, rho, 400000, 13 + n, dist);
      CHECK(std::abs(v - tube_volume_euclid(lk, n, rho)) <= 3 * se);
      // Steiner for a ball is just the bigger ball
      CHECK(tube_volume_euclid(lk, n, rho) ==
            Approx(unit_ball_volume(n) * std::pow(r + rho, n)).epsilon(1e-12));
    }
  }
  SUBCASE("ball sitting in a higher dimensional space") {
    // a flat disc in R^3: tube = cylinder plus half-torus rim plus two caps
    const auto lk = lk_model_space({Ball{2, 1.0}, 1.0});
    const double rho = 0.2;
    const double exact = kPi * 2 * rho + kPi * kPi * rho * rho + 4.0 / 3.0 * kPi * rho * rho * rho;
    CHECK(tube_volume_euclid(lk, 3, rho) == Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("cap tubes and calibration") {
  // exact tube in R^3: a shell sector over the cap plus a half solid torus
  // along the rim (Pappus, half-disc centroid 4 rho / 3 pi off the rim)
  for (double alpha : {0.4, 1.0, kPi / 2}) {
    for (double rho : {0.02, 0.1, 0.3}) {
      const double shell = 2 * kPi / 3 * (std::pow(1 + rho, 3) - std::pow(1 - rho, 3)) *
                           (1 - std::cos(alpha));
      const double rim = kPi * rho * rho / 2 * 2 * kPi *
                         (std::sin(alpha) + 4 * rho / (3 * kPi) * std::cos(alpha));
      CHECK(cap_tube_volume(alpha, rho) == Approx(shell + rim).epsilon(1e-8));
    }
  }
  // calibration recovers the curvatures of a known body
  const LkVector box({1, 9, 26, 24});
  const std::vector<double> grid{0.01, 0.02, 0.03, 0.04, 0.05};
  const auto fit = calibrate_lk_from_tubes(
      [&](double r) { return tube_volume_euclid(box, 3, r); }, 3, 3, grid);
  for (int j = 0; j <= 3; ++j) CHECK(fit[j] == Approx(box[j]).epsilon(1e-6));
}

TEST_CASE("kinematic formulas") {
  // rectangle [3,4] against the unit disc: area of the Minkowski sum
  const LkVector rect({1, 7, 12});
  const auto disc = lk_model_space({Ball{2, 1.0}, 1.0});
  CHECK(euclidean_kff(0, rect, disc, 2) == Approx(12 + kPi + 14).epsilon(1e-12));
  CHECK(euclidean_kff(0, LkVector({1}), LkVector({1}), 2) == Approx(0.0));
  // an interval of length a against one of length b in R^1: a + b
  CHECK(euclidean_kff(0, LkVector({1, 2}), LkVector({1, 3}), 1) == Approx(5.0));

  // caps on the unit sphere
  auto rhs = [](double a, double b) {
    const auto m1 = to_kappa(lk_model_space({Cap{a}, 1.0}), 1.0);
    const auto m2 = to_kappa(lk_model_space({Cap{b}, 1.0}), 1.0);
    return spherical_kff(0, m1, m2, 3);
  };
  const double deg = kPi / 180;
  CHECK(rhs(30 * deg, 30 * deg) == Approx(3.028815).epsilon(1e-6));
  CHECK(rhs(45 * deg, 60 * deg) == Approx(6.989242).epsilon(1e-6));
  CHECK(rhs(90 * deg, 90 * deg) == Approx(2 * kPi).epsilon(1e-6));
  CHECK(rhs(20 * deg, 70 * deg) == Approx(rhs(70 * deg, 20 * deg)).epsilon(1e-12));
}
