#include <doctest.h>

#include <cmath>
#include <random>

#include "dmawpt/channel.hpp"
#include "oracles.hpp"

using namespace dmawpt;

TEST_CASE("radiation profile") {
  CHECK(element_radiation_gain(0.0, 2.0) == doctest::Approx(6.0));
  CHECK(element_radiation_gain(kPi / 2.0, 2.0) == 0.0);
  CHECK(element_radiation_gain(kPi, 2.0) == 0.0);
  CHECK(element_radiation_gain(-0.1, 2.0) == 0.0);
  CHECK(element_radiation_gain(kPi / 3.0, 2.0) == doctest::Approx(6.0 * 0.25));
}

TEST_CASE("boresight coefficient") {
  const double lambda = 0.03;
  const cplx g = channel_coefficient(Vec3(0, 0, 1), Vec3(0, 0, 0), lambda, 2.0);
  CHECK(std::abs(g) == doctest::Approx(5.84772600925257e-3).epsilon(1e-12));
  const cplx expected_phase = std::polar(1.0, -2.0 * oracle::pi / lambda);
  CHECK(std::abs(g / std::abs(g) - expected_phase) < 1e-9);

  const cplx g2 = channel_coefficient(Vec3(0, 0, 2), Vec3(0, 0, 0), lambda, 2.0);
  CHECK(std::abs(g2) == doctest::Approx(std::abs(g) / 2.0));
}

TEST_CASE("user behind the array receives nothing") {
  CHECK(channel_coefficient(Vec3(0, 0, 3), Vec3(1, 0, 4), 0.03, 2.0) == cplx(0.0, 0.0));
}

TEST_CASE("coincident points are degenerate") {
  CHECK_THROWS_AS(channel_coefficient(Vec3(1, 2, 3), Vec3(1, 2, 3), 0.03, 2.0),
                  DegenerateGeometry);
}

TEST_CASE("channel vector matches per-element reference") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double lambda = oracle::c0 / 10e9;
  const auto geom = build_array_geometry(0.1, lambda, 3.0);
  int nv = 0, nh = 0;
  const auto ref_pos = oracle::dma_positions(0.1, lambda, 3.0, nv, nh);
  REQUIRE(nv * nh == geom.total_elements);
  for (int t = 0; t < 20; ++t) {
    const Vec3 user(u(rng), u(rng), 0.0);
    const auto ch = channel_vector(geom, user, lambda, 2.0, 3);
    CHECK(ch.user_index == 3);
    REQUIRE(ch.coefficients.size() == geom.total_elements);
    double norm2 = 0.0;
    for (int e = 0; e < geom.total_elements; ++e) {
      const auto ref = oracle::gamma(ref_pos[e], user, lambda, 2.0);
      CHECK(std::abs(ch.coefficients[e] - ref) <= 1e-12 * std::abs(ref) + 1e-18);
      norm2 += std::norm(ref);
      // phase-distance consistency
      const double d = (user - geom.element_positions[e]).norm();
      const double recovered = std::arg(ch.coefficients[e]) * (-lambda / (2.0 * oracle::pi));
      const double diff = std::remainder(recovered - d, lambda);
      CHECK(std::abs(diff) < 1e-9 * d);
      // gain bound
      CHECK(std::abs(ch.coefficients[e]) <= lambda / (4.0 * oracle::pi * d) * std::sqrt(6.0) + 1e-15);
    }
    CHECK(ch.coefficients.squaredNorm() == doctest::Approx(norm2).epsilon(1e-12));
  }
}

TEST_CASE("mirror-symmetric elements see equal magnitudes") {
  const double lambda = 0.03;
  const auto geom = build_array_geometry(0.1, lambda, 3.0);
  const auto ch = channel_vector(geom, Vec3(0, 2.0, 0), lambda, 2.0);
  for (int i = 0; i < geom.num_waveguides; ++i) {
    for (int l = 0; l < geom.elements_per_waveguide; ++l) {
      const int mirror = geom.index(i, geom.elements_per_waveguide - 1 - l);
      CHECK(std::abs(ch.coefficients[geom.index(i, l)]) ==
            doctest::Approx(std::abs(ch.coefficients[mirror])).epsilon(1e-12));
    }
  }
}

TEST_CASE("singleton array and channel sets") {
  const std::vector<Vec3> one{Vec3(0, 0, 3)};
  const Vec3 user(1, 1, 0);
  const auto ch = channel_vector(std::span<const Vec3>(one), user, 0.03, 2.0);
  REQUIRE(ch.coefficients.size() == 1);
  CHECK(ch.coefficients[0] == channel_coefficient(one[0], user, 0.03, 2.0));
  const auto set = channel_set(one, {user, Vec3(-1, 0, 0)}, 0.03, 2.0);
  REQUIRE(set.size() == 2);
  CHECK(set[1].user_index == 1);
}

TEST_CASE("magnitude decays monotonically along boresight") {
  double prev = 1e9;
  for (double d = 0.5; d < 10.0; d += 0.37) {
    const double a = std::abs(channel_coefficient(Vec3(0, 0, d), Vec3::Zero(), 0.03, 2.0));
    CHECK(a < prev);
    prev = a;
  }
}
