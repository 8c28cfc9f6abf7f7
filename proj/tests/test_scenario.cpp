#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "radarest/errors.hpp"
#include "radarest/scenario.hpp"

using namespace radarest;

namespace {

Scenario two_array_scenario() {
  Scenario sc;
  auto [tx, rx] = place_ring(1, 1, 1100.0);
  sc.tx_arrays = tx;
  sc.rx_arrays = rx;
  sc.tx_arrays[0].center = {1100.0, 0.0};
  sc.tx_arrays[0].orientation = std::numbers::pi;
  sc.rx_arrays[0].center = {-1100.0, 0.0};
  sc.rx_arrays[0].orientation = 0.0;
  sc.targets.push_back({{0.0, 0.0}, {0.0, 0.0}});
  sc.samples = 64;
  sc.wave_speed = 3e8;
  return sc;
}

}  // namespace

TEST_CASE("ring with two receivers puts them on the x axis") {
  auto [tx, rx] = place_ring(1, 2, 1100.0);
  CHECK(rx[0].center.x() == doctest::Approx(1100.0));
  CHECK(rx[0].center.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rx[1].center.x() == doctest::Approx(-1100.0));
  CHECK(std::abs(rx[1].center.y()) < 1e-9);
}

TEST_CASE("first of six transmitters sits at 30 degrees") {
  auto [tx, rx] = place_ring(6, 1, 1100.0);
  CHECK(tx[0].center.x() == doctest::Approx(952.628).epsilon(1e-6));
  CHECK(tx[0].center.y() == doctest::Approx(550.0).epsilon(1e-9));
}

TEST_CASE("single receiver points its boresight at the origin") {
  auto [tx, rx] = place_ring(1, 1, 1100.0);
  REQUIRE(rx.size() == 1);
  CHECK(rx[0].center.x() == doctest::Approx(1100.0));
  CHECK(std::abs(rx[0].center.y()) < 1e-9);
  CHECK(rx[0].orientation == doctest::Approx(std::numbers::pi));
}

TEST_CASE("all ring centers sit at the requested radius") {
  auto [tx, rx] = place_ring(5, 7, 1234.5);
  for (const auto& a : tx) CHECK(a.center.norm() == doctest::Approx(1234.5).epsilon(1e-9));
  for (const auto& a : rx) CHECK(a.center.norm() == doctest::Approx(1234.5).epsilon(1e-9));
}

TEST_CASE("ring rejects non-positive counts and radius") {
  CHECK_THROWS_AS(place_ring(0, 1, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(place_ring(1, 0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(place_ring(1, 1, -5.0), std::invalid_argument);
}

TEST_CASE("delay across the 2200 m baseline is 7.33 microseconds") {
  const Scenario sc = two_array_scenario();
  const PathGeometry g = path_geometry(sc, 0, 0, 0);
  const double tau = g.delay_samples * sc.sample_interval_s;
  CHECK(tau == doctest::Approx(2200.0 / 3e8).epsilon(1e-12));
  CHECK(g.tx_range == doctest::Approx(1100.0));
  CHECK(g.rx_range == doctest::Approx(1100.0));
}

TEST_CASE("stationary target has zero Doppler") {
  const Scenario sc = two_array_scenario();
  CHECK(path_geometry(sc, 0, 0, 0).doppler_per_sample == 0.0);
}

TEST_CASE("path loss is the inverse square of the summed ranges") {
  const Scenario sc = two_array_scenario();
  const PathGeometry g = path_geometry(sc, 0, 0, 0);
  CHECK(g.path_loss == doctest::Approx(1.0 / (2200.0 * 2200.0)).epsilon(1e-12));
}

TEST_CASE("target on an array center is degenerate") {
  Scenario sc = two_array_scenario();
  sc.targets[0].position = sc.tx_arrays[0].center;
  CHECK_THROWS_AS(path_geometry(sc, 0, 0, 0), DegenerateGeometry);
  CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("path geometry is a pure function of target index") {
  Scenario sc = two_array_scenario();
  sc.targets.push_back({{50.0, -30.0}, {3.0, 1.0}});
  const PathGeometry a0 = path_geometry(sc, 0, 0, 0);
  const PathGeometry a1 = path_geometry(sc, 0, 1, 0);
  std::swap(sc.targets[0], sc.targets[1]);
  const PathGeometry b0 = path_geometry(sc, 0, 0, 0);
  const PathGeometry b1 = path_geometry(sc, 0, 1, 0);
  CHECK(a0.delay_samples == b1.delay_samples);
  CHECK(a1.delay_samples == b0.delay_samples);
  CHECK(a1.doppler_per_sample == b0.doppler_per_sample);
  CHECK(a0.rx_bearing == b1.rx_bearing);
}

TEST_CASE("Doppler is linear in velocity") {
  Scenario sc = two_array_scenario();
  sc.targets[0].position = {37.0, -12.0};
  sc.targets[0].velocity = {4.0, -9.0};
  const double w1 = path_geometry(sc, 0, 0, 0).doppler_per_sample;
  sc.targets[0].velocity *= 2.0;
  const double w2 = path_geometry(sc, 0, 0, 0).doppler_per_sample;
  CHECK(w2 == doctest::Approx(2.0 * w1).epsilon(1e-14));
}

TEST_CASE("path loss decreases as the target recedes from both arrays") {
  Scenario sc = two_array_scenario();
  double prev = std::numeric_limits<double>::infinity();
  for (double y = 0.0; y <= 500.0; y += 100.0) {
    sc.targets[0].position = {0.0, y};  // radially away from both x-axis arrays
    const double loss = path_geometry(sc, 0, 0, 0).path_loss;
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("validation enforces positivity and the speed limit") {
  Scenario sc = two_array_scenario();
  sc.validate();

  Scenario bad = sc;
  bad.noise_power = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = sc;
  bad.samples = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = sc;
  bad.targets[0].velocity = {1e6, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = sc;
  bad.tx_arrays[0].element_spacing = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
}
