#include <doctest.h>

#include <cmath>

#include "infrasteer/rng.hpp"
#include "infrasteer/world.hpp"

using namespace infrasteer;

namespace {

TrackSpec rounded_square() {
  TrackSpec spec;
  spec.start = make_pose(0.4, 0.2, 0.0);
  for (int i = 0; i < 4; ++i) {
    spec.pieces.push_back(StraightPiece{1.0});
    spec.pieces.push_back(ArcPiece{0.2, 90.0});
  }
  return spec;
}

TrackSpec centered_circle() {
  TrackSpec spec;
  spec.start = make_pose(1.0, 0.5, 0.0);
  spec.pieces.push_back(ArcPiece{0.5, 360.0});
  return spec;
}

} // namespace

TEST_CASE("rounded square closes with the analytic length") {
  const Track t = track_from_config(rounded_square());
  CHECK(t.length() == doctest::Approx(4.0 + 2.0 * kPi * 0.2).epsilon(1e-12));
  CHECK(t.segments().size() == 8);
  const Vec2 end = t.segments().back().end;
  CHECK(std::abs(end.x - 0.4) < 1e-9);
  CHECK(std::abs(end.y - 0.2) < 1e-9);
}

TEST_CASE("full circle has length pi") {
  const Track t = track_from_config(centered_circle());
  CHECK(t.length() == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("open and off-board tracks are rejected") {
  TrackSpec open;
  open.start = make_pose(0.2, 0.2, 0.0);
  open.pieces = {StraightPiece{0.5}, StraightPiece{0.5}};
  CHECK_THROWS_WITH_AS(track_from_config(open), "loop does not close", TrackError);

  TrackSpec off = rounded_square();
  off.start = make_pose(1.4, 0.2, 0.0);
  try {
    track_from_config(off);
    FAIL("expected a TrackError");
  } catch (const TrackError& e) {
    CHECK(e.segment_index() >= 0);
  }
}

TEST_CASE("reference track stays on the board") {
  const Track t = track_from_config(reference_track_spec());
  for (const Vec2 p : t.polyline()) {
    CHECK(p.x >= 0.0);
    CHECK(p.y >= 0.0);
    CHECK(p.x <= t.board_size());
    CHECK(p.y <= t.board_size());
  }
}

TEST_CASE("lateral deviation examples") {
  const Track square = track_from_config(rounded_square());
  CHECK(lateral_deviation(square, make_pose(0.9, 0.2, 0.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lateral_deviation(square, make_pose(0.9, 0.25, 0.0)) == doctest::Approx(0.05));
  CHECK(lateral_deviation(square, make_pose(0.9, 0.15, 0.0)) == doctest::Approx(-0.05));

  const Track circle = track_from_config(centered_circle());
  CHECK(std::abs(lateral_deviation(circle, make_pose(1.0, 1.0, 0.0))) == doctest::Approx(0.5));
}

TEST_CASE("step_vehicle examples") {
  const VehicleParams vp;
  const Pose start = make_pose(0.5, 0.5, 30.0);

  const Pose moved = step_vehicle(start, vp.nominal_power, vp.nominal_power, 1.0, vp);
  CHECK(moved.heading == start.heading);
  CHECK(moved.x - start.x == doctest::Approx(0.25 * std::cos(deg_to_rad(30.0))));
  CHECK(moved.y - start.y == doctest::Approx(0.25 * std::sin(deg_to_rad(30.0))));

  CHECK(step_vehicle(start, 0.0, 0.0, 1.0, vp) == start);

  // Pivot about the left wheel: radius wheel_separation / 2.
  const double dt = 0.1;
  const Pose pivot = step_vehicle(make_pose(1.0, 1.0, 0.0), 0.0, 2.0 * vp.nominal_power, dt, vp);
  const double omega = 0.25 / 0.06;
  CHECK(pivot.heading == doctest::Approx(rad_to_deg(omega * dt)));
  CHECK(pivot.x == doctest::Approx(1.0 + 0.06 * std::sin(omega * dt)));
  CHECK(pivot.y == doctest::Approx(1.0 + 0.06 * (1.0 - std::cos(omega * dt))));
}

TEST_CASE("negative powers clamp to zero") {
  const VehicleParams vp;
  const Pose p = make_pose(1.0, 1.0, 45.0);
  CHECK(step_vehicle(p, -20.0, -5.0, 0.5, vp) == p);
  CHECK(step_vehicle(p, 400.0, 400.0, 0.1, vp) ==
        step_vehicle(p, vp.max_power, vp.max_power, 0.1, vp));
}

TEST_CASE("kinematic properties on random inputs") {
  const VehicleParams vp;
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Pose p = make_pose(rng.uniform(0.2, 1.8), rng.uniform(0.2, 1.8), rng.uniform(0.0, 360.0));
    const double l = rng.uniform(0.0, 80.0);
    const double r = rng.uniform(0.0, 80.0);
    const double dt = rng.uniform(0.001, 0.05);

    CHECK(step_vehicle(p, l, l, dt, vp).heading == p.heading);

    const Pose twice = step_vehicle(step_vehicle(p, l, r, dt, vp), l, r, dt, vp);
    const Pose once = step_vehicle(p, l, r, 2.0 * dt, vp);
    CHECK(std::abs(twice.x - once.x) < 1e-9);
    CHECK(std::abs(twice.y - once.y) < 1e-9);
    double dh = std::fmod(std::abs(twice.heading - once.heading), 360.0);
    CHECK(std::min(dh, 360.0 - dh) < 1e-9);

    // Swapping the wheels mirrors the motion across the heading axis.
    const Pose a = step_vehicle(p, l, r, dt, vp);
    const Pose b = step_vehicle(p, r, l, dt, vp);
    const Vec2 va = to_vehicle_frame(p, a.position());
    const Vec2 vb = to_vehicle_frame(p, b.position());
    CHECK(std::abs(va.x - vb.x) < 1e-12);
    CHECK(std::abs(va.y + vb.y) < 1e-12);

    CHECK(a.heading >= 0.0);
    CHECK(a.heading < 360.0);
  }
}

TEST_CASE("deviation is continuous along a driven path") {
  const Track t = track_from_config(reference_track_spec());
  VehicleParams vp;
  Pose p = t.start_pose();
  const double dt = 0.005;
  double prev = lateral_deviation(t, p);
  Rng rng(3);
  for (int i = 0; i < 4000; ++i) {
    const double c = rng.uniform(-3.0, 3.0);
    p = step_vehicle(p, vp.nominal_power - c, vp.nominal_power + c, dt, vp);
    const double d = lateral_deviation(t, p);
    CHECK(std::abs(d - prev) <= vp.nominal_speed() * 1.2 * dt + 1e-6);
    prev = d;
  }
}

TEST_CASE("motor lag approaches the command") {
  VehicleParams vp;
  CHECK(motor_response({0, 0}, 30, 40, 0.005, vp).left == 30.0);
  vp.motor_time_constant = 0.05;
  WheelPowers w{0, 0};
  w = motor_response(w, 30, 40, 0.05, vp);
  CHECK(w.left == doctest::Approx(30.0 * (1.0 - std::exp(-1.0))));
  CHECK(w.right == doctest::Approx(40.0 * (1.0 - std::exp(-1.0))));
}
