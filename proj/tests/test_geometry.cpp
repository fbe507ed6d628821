#include <doctest.h>

#include <cmath>
#include <random>

#include "graspkit/error.hpp"
#include "graspkit/geometry.hpp"
#include "oracles.hpp"

using namespace graspkit;

TEST_CASE("normalize_angle maps onto [-90, 90)") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(90.0) == -90.0);
  CHECK(normalize_angle(-90.0) == -90.0);
  CHECK(normalize_angle(135.0) == doctest::Approx(-45.0));
  CHECK(normalize_angle(-100.0) == doctest::Approx(80.0));
  CHECK(normalize_angle(720.5) == doctest::Approx(0.5));
}

TEST_CASE("angle_difference works on the 180 degree circle") {
  CHECK(angle_difference(30, 30) == 0.0);
  CHECK(angle_difference(30, 150) == doctest::Approx(60.0));
  CHECK(angle_difference(-67.5, 67.5) == doctest::Approx(45.0));
  CHECK(angle_difference(-89, 89) == doctest::Approx(2.0));
  CHECK(angle_difference(0, 90) == doctest::Approx(90.0));
}

TEST_CASE("OrientedRect validates and normalizes") {
  CHECK_THROWS_AS(OrientedRect(0, 0, 0, 1, 0), Error);
  CHECK_THROWS_AS(OrientedRect(0, 0, 1, 1e-7, 0), Error);
  CHECK_THROWS_AS(OrientedRect(NAN, 0, 1, 1, 0), Error);
  CHECK(OrientedRect(0, 0, 1, 1, 90).theta() == -90.0);
  CHECK_THROWS_AS(AABox(1, 0, 1, 2), Error);
}

TEST_CASE("rect_vertices") {
  const auto v = rect_vertices({0, 0, 2, 2, 0});
  for (const auto& p : v) {
    CHECK(std::fabs(p.x) == doctest::Approx(1.0));
    CHECK(std::fabs(p.y) == doctest::Approx(1.0));
  }
  CHECK(polygon_area(v) == doctest::Approx(4.0));

  // A square turned by 90 degrees has the same corner set.
  const auto s = rect_vertices({0, 0, 2, 2, 90});
  for (const auto& p : s) {
    bool found = false;
    for (const auto& q : v) found = found || (std::fabs(p.x - q.x) < 1e-12 && std::fabs(p.y - q.y) < 1e-12);
    CHECK(found);
  }

  const auto r = rect_vertices({0, 0, 2, 1, 45});
  CHECK(polygon_area(r) == doctest::Approx(2.0));
  const double c = std::sqrt(0.5);
  bool found = false;
  for (const auto& p : r) found = found || (std::fabs(p.x - (c - 0.5 * c)) < 1e-3 && std::fabs(p.y - (c + 0.5 * c)) < 1e-3);
  CHECK(found);  // (0.354, 1.061)
}

TEST_CASE("rotated_jaccard examples") {
  const OrientedRect a(0, 0, 2, 2, 0);
  CHECK(rotated_jaccard(a, a) == doctest::Approx(1.0));
  CHECK(rotated_jaccard(a, {10, 10, 2, 2, 30}) == 0.0);
  CHECK(rotated_jaccard(a, {1, 0, 2, 2, 0}) == doctest::Approx(1.0 / 3.0));
  const double mc = oracle::mc_jaccard({0, 0, 2, 2, 0}, {1, 0, 2, 2, 0}, 1000000, 7);
  CHECK(std::fabs(mc - 1.0 / 3.0) < 0.005);
}

TEST_CASE("rotated_jaccard is symmetric and bounded") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5, 5), size(0.5, 6), ang(-90, 90);
  for (int i = 0; i < 500; ++i) {
    const OrientedRect a(pos(rng), pos(rng), size(rng), size(rng), ang(rng));
    const OrientedRect b(pos(rng), pos(rng), size(rng), size(rng), ang(rng));
    const double j = rotated_jaccard(a, b);
    CHECK(j >= 0.0);
    CHECK(j <= 1.0);
    CHECK(j == doctest::Approx(rotated_jaccard(b, a)).epsilon(1e-9));
  }
}

TEST_CASE("rotated_jaccard on nested and rotated squares") {
  // Inner square fully inside: IoU is the area ratio.
  CHECK(rotated_jaccard({0, 0, 4, 4, 0}, {0, 0, 2, 2, 17}) == doctest::Approx(0.25));
  // A square and the same square turned 45 degrees: octagon overlap.
  const double s = 2.0;
  const double octagon = 2 * (1 + std::sqrt(2.0)) * std::pow(s / (1 + std::sqrt(2.0)), 2);
  CHECK(rotated_jaccard({0, 0, s, s, 0}, {0, 0, s, s, 45}) ==
        doctest::Approx(octagon / (2 * s * s - octagon)));
}

TEST_CASE("aabb_iou and union_box") {
  const AABox a(0, 0, 2, 2);
  CHECK(aabb_iou(a, a) == 1.0);
  CHECK(aabb_iou(a, {3, 3, 4, 4}) == 0.0);
  CHECK(aabb_iou(a, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(aabb_iou(a, {2, 0, 3, 2}) == 0.0);  // touching edge
  CHECK(union_box({0, 0, 1, 1}, {0, 0, 1, 1}) == AABox(0, 0, 1, 1));
  CHECK(union_box({0, 0, 1, 1}, {2, 2, 3, 3}) == AABox(0, 0, 3, 3));
  CHECK(union_box({0, 1, 2, 4}, {1, 0, 3, 2}) == AABox(0, 0, 3, 4));
  CHECK(intersection_area({0, 0, 2, 2}, {1, 1, 5, 5}) == doctest::Approx(1.0));
}

TEST_CASE("point_in_rect is strict") {
  const OrientedRect r(0, 0, 2, 2, 0);
  CHECK(point_in_rect(r, {0, 0}));
  CHECK(point_in_rect(r, {0.99, 0.99}));
  CHECK_FALSE(point_in_rect(r, {1, 0}));
  CHECK_FALSE(point_in_rect(r, {1.5, 0}));
}
