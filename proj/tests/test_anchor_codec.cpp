#include <doctest.h>

#include <cmath>
#include <random>

#include "graspkit/anchor_codec.hpp"
#include "graspkit/error.hpp"

using namespace graspkit;

TEST_CASE("generate_anchors on unit cells") {
  AnchorConfig cfg{7, 7, 1, 12};
  const auto anchors = generate_anchors({0, 0, 7, 7}, cfg);
  REQUIRE(anchors.size() == 49);
  for (int row = 0; row < 7; ++row) {
    for (int col = 0; col < 7; ++col) {
      const auto& a = anchors[static_cast<std::size_t>(row * 7 + col)];
      CHECK(a.x == doctest::Approx(col + 0.5));
      CHECK(a.y == doctest::Approx(row + 0.5));
      CHECK(a.theta == 0.0);
      CHECK(a.w == 12.0);
      CHECK(a.h == 12.0);
    }
  }
}

TEST_CASE("anchor orientations and index layout") {
  CHECK(anchor_orientation(0, 4) == doctest::Approx(-67.5));
  CHECK(anchor_orientation(1, 4) == doctest::Approx(-22.5));
  CHECK(anchor_orientation(2, 4) == doctest::Approx(22.5));
  CHECK(anchor_orientation(3, 4) == doctest::Approx(67.5));

  AnchorConfig cfg{7, 7, 4, 12};
  const auto anchors = generate_anchors({0, 0, 14, 14}, cfg);
  REQUIRE(anchors.size() == 196);
  CHECK(anchors[0].x == doctest::Approx(1.0));
  CHECK(anchors[0].y == doctest::Approx(1.0));
  const auto& a = anchors[static_cast<std::size_t>(((2 * 7) + 5) * 4 + 3)];
  CHECK(a.row == 2);
  CHECK(a.col == 5);
  CHECK(a.orient_index == 3);
  CHECK(a.x == doctest::Approx(11.0));
  CHECK(a.y == doctest::Approx(5.0));
}

TEST_CASE("AnchorConfig validation") {
  CHECK_THROWS_AS((AnchorConfig{0, 7, 4, 12}.validate()), Error);
  CHECK_THROWS_AS((AnchorConfig{7, 7, 0, 12}.validate()), Error);
  CHECK_THROWS_AS((AnchorConfig{7, 7, 4, -1}.validate()), Error);
}

TEST_CASE("decode_grasp examples") {
  OrientedAnchor a{100, 100, 24, 24, 22.5};
  const auto same = decode_grasp(a, {}, 4);
  CHECK(same == a.rect());
  const auto g = decode_grasp(a, {0.5, 0.5, 0, 0, 1}, 4);
  CHECK(g.x() == doctest::Approx(112));
  CHECK(g.y() == doctest::Approx(112));
  CHECK(g.w() == doctest::Approx(24));
  CHECK(g.theta() == doctest::Approx(45));

  OrientedAnchor b{0, 0, 12, 12, -22.5};
  const auto d = decode_grasp(b, {0, 0, std::log(2.0), std::log(2.0), 0}, 4);
  CHECK(d.w() == doctest::Approx(24));
  CHECK(d.h() == doctest::Approx(24));
  CHECK(d.theta() == doctest::Approx(-22.5));

  CHECK_THROWS_AS(decode_grasp(b, {0, 0, 800, 0, 0}, 4), Error);
  CHECK_THROWS_AS(decode_grasp(b, {0, 0, -800, 0, 0}, 4), Error);
}

TEST_CASE("encode_grasp examples") {
  OrientedAnchor a{10, 20, 12, 12, 67.5};
  CHECK(encode_grasp(a, a.rect(), 4) == GraspDelta{});
  const auto d = encode_grasp(a, {10, 20, 12, 12, -89}, 4);
  CHECK(d.dtheta == doctest::Approx(23.5 / 22.5));
}

TEST_CASE("encode then decode round trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-50, 50), size(2, 80), ang(-90, 90);
  for (int k : {1, 4, 6}) {
    for (double s : {12.0, 24.0}) {
      for (int i = 0; i < 200; ++i) {
        OrientedAnchor a{pos(rng), pos(rng), s, s, anchor_orientation(static_cast<int>(rng() % k), k)};
        const OrientedRect g(pos(rng), pos(rng), size(rng), size(rng), ang(rng));
        const auto r = decode_grasp(a, encode_grasp(a, g, k), k);
        CHECK(std::fabs(r.x() - g.x()) < 1e-9);
        CHECK(std::fabs(r.y() - g.y()) < 1e-9);
        CHECK(std::fabs(r.w() - g.w()) < 1e-9);
        CHECK(std::fabs(r.h() - g.h()) < 1e-9);
        CHECK(angle_difference(r.theta(), g.theta()) < 1e-9);
      }
    }
  }
}

TEST_CASE("containing_cell sends borders to the lower index") {
  AnchorConfig cfg{7, 7, 4, 12};
  const AABox roi(0, 0, 14, 14);
  CHECK(containing_cell(roi, cfg, {1, 1}) == std::pair{0, 0});
  CHECK(containing_cell(roi, cfg, {2, 2}) == std::pair{0, 0});
  CHECK(containing_cell(roi, cfg, {2.01, 4.5}) == std::pair{2, 1});
  CHECK(containing_cell(roi, cfg, {0, 0}) == std::pair{0, 0});
  CHECK(containing_cell(roi, cfg, {14, 14}) == std::pair{6, 6});
}

TEST_CASE("match_anchors") {
  AnchorConfig cfg{7, 7, 4, 12};
  const AABox roi(0, 0, 14, 14);
  const auto anchors = generate_anchors(roi, cfg);

  SUBCASE("no ground truth") {
    const auto m = match_anchors(roi, anchors, {}, cfg);
    CHECK(m.positives.empty());
    CHECK(m.negatives.size() == 196);
  }
  SUBCASE("nearest orientation in the containing cell") {
    std::vector<OrientedRect> gt{{5, 3, 10, 4, 10}};
    const auto m = match_anchors(roi, anchors, gt, cfg);
    REQUIRE(m.positives.size() == 1);
    const auto& a = anchors[m.positives[0].first];
    CHECK(a.row == 1);
    CHECK(a.col == 2);
    CHECK(a.theta == doctest::Approx(22.5));
    CHECK(m.negatives.size() == 195);
  }
  SUBCASE("halfway between orientations goes to the lower index") {
    std::vector<OrientedRect> gt{{5, 3, 10, 4, 0}};
    const auto m = match_anchors(roi, anchors, gt, cfg);
    REQUIRE(m.positives.size() == 1);
    CHECK(anchors[m.positives[0].first].orient_index == 1);
  }
  SUBCASE("center outside the roi is skipped") {
    std::vector<OrientedRect> gt{{20, 3, 10, 4, 0}};
    const auto m = match_anchors(roi, anchors, gt, cfg);
    CHECK(m.positives.empty());
    CHECK(m.skipped == std::vector<std::size_t>{0});
  }
  SUBCASE("colliding ground truth takes the next free orientation") {
    std::vector<OrientedRect> gt{{5, 3, 10, 4, 20}, {5, 3, 10, 4, 25}};
    const auto m = match_anchors(roi, anchors, gt, cfg);
    REQUIRE(m.positives.size() == 2);
    CHECK(anchors[m.positives[0].first].orient_index == 2);
    CHECK(anchors[m.positives[1].first].orient_index == 3);
  }
}
