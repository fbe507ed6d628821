#include <doctest.h>

#include <cmath>
#include <string>

#include "graspkit/dataset_io.hpp"
#include "graspkit/error.hpp"

using namespace graspkit;

namespace {

const char* kMinimal = R"({
  "image": {
    "width": 100,
    "height": 50
  },
  "objects": [
    {
      "id": 1,
      "category": "cup",
      "bbox": [
        10.0,
        20.0,
        30.0,
        40.0
      ]
    }
  ],
  "grasps": [
    {
      "owner": 1,
      "rect": [
        20.0,
        30.0,
        8.0,
        4.0,
        30.0
      ]
    }
  ],
  "relations": []
}
)";

std::string parse_error(const std::string& text) {
  try {
    parse_scene(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    return e.what();
  }
  return "";
}

SceneRecord two_objects() {
  SceneRecord rec;
  rec.width = 100;
  rec.height = 50;
  rec.objects = {{1, "cup", {10, 20, 30, 40}}, {2, "pen", {15, 25, 40, 45}}};
  rec.grasps = {{1, {20, 30, 8, 4, 30}}, {2, {10, 20, 6, 3, -67.5}}};
  rec.relations = {{2, 1}};
  return rec;
}

bool same(const SceneRecord& a, const SceneRecord& b) {
  if (a.width != b.width || a.height != b.height || a.objects.size() != b.objects.size() ||
      a.grasps.size() != b.grasps.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i].box;
    const auto& y = b.objects[i].box;
    if (std::fabs(x.xmin() - y.xmin()) + std::fabs(x.ymin() - y.ymin()) +
            std::fabs(x.xmax() - y.xmax()) + std::fabs(x.ymax() - y.ymax()) > 1e-9) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.grasps.size(); ++i) {
    const auto& x = a.grasps[i].rect;
    const auto& y = b.grasps[i].rect;
    if (std::fabs(x.x() - y.x()) + std::fabs(x.y() - y.y()) > 1e-9 ||
        angle_difference(x.theta(), y.theta()) > 1e-9) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("minimal scene round trips byte for byte") {
  const auto rec = parse_scene(kMinimal);
  CHECK(serialize_scene(rec) == kMinimal);
}

TEST_CASE("scene validation errors name the offending field") {
  CHECK(parse_error(R"({"image":{"width":10,"height":10},"objects":[],
    "grasps":[{"owner":7,"rect":[1,1,1,1,0]}]})").find("dangling owner") != std::string::npos);
  CHECK(parse_error(R"({"image":{"width":10,"height":10},
    "objects":[{"id":1,"category":"a","bbox":[0,0,1,1]},{"id":2,"category":"b","bbox":[0,0,1,1]}],
    "relations":[{"above":1,"below":2},{"above":2,"below":1}]})").find("inconsistent") != std::string::npos);
  CHECK(parse_error(R"({"image":{"width":10,"height":10},
    "objects":[{"id":1,"category":"a","bbox":[0,0,1,1]},{"id":1,"category":"b","bbox":[0,0,1,1]}]})")
            .find("duplicate") != std::string::npos);
  CHECK(parse_error(R"({"image":{"width":10,"height":10},
    "objects":[{"id":1,"category":"a","bbox":[0,0,20,1]}]})").find("objects[0].bbox") != std::string::npos);
  CHECK(parse_error(R"({"image":{"width":10,"height":10},
    "objects":[{"id":1,"category":"a","bbox":[0,0,1]}]})").find("objects[0].bbox") != std::string::npos);
  CHECK(parse_error(R"({"image":{"width":10,"height":10},"objects":[{"id":"x"}]})")
            .find("objects[0]") != std::string::npos);
  CHECK(parse_error("{not json").find("invalid JSON") != std::string::npos);
  CHECK(parse_error("[]").find("$") != std::string::npos);
}

TEST_CASE("hflip") {
  const auto rec = two_objects();
  const auto f = hflip(rec);
  CHECK(f.objects[0].box == AABox(70, 20, 90, 40));
  CHECK(f.grasps[0].rect.theta() == doctest::Approx(-30));
  CHECK(f.grasps[0].rect.x() == doctest::Approx(80));
  CHECK(same(hflip(f), rec));
  CHECK(f.relations.size() == 1);
}

TEST_CASE("rot90") {
  const auto rec = two_objects();
  CHECK(same(rot90(rec, 4), rec));
  CHECK(same(rot90(rot90(rec, 1), 3), rec));
  const auto r = rot90(rec, 1);
  CHECK(r.width == 50);
  CHECK(r.height == 100);
  CHECK(r.grasps[1].rect.x() == doctest::Approx(20));
  CHECK(r.grasps[1].rect.y() == doctest::Approx(90));
  CHECK(r.grasps[1].rect.theta() == doctest::Approx(22.5));
  CHECK_NOTHROW(validate_scene(r));
}

TEST_CASE("prediction parse and serialize") {
  const auto rec = two_objects();
  const auto pred = prediction_from_scene(rec);
  CHECK(pred.objects.size() == 2);
  CHECK(pred.relations.size() == 2);
  const auto text = serialize_prediction(pred);
  const auto back = parse_prediction(text);
  CHECK(serialize_prediction(back) == text);
  CHECK(back.relations[1].probs[kRelFirstAbove] == 1.0);  // (2, 1)
}

TEST_CASE("prediction with raw anchor outputs") {
  std::string values;
  for (int i = 0; i < 4; ++i) values += std::string(i ? "," : "") + "[0,0,0,0,0,1,0]";
  const std::string text = R"({"detections":[{"id":1,"category":"cup","bbox":[0,0,20,20],"score":0.9,
    "anchor_outputs":{"grid_w":2,"grid_h":1,"k":2,"anchor_size":12,"values":[)" + values + "]}}]}";
  const auto pred = parse_prediction(text);
  REQUIRE(pred.objects[0].grasps.size() == 4);
  CHECK(pred.objects[0].grasps[0].rect.x() == doctest::Approx(5));
  CHECK(pred.objects[0].grasps[0].confidence == doctest::Approx(1 / (1 + std::exp(-1.0))));
}

TEST_CASE("prediction validation") {
  CHECK_THROWS_AS(parse_prediction(R"({"detections":[{"id":1,"category":"a","bbox":[0,0,1,1],"score":2}]})"), Error);
  CHECK_THROWS_AS(parse_prediction(R"({"detections":[{"id":1,"category":"a","bbox":[0,0,1,1],"score":1}],
    "relations":[{"first":1,"second":2,"probs":[1,0,0]}]})"), Error);
  CHECK_THROWS_AS(parse_prediction(R"({"detections":[{"id":1,"category":"a","bbox":[0,0,1,1],"score":1},
    {"id":2,"category":"a","bbox":[0,0,1,1],"score":1}],
    "relations":[{"first":1,"second":2,"probs":[0.5,0,0]}]})"), Error);
}
