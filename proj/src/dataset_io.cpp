#include "graspkit/dataset_io.hpp"

#include <set>
#include <sstream>

#include "graspkit/error.hpp"
#include "json_util.hpp"

namespace graspkit {

using namespace jsonutil;

const SceneObject* SceneRecord::find_object(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

int SceneRecord::relation_label(int first, int second) const {
  for (const auto& r : relations) {
    if (r.above == first && r.below == second) return kRelFirstAbove;
    if (r.above == second && r.below == first) return kRelFirstBelow;
  }
  return kRelNone;
}

void validate_scene(const SceneRecord& rec) {
  if (rec.width < 1 || rec.height < 1) fail("image", "width and height must be positive");
  std::set<int> ids;
  for (std::size_t i = 0; i < rec.objects.size(); ++i) {
    const auto& o = rec.objects[i];
    const std::string path = at("objects", i);
    if (!ids.insert(o.id).second) fail(path + ".id", "duplicate object id " + std::to_string(o.id));
    if (o.category.empty()) fail(path + ".category", "empty category");
    if (o.box.xmin() < 0.0 || o.box.ymin() < 0.0 || o.box.xmax() > rec.width ||
        o.box.ymax() > rec.height) {
      fail(path + ".bbox", "box outside the image");
    }
  }
  for (std::size_t i = 0; i < rec.grasps.size(); ++i) {
    const auto& g = rec.grasps[i];
    if (!ids.count(g.owner)) {
      fail(at("grasps", i) + ".owner", "dangling owner id " + std::to_string(g.owner));
    }
    if (g.rect.x() < 0.0 || g.rect.y() < 0.0 || g.rect.x() > rec.width ||
        g.rect.y() > rec.height) {
      fail(at("grasps", i) + ".rect", "grasp center outside the image");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < rec.relations.size(); ++i) {
    const auto& r = rec.relations[i];
    const std::string path = at("relations", i);
    if (!ids.count(r.above)) fail(path + ".above", "unknown object id " + std::to_string(r.above));
    if (!ids.count(r.below)) fail(path + ".below", "unknown object id " + std::to_string(r.below));
    if (r.above == r.below) fail(path, "object related to itself");
    if (seen.count({r.below, r.above})) {
      fail(path, "inconsistent relation: " + std::to_string(r.above) + " and " +
                     std::to_string(r.below) + " are each above the other");
    }
    if (!seen.insert({r.above, r.below}).second) fail(path, "duplicate relation");
  }
}

SceneRecord parse_scene(std::string_view json_text) {
  const json doc = parse_document(json_text);
  SceneRecord rec;
  const json& image = field(doc, "image", "$");
  rec.width = integer(field(image, "width", "image"), "image.width");
  rec.height = integer(field(image, "height", "image"), "image.height");
  if (image.contains("path")) rec.image_path = text(image["path"], "image.path");
  if (doc.contains("depth_path")) rec.depth_path = text(doc["depth_path"], "depth_path");

  const json& objects = array(field(doc, "objects", "$"), "objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = at("objects", i);
    const json& o = objects[i];
    rec.objects.push_back({integer(field(o, "id", path), path + ".id"),
                           text(field(o, "category", path), path + ".category"),
                           box_at(field(o, "bbox", path), path + ".bbox")});
  }
  if (doc.contains("grasps")) {
    const json& grasps = array(doc["grasps"], "grasps");
    for (std::size_t i = 0; i < grasps.size(); ++i) {
      const std::string path = at("grasps", i);
      rec.grasps.push_back({integer(field(grasps[i], "owner", path), path + ".owner"),
                            rect_at(field(grasps[i], "rect", path), path + ".rect")});
    }
  }
  if (doc.contains("relations")) {
    const json& rels = array(doc["relations"], "relations");
    for (std::size_t i = 0; i < rels.size(); ++i) {
      const std::string path = at("relations", i);
      rec.relations.push_back({integer(field(rels[i], "above", path), path + ".above"),
                               integer(field(rels[i], "below", path), path + ".below")});
    }
  }
  validate_scene(rec);
  return rec;
}

std::string serialize_scene(const SceneRecord& rec) {
  json doc;
  json image;
  image["width"] = rec.width;
  image["height"] = rec.height;
  if (rec.image_path) image["path"] = *rec.image_path;
  doc["image"] = image;
  if (rec.depth_path) doc["depth_path"] = *rec.depth_path;
  doc["objects"] = json::array();
  for (const auto& o : rec.objects) {
    doc["objects"].push_back({{"id", o.id}, {"category", o.category}, {"bbox", box_json(o.box)}});
  }
  doc["grasps"] = json::array();
  for (const auto& g : rec.grasps) {
    doc["grasps"].push_back({{"owner", g.owner}, {"rect", rect_json(g.rect)}});
  }
  doc["relations"] = json::array();
  for (const auto& r : rec.relations) {
    doc["relations"].push_back({{"above", r.above}, {"below", r.below}});
  }
  return doc.dump(2) + "\n";
}

SceneRecord hflip(const SceneRecord& rec) {
  SceneRecord out = rec;
  const double w = rec.width;
  for (auto& o : out.objects) {
    o.box = AABox(w - o.box.xmax(), o.box.ymin(), w - o.box.xmin(), o.box.ymax());
  }
  for (auto& g : out.grasps) {
    g.rect = OrientedRect(w - g.rect.x(), g.rect.y(), g.rect.w(), g.rect.h(), -g.rect.theta());
  }
  return out;
}

SceneRecord rot90(const SceneRecord& rec, int quarter_turns) {
  SceneRecord out = rec;
  const int turns = ((quarter_turns % 4) + 4) % 4;
  for (int t = 0; t < turns; ++t) {
    // One counter-clockwise turn: (x, y) -> (y, W - x), size (W, H) -> (H, W).
    const double w = out.width;
    for (auto& o : out.objects) {
      o.box = AABox(o.box.ymin(), w - o.box.xmax(), o.box.ymax(), w - o.box.xmin());
    }
    for (auto& g : out.grasps) {
      g.rect = OrientedRect(g.rect.y(), w - g.rect.x(), g.rect.w(), g.rect.h(),
                            g.rect.theta() + 90.0);
    }
    std::swap(out.width, out.height);
  }
  return out;
}

// ---- predictions ---------------------------------------------------------

ScenePrediction parse_prediction(std::string_view json_text) {
  const json doc = parse_document(json_text);
  ScenePrediction pred;
  if (doc.contains("image")) {
    const json& image = doc["image"];
    pred.width = integer(field(image, "width", "image"), "image.width");
    pred.height = integer(field(image, "height", "image"), "image.height");
  }
  const json& dets = array(field(doc, "detections", "$"), "detections");
  std::set<int> ids;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const std::string path = at("detections", i);
    const json& d = dets[i];
    PredictedObject obj{
        {box_at(field(d, "bbox", path), path + ".bbox"),
         text(field(d, "category", path), path + ".category"),
         number(field(d, "score", path), path + ".score"),
         integer(field(d, "id", path), path + ".id")},
        {}};
    if (obj.detection.score < 0.0 || obj.detection.score > 1.0) {
      fail(path + ".score", "score outside [0, 1]");
    }
    if (!ids.insert(obj.detection.instance_id).second) {
      fail(path + ".id", "duplicate detection id");
    }
    if (d.contains("grasps")) {
      const json& gs = array(d["grasps"], path + ".grasps");
      for (std::size_t j = 0; j < gs.size(); ++j) {
        const std::string gp = at(path + ".grasps", j);
        const double conf = number(field(gs[j], "confidence", gp), gp + ".confidence");
        if (conf < 0.0 || conf > 1.0) fail(gp + ".confidence", "confidence outside [0, 1]");
        obj.grasps.push_back({rect_at(field(gs[j], "rect", gp), gp + ".rect"), conf});
      }
    }
    if (d.contains("anchor_outputs")) {
      // Raw per-anchor detector outputs over this detection's box.
      const std::string ap = path + ".anchor_outputs";
      const json& a = d["anchor_outputs"];
      AnchorConfig cfg;
      cfg.grid_w = integer(field(a, "grid_w", ap), ap + ".grid_w");
      cfg.grid_h = integer(field(a, "grid_h", ap), ap + ".grid_h");
      cfg.k = integer(field(a, "k", ap), ap + ".k");
      cfg.anchor_size = number(field(a, "anchor_size", ap), ap + ".anchor_size");
      const json& values = array(field(a, "values", ap), ap + ".values");
      std::vector<AnchorOutput> outputs;
      for (std::size_t j = 0; j < values.size(); ++j) {
        const auto v = numbers(values[j], 7, at(ap + ".values", j));
        outputs.push_back({{v[0], v[1], v[2], v[3], v[4]}, v[5], v[6]});
      }
      try {
        auto decoded = decode_roi_grasps(obj.detection.box, outputs, cfg);
        obj.grasps.insert(obj.grasps.end(), decoded.begin(), decoded.end());
      } catch (const Error& e) {
        fail(ap, e.what());
      }
    }
    pred.objects.push_back(std::move(obj));
  }
  if (doc.contains("relations")) {
    const json& rels = array(doc["relations"], "relations");
    for (std::size_t i = 0; i < rels.size(); ++i) {
      const std::string path = at("relations", i);
      const auto p = numbers(field(rels[i], "probs", path), 3, path + ".probs");
      RelationPrediction r{integer(field(rels[i], "first", path), path + ".first"),
                           integer(field(rels[i], "second", path), path + ".second"),
                           {p[0], p[1], p[2]}};
      if (!ids.count(r.first) || !ids.count(r.second)) fail(path, "relation refers to unknown detection");
      try {
        validate_relation_prediction(r);
      } catch (const Error& e) {
        fail(path, e.what());
      }
      pred.relations.push_back(r);
    }
  }
  return pred;
}

std::string serialize_prediction(const ScenePrediction& pred) {
  json doc;
  doc["image"] = {{"width", pred.width}, {"height", pred.height}};
  doc["detections"] = json::array();
  for (const auto& o : pred.objects) {
    json d;
    d["id"] = o.detection.instance_id;
    d["category"] = o.detection.category;
    d["bbox"] = box_json(o.detection.box);
    d["score"] = o.detection.score;
    d["grasps"] = json::array();
    for (const auto& g : o.grasps) {
      d["grasps"].push_back({{"rect", rect_json(g.rect)}, {"confidence", g.confidence}});
    }
    doc["detections"].push_back(std::move(d));
  }
  doc["relations"] = json::array();
  for (const auto& r : pred.relations) {
    doc["relations"].push_back({{"first", r.first},
                                {"second", r.second},
                                {"probs", {r.probs[0], r.probs[1], r.probs[2]}}});
  }
  return doc.dump(2) + "\n";
}

ScenePrediction prediction_from_scene(const SceneRecord& rec) {
  ScenePrediction pred;
  pred.width = rec.width;
  pred.height = rec.height;
  for (const auto& o : rec.objects) {
    PredictedObject p{{o.box, o.category, 1.0, o.id}, {}};
    for (const auto& g : rec.grasps) {
      if (g.owner == o.id) p.grasps.push_back({g.rect, 1.0});
    }
    pred.objects.push_back(std::move(p));
  }
  for (const auto& a : rec.objects) {
    for (const auto& b : rec.objects) {
      if (a.id == b.id) continue;
      RelationPrediction r{a.id, b.id, {0.0, 0.0, 0.0}};
      r.probs[static_cast<std::size_t>(rec.relation_label(a.id, b.id))] = 1.0;
      pred.relations.push_back(r);
    }
  }
  return pred;
}

}  // namespace graspkit
