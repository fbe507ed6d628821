#include "graspkit/reports.hpp"

#include <cmath>
#include <set>

#include "graspkit/error.hpp"
#include "json_util.hpp"

namespace graspkit {

using namespace jsonutil;

namespace {

json graph_json(const ManipulationGraph& g) {
  json out;
  out["nodes"] = g.nodes;
  auto edges = [](const std::vector<GraphEdge>& es) {
    json arr = json::array();
    for (const auto& e : es) {
      arr.push_back({{"above", e.above}, {"below", e.below}, {"confidence", e.confidence}});
    }
    return arr;
  };
  out["edges"] = edges(g.edges);
  out["deleted_edges"] = edges(g.deleted);
  out["leaves"] = leaves(g);
  return out;
}

json action_json(const GraspAction& a) {
  return {{"object", a.object},
          {"is_final_target", a.is_final_target},
          {"target_detected", a.target_detected},
          {"target_ambiguous", a.target_ambiguous}};
}

json noise_json(const NoiseModel& n) {
  return {{"drop", n.drop},
          {"box_sigma", n.box_sigma},
          {"angle_sigma", n.angle_sigma},
          {"relation_flip", n.relation_flip},
          {"score_sigma", n.score_sigma}};
}

NoiseModel parse_noise(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  NoiseModel n;
  n.drop = number_or(v, "drop", 0.0, path);
  n.box_sigma = number_or(v, "box_sigma", 0.0, path);
  n.angle_sigma = number_or(v, "angle_sigma", 0.0, path);
  n.relation_flip = number_or(v, "relation_flip", 0.0, path);
  n.score_sigma = number_or(v, "score_sigma", 0.0, path);
  try {
    n.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return n;
}

std::string rate_text(int num, int den) {
  char buf[64];
  const double pct = den == 0 ? 0.0 : 100.0 * num / den;
  std::snprintf(buf, sizeof buf, "%.1f%% (%d/%d)", pct, num, den);
  return buf;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& r, const EvalThresholds& thr,
                            const std::vector<ReportIssue>& issues) {
  json doc;
  doc["map_with_grasp"] = r.map_with_grasp;
  doc["per_class_ap"] = json::array();
  for (const auto& c : r.per_class) {
    doc["per_class_ap"].push_back({{"category", c.category},
                                   {"ap", c.ap},
                                   {"ground_truth", c.ground_truth},
                                   {"true_positives", c.true_positives},
                                   {"false_positives", c.false_positives}});
  }
  doc["obj_recall"] = r.obj_recall;
  doc["obj_precision"] = r.obj_precision;
  doc["image_accuracy"] = r.image_accuracy;
  doc["image_accuracy_by_object_count"] = json::array();
  for (const auto& [count, b] : r.image_accuracy_by_count) {
    doc["image_accuracy_by_object_count"].push_back(
        {{"objects", count},
         {"correct", b.correct},
         {"total", b.total},
         {"accuracy", b.total == 0 ? 0.0 : static_cast<double>(b.correct) / b.total}});
  }
  doc["counts"] = {{"scenes", r.scenes},
                   {"gt_objects", r.gt_objects},
                   {"predictions", r.predictions},
                   {"gt_pairs", r.gt_pairs},
                   {"predicted_pairs", r.predicted_pairs},
                   {"correct_pairs", r.correct_pairs}};
  doc["thresholds"] = {{"iou", thr.iou}, {"jaccard", thr.jaccard}, {"angle", thr.angle}};
  // Published numbers from the trained network, kept for side-by-side reading.
  doc["published_reference"] = {{"map_with_grasp", {0.680, 0.705}},
                                {"image_accuracy", {0.631, 0.671}}};
  doc["issues"] = json::array();
  for (const auto& i : issues) doc["issues"].push_back({{"kind", i.kind}, {"detail", i.detail}});
  return doc.dump(2) + "\n";
}

std::string plan_to_json(const Plan& plan) {
  json doc;
  doc["target_detected"] = plan.target_detected;
  doc["target_reached"] = plan.target_reached;
  doc["target_ambiguous"] = plan.target_ambiguous;
  doc["steps"] = json::array();
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    json step;
    step["step"] = i;
    step["action"] = action_json(s.action);
    step["grasp"] = s.grasp ? rect_json(*s.grasp) : json(nullptr);
    step["grasp_confidence"] = s.grasp_confidence;
    step["graph"] = graph_json(s.graph);
    doc["steps"].push_back(std::move(step));
  }
  return doc.dump(2) + "\n";
}

std::string trial_log_to_json(const TrialLog& log) {
  json doc;
  doc["seed"] = log.seed;
  doc["object_count"] = log.object_count;
  doc["target"] = log.target;
  doc["target_initially_visible"] = log.target_initially_visible;
  doc["success"] = log.success;
  doc["steps"] = json::array();
  for (const auto& s : log.steps) {
    json step;
    step["step"] = s.index;
    step["detected"] = s.detected;
    step["target_visible"] = s.target_visible;
    step["action"] = s.action ? action_json(*s.action) : json(nullptr);
    step["graph"] = graph_json(s.graph);
    step["grasp"] = s.grasp ? rect_json(*s.grasp) : json(nullptr);
    step["grasp_failed"] = s.grasp_failed;
    step["removed"] = s.removed ? json(*s.removed) : json(nullptr);
    step["order_valid"] = s.order_valid;
    doc["steps"].push_back(std::move(step));
  }
  return doc.dump(2) + "\n";
}

SimulationConfig parse_simulation_config(std::string_view json_text) {
  const json doc = parse_document(json_text);
  if (!doc.is_object()) fail("$", "expected an object");
  SimulationConfig cfg;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.trials_per_type = integer_or(doc, "trials_per_type", 32, "$");
  if (doc.contains("scene_types")) {
    const json& types = array(doc["scene_types"], "scene_types");
    for (std::size_t i = 0; i < types.size(); ++i) {
      const std::string path = at("scene_types", i);
      SceneType t;
      t.name = text(field(types[i], "name", path), path + ".name");
      t.min_objects = integer(field(types[i], "min_objects", path), path + ".min_objects");
      t.max_objects = integer(field(types[i], "max_objects", path), path + ".max_objects");
      if (types[i].contains("stacked")) t.stacked = boolean(types[i]["stacked"], path + ".stacked");
      cfg.scene_types.push_back(t);
    }
  } else {
    cfg.scene_types = {{"familiar", 2, 5, true}, {"complex", 6, 9, true}};
  }
  if (doc.contains("noise_levels")) {
    const json& levels = array(doc["noise_levels"], "noise_levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      cfg.noise_levels.push_back(parse_noise(levels[i], at("noise_levels", i)));
    }
  }
  TrialConfig& t = cfg.trial;
  t.max_steps = integer_or(doc, "max_steps", 0, "$");
  t.visibility = number_or(doc, "visibility", t.visibility, "$");
  t.max_opening = number_or(doc, "max_opening", 0.0, "$");
  t.perception.top_n = integer_or(doc, "top_n", t.perception.top_n, "$");
  t.perception.nms_iou = number_or(doc, "nms_iou", t.perception.nms_iou, "$");
  t.perception.score_floor = number_or(doc, "score_floor", t.perception.score_floor, "$");
  if (doc.contains("image")) {
    t.scene.width = integer(field(doc["image"], "width", "image"), "image.width");
    t.scene.height = integer(field(doc["image"], "height", "image"), "image.height");
  }
  if (doc.contains("target_rule")) {
    const std::string rule = text(doc["target_rule"], "target_rule");
    if (rule == "random") {
      t.target_rule = TargetRule::kRandom;
    } else if (rule == "bottom") {
      t.target_rule = TargetRule::kBottom;
    } else if (rule == "hidden") {
      t.target_rule = TargetRule::kHidden;
    } else {
      fail("target_rule", "expected one of random, bottom, hidden");
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail("$", e.what());
  }
  return cfg;
}

std::string simulation_to_json(const SimulationConfig& cfg,
                               const std::vector<SimulationRow>& rows) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["trials_per_type"] = cfg.trials_per_type;
  doc["rows"] = json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back(
        {{"noise_level", r.noise_index},
         {"noise", noise_json(r.noise)},
         {"scene_type", r.scene_type},
         {"successes", r.successes},
         {"trials", r.trials},
         {"success_rate", r.trials == 0 ? 0.0 : static_cast<double>(r.successes) / r.trials},
         {"formatted", rate_text(r.successes, r.trials)},
         {"hidden_target_trials", r.hidden_target_trials},
         {"mean_steps", r.trials == 0 ? 0.0 : static_cast<double>(r.total_steps) / r.trials}});
  }
  return doc.dump(2) + "\n";
}

std::vector<CalibrationPair> parse_calibration_pairs(std::string_view json_text) {
  const json doc = parse_document(json_text);
  const json& pairs = array(doc, "$");
  std::vector<CalibrationPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string path = at("$", i);
    const auto px = numbers(field(pairs[i], "pixel", path), 3, path + ".pixel");
    const auto rb = numbers(field(pairs[i], "robot", path), 3, path + ".robot");
    out.push_back({{px[0], px[1], px[2]}, {rb[0], rb[1], rb[2]}});
  }
  return out;
}

std::string affine_to_json(const AffineMap& map) {
  json doc;
  doc["params"] = map.params();
  json linear = json::array();
  for (int r = 0; r < 3; ++r) linear.push_back({map.linear(r, 0), map.linear(r, 1), map.linear(r, 2)});
  doc["linear"] = linear;
  doc["offset"] = {map.offset(0), map.offset(1), map.offset(2)};
  doc["residual_rms"] = map.residual_rms;
  return doc.dump(2) + "\n";
}

AffineMap parse_affine(std::string_view json_text) {
  const json doc = parse_document(json_text);
  const auto p = numbers(field(doc, "params", "$"), 12, "params");
  std::array<double, 12> params{};
  std::copy(p.begin(), p.end(), params.begin());
  AffineMap m = AffineMap::from_params(params);
  m.residual_rms = number_or(doc, "residual_rms", 0.0, "$");
  return m;
}

LossInput parse_loss_input(std::string_view json_text) {
  const json doc = parse_document(json_text);
  LossInput in;
  in.roi = box_at(field(doc, "roi", "$"), "roi");
  if (doc.contains("anchors")) {
    const json& a = doc["anchors"];
    in.anchors.grid_w = integer_or(a, "grid_w", 7, "anchors");
    in.anchors.grid_h = integer_or(a, "grid_h", 7, "anchors");
    in.anchors.k = integer_or(a, "k", 4, "anchors");
    in.anchors.anchor_size = number_or(a, "anchor_size", 12.0, "anchors");
  }
  try {
    in.anchors.validate();
  } catch (const Error& e) {
    fail("anchors", e.what());
  }
  if (doc.contains("gt_grasps")) {
    const json& g = array(doc["gt_grasps"], "gt_grasps");
    for (std::size_t i = 0; i < g.size(); ++i) in.gt_grasps.push_back(rect_at(g[i], at("gt_grasps", i)));
  }
  const json& outputs = array(field(doc, "outputs", "$"), "outputs");
  if (outputs.size() != in.anchors.anchor_count()) {
    fail("outputs", "expected " + std::to_string(in.anchors.anchor_count()) + " anchor rows");
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto v = numbers(outputs[i], 7, at("outputs", i));
    in.outputs.push_back({{v[0], v[1], v[2], v[3], v[4]}, v[5], v[6]});
  }
  if (doc.contains("relations")) {
    const json& rels = array(doc["relations"], "relations");
    for (std::size_t i = 0; i < rels.size(); ++i) {
      const std::string path = at("relations", i);
      const auto p = numbers(field(rels[i], "probs", path), 3, path + ".probs");
      RelationPrediction r{integer(field(rels[i], "first", path), path + ".first"),
                           integer(field(rels[i], "second", path), path + ".second"),
                           {p[0], p[1], p[2]}};
      const int label = integer(field(rels[i], "label", path), path + ".label");
      if (label < 0 || label > 2) fail(path + ".label", "label outside {0, 1, 2}");
      in.relations.push_back(r);
      in.relation_labels[{r.first, r.second}] = label;
    }
  }
  in.l_o = number_or(doc, "l_o", 0.0, "$");
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    in.weights.alpha = number_or(w, "alpha", 1.0, "weights");
    in.weights.lambda = number_or(w, "lambda", 1.0, "weights");
    in.weights.beta = number_or(w, "beta", 1.0, "weights");
  }
  return in;
}

LossEvaluation evaluate_losses(const LossInput& in) {
  LossEvaluation out;
  const auto anchors = generate_anchors(in.roi, in.anchors);
  out.assignment = match_anchors(in.roi, anchors, in.gt_grasps, in.anchors);
  std::vector<GraspDelta> targets;
  for (const auto& [anchor, gt] : out.assignment.positives) {
    targets.push_back(encode_grasp(anchors[anchor], in.gt_grasps[gt], in.anchors.k));
  }
  out.report.grasp = grasp_loss(in.outputs, out.assignment, targets, in.weights);
  out.report.relation = relation_loss(in.relations, in.relation_labels);
  out.report.l_o = in.l_o;
  out.report.l_total = total_loss(in.l_o, out.report.grasp.l_g, out.report.relation.value, in.weights);
  return out;
}

std::string loss_evaluation_to_json(const LossEvaluation& eval) {
  const auto& r = eval.report;
  json doc;
  doc["l_greg"] = r.grasp.l_greg;
  doc["l_gcls"] = r.grasp.l_gcls;
  doc["l_g"] = r.grasp.l_g;
  doc["l_r"] = r.relation.value;
  doc["l_o"] = r.l_o;
  doc["l_total"] = r.l_total;
  json positives = json::array();
  for (const auto& [a, g] : eval.assignment.positives) positives.push_back({{"anchor", a}, {"gt", g}});
  doc["positives"] = positives;
  doc["mined_negatives"] = r.grasp.mined_negatives;
  doc["skipped_gt"] = eval.assignment.skipped;
  doc["clamped_probabilities"] = r.relation.clamped;
  json grads = json::array();
  for (const auto& g : r.grasp.gradients) {
    grads.push_back({g.delta[0], g.delta[1], g.delta[2], g.delta[3], g.delta[4], g.s_g, g.s_ug});
  }
  doc["gradients"] = {{"outputs", grads}, {"relations", r.relation.gradients}};
  return doc.dump(2) + "\n";
}

}  // namespace graspkit
