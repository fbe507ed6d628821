#include "graspkit/graspkit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <new>
#include <string>
#include <vector>

#include "graspkit/dataset_io.hpp"
#include "graspkit/error.hpp"
#include "graspkit/evaluation.hpp"
#include "graspkit/grasp_execution.hpp"
#include "graspkit/planning.hpp"
#include "graspkit/reports.hpp"
#include "graspkit/scene_sim.hpp"

using namespace graspkit;

struct gk_scene {
  SceneRecord rec;
};

struct gk_prediction {
  ScenePrediction pred;
};

struct gk_evaluator {
  EvalThresholds thr;
  PerceptionConfig perception;
  std::vector<EvalScene> scenes;
  std::vector<ReportIssue> issues;
};

struct gk_affine {
  AffineMap map;
};

struct gk_depth {
  DepthImage image;
};

namespace {

thread_local std::string g_last_error;

gk_status set_error(gk_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

gk_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument:
      return GK_ERR_INVALID_ARGUMENT;
    case ErrorKind::kNumerical:
      return GK_ERR_NUMERICAL;
    default:
      return GK_ERR_DATA;
  }
}

// Runs `fn`, translating exceptions into status codes.
template <class F>
gk_status guarded(F&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GK_OK;
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GK_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

OrientedRect to_rect(const gk_rect& r) { return {r.x, r.y, r.w, r.h, r.theta}; }
AABox to_box(const gk_box& b) { return {b.xmin, b.ymin, b.xmax, b.ymax}; }

gk_rect from_rect(const OrientedRect& r) { return {r.x(), r.y(), r.w(), r.h(), r.theta()}; }

OrientedAnchor anchor_at(const gk_box* roi, int grid_w, int grid_h, int k, double size,
                         int index) {
  require(roi != nullptr, "roi is null");
  AnchorConfig cfg{grid_w, grid_h, k, size};
  cfg.validate();
  const auto anchors = generate_anchors(to_box(*roi), cfg);
  require(index >= 0 && static_cast<std::size_t>(index) < anchors.size(),
          "anchor index out of range");
  return anchors[static_cast<std::size_t>(index)];
}

EvalThresholds to_thresholds(const gk_thresholds* thr) {
  EvalThresholds t;
  if (thr) {
    t.iou = thr->iou;
    t.jaccard = thr->jaccard;
    t.angle = thr->angle;
  }
  require(t.iou > 0.0 && t.iou <= 1.0, "iou threshold must be in (0, 1]");
  require(t.jaccard >= 0.0 && t.jaccard < 1.0, "jaccard threshold must be in [0, 1)");
  require(t.angle > 0.0 && t.angle <= 90.0, "angle threshold must be in (0, 90]");
  return t;
}

PerceptionConfig to_perception(const gk_thresholds* thr) {
  PerceptionConfig cfg;
  if (thr) cfg.top_n = thr->top_n;
  require(cfg.top_n >= 1, "top_n must be >= 1");
  return cfg;
}

Target parse_target(const std::string& t) {
  require(!t.empty(), "empty target");
  if (t.rfind("id:", 0) == 0) {
    const std::string digits = t.substr(3);
    require(!digits.empty() && digits.find_first_not_of("-0123456789") == std::string::npos,
            "target id must be an integer, e.g. id:3");
    try {
      return std::stoi(digits);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "target id out of range");
    }
  }
  return t;
}

}  // namespace

extern "C" {

const char* gk_last_error(void) { return g_last_error.c_str(); }

void gk_string_free(char* s) { std::free(s); }

const char* gk_version(void) { return "0.1.0"; }

gk_status gk_rotated_jaccard(const gk_rect* a, const gk_rect* b, double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = rotated_jaccard(to_rect(*a), to_rect(*b));
  });
}

gk_status gk_angle_difference(double a, double b, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = angle_difference(a, b);
  });
}

gk_status gk_aabb_iou(const gk_box* a, const gk_box* b, double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = aabb_iou(to_box(*a), to_box(*b));
  });
}

gk_status gk_decode_grasp(const gk_box* roi, int grid_w, int grid_h, int k,
                          double anchor_size, int index, const gk_delta* d, gk_rect* out) {
  return guarded([&] {
    require(d && out, "null argument");
    const auto a = anchor_at(roi, grid_w, grid_h, k, anchor_size, index);
    *out = from_rect(decode_grasp(a, {d->dx, d->dy, d->dw, d->dh, d->dtheta}, k));
  });
}

gk_status gk_encode_grasp(const gk_box* roi, int grid_w, int grid_h, int k,
                          double anchor_size, int index, const gk_rect* g, gk_delta* out) {
  return guarded([&] {
    require(g && out, "null argument");
    const auto a = anchor_at(roi, grid_w, grid_h, k, anchor_size, index);
    const GraspDelta d = encode_grasp(a, to_rect(*g), k);
    *out = {d.dx, d.dy, d.dw, d.dh, d.dtheta};
  });
}

gk_status gk_scene_parse(const char* json, gk_scene** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new gk_scene{parse_scene(json)};
  });
}

void gk_scene_free(gk_scene* s) { delete s; }

gk_status gk_scene_serialize(const gk_scene* s, char** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = dup_string(serialize_scene(s->rec));
  });
}

gk_status gk_scene_hflip(const gk_scene* s, gk_scene** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = new gk_scene{hflip(s->rec)};
  });
}

gk_status gk_scene_rot90(const gk_scene* s, int quarter_turns, gk_scene** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = new gk_scene{rot90(s->rec, quarter_turns)};
  });
}

gk_status gk_scene_object_count(const gk_scene* s, int* out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = static_cast<int>(s->rec.objects.size());
  });
}

gk_status gk_prediction_parse(const char* json, gk_prediction** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new gk_prediction{parse_prediction(json)};
  });
}

gk_status gk_prediction_from_scene(const gk_scene* s, gk_prediction** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = new gk_prediction{prediction_from_scene(s->rec)};
  });
}

void gk_prediction_free(gk_prediction* p) { delete p; }

gk_thresholds gk_thresholds_default(void) {
  const EvalThresholds t;
  return {t.iou, t.jaccard, t.angle, PerceptionConfig{}.top_n};
}

gk_status gk_evaluator_create(const gk_thresholds* thr, gk_evaluator** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    auto* e = new gk_evaluator;
    try {
      e->thr = to_thresholds(thr);
      e->perception = to_perception(thr);
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

void gk_evaluator_free(gk_evaluator* e) { delete e; }

gk_status gk_evaluator_add(gk_evaluator* e, const char* id, const gk_scene* gt,
                           const gk_prediction* pred) {
  return guarded([&] {
    require(e && id && gt, "null argument");
    ScenePrediction empty;
    empty.width = gt->rec.width;
    empty.height = gt->rec.height;
    e->scenes.push_back(prepare_scene(id, gt->rec, pred ? pred->pred : empty, e->perception));
  });
}

gk_status gk_evaluator_note_issue(gk_evaluator* e, const char* kind, const char* detail) {
  return guarded([&] {
    require(e && kind && detail, "null argument");
    e->issues.push_back({kind, detail});
  });
}

gk_status gk_evaluator_report(const gk_evaluator* e, char** out) {
  return guarded([&] {
    require(e && out, "null argument");
    *out = dup_string(metrics_to_json(evaluate(e->scenes, e->thr), e->thr, e->issues));
  });
}

gk_status gk_evaluate_losses(const char* json, char** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = dup_string(loss_evaluation_to_json(evaluate_losses(parse_loss_input(json))));
  });
}

gk_status gk_plan(const gk_prediction* pred, const char* target, int assume_hidden,
                  const gk_thresholds* thr, char** out) {
  return guarded([&] {
    require(pred && target && out, "null argument");
    const Plan plan =
        plan_static(pred->pred, parse_target(target), assume_hidden != 0, to_perception(thr));
    *out = dup_string(plan_to_json(plan));
  });
}

gk_status gk_affine_fit(const double* pixel, const double* robot, size_t n, gk_affine** out) {
  return guarded([&] {
    require(pixel && robot && out, "null argument");
    std::vector<CalibrationPair> pairs;
    for (size_t i = 0; i < n; ++i) {
      pairs.push_back({{pixel[3 * i], pixel[3 * i + 1], pixel[3 * i + 2]},
                       {robot[3 * i], robot[3 * i + 1], robot[3 * i + 2]}});
    }
    *out = new gk_affine{fit_affine(pairs)};
  });
}

gk_status gk_affine_fit_json(const char* pairs_json, gk_affine** out) {
  return guarded([&] {
    require(pairs_json && out, "null argument");
    *out = new gk_affine{fit_affine(parse_calibration_pairs(pairs_json))};
  });
}

gk_status gk_affine_parse(const char* json, gk_affine** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new gk_affine{parse_affine(json)};
  });
}

void gk_affine_free(gk_affine* a) { delete a; }

gk_status gk_affine_params(const gk_affine* a, double out[12]) {
  return guarded([&] {
    require(a && out, "null argument");
    const auto p = a->map.params();
    std::copy(p.begin(), p.end(), out);
  });
}

gk_status gk_affine_residual(const gk_affine* a, double* out) {
  return guarded([&] {
    require(a && out, "null argument");
    *out = a->map.residual_rms;
  });
}

gk_status gk_affine_apply(const gk_affine* a, const double pixel[3], double out[3]) {
  return guarded([&] {
    require(a && pixel && out, "null argument");
    const Eigen::Vector3d r = a->map.apply({pixel[0], pixel[1], pixel[2]});
    out[0] = r(0);
    out[1] = r(1);
    out[2] = r(2);
  });
}

gk_status gk_affine_serialize(const gk_affine* a, char** out) {
  return guarded([&] {
    require(a && out, "null argument");
    *out = dup_string(affine_to_json(a->map));
  });
}

gk_status gk_depth_create(int width, int height, const double* mm, gk_depth** out) {
  return guarded([&] {
    require(mm && out, "null argument");
    require(width > 0 && height > 0, "depth size must be positive");
    std::vector<double> values(mm, mm + static_cast<std::size_t>(width) * height);
    *out = new gk_depth{DepthImage(width, height, std::move(values))};
  });
}

gk_status gk_depth_load_pgm(const char* path, gk_depth** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new gk_depth{load_depth_pgm(path)};
  });
}

gk_status gk_depth_save_pgm(const gk_depth* d, const char* path) {
  return guarded([&] {
    require(d && path, "null argument");
    const auto bytes = encode_depth_pgm(d->image);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::kParse, std::string("cannot open ") + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::kParse, std::string("cannot write ") + path);
  });
}

void gk_depth_free(gk_depth* d) { delete d; }

gk_status gk_robot_pose(const gk_rect* grasp, const gk_depth* depth, const gk_affine* map,
                        int normal_radius, double max_opening, gk_pose* out) {
  return guarded([&] {
    require(grasp && depth && map && out, "null argument");
    require(normal_radius >= 1, "normal radius must be >= 1");
    require(max_opening >= 0.0, "max opening must be >= 0");
    const RobotGraspPose p =
        to_robot_pose(to_rect(*grasp), depth->image, map->map, {normal_radius, max_opening});
    for (int i = 0; i < 3; ++i) {
      out->point[i] = p.point(i);
      out->approach[i] = p.approach(i);
    }
    out->roll = p.roll;
    out->opening = p.opening;
    out->pixel_u = p.pixel.u;
    out->pixel_v = p.pixel.v;
    out->pixel_depth = p.pixel.depth;
    out->exceeds_max_opening = p.exceeds_max_opening ? 1 : 0;
  });
}

gk_status gk_simulate(const char* config_json, int has_seed, uint64_t seed, double visibility,
                      char** out) {
  return guarded([&] {
    require(config_json && out, "null argument");
    SimulationConfig cfg = parse_simulation_config(config_json);
    if (has_seed) cfg.seed = seed;
    if (visibility > 0.0) cfg.trial.visibility = visibility;
    *out = dup_string(simulation_to_json(cfg, simulate(cfg)));
  });
}

gk_status gk_run_trial(const char* config_json, uint64_t seed, char** out) {
  return guarded([&] {
    require(config_json && out, "null argument");
    const SimulationConfig cfg = parse_simulation_config(config_json);
    TrialConfig t = cfg.trial;
    const SceneType& type = cfg.scene_types.front();
    t.scene.min_objects = type.min_objects;
    t.scene.max_objects = type.max_objects;
    t.scene.stacked = type.stacked;
    if (!cfg.noise_levels.empty()) t.noise = cfg.noise_levels.front();
    *out = dup_string(trial_log_to_json(run_trial(t, seed)));
  });
}

}  // extern "C"
