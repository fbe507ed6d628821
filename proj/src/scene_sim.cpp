#include "graspkit/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "graspkit/error.hpp"
#include "graspkit/evaluation.hpp"
#include "graspkit/relation.hpp"

namespace graspkit {

const std::array<std::string_view, 31> kSimCategories = {
    "box",        "banana",     "notebook",  "screwdriver", "toothpaste",
    "apple",      "stapler",    "mobile",    "bottle",      "pen",
    "mouse",      "umbrella",   "remote",    "cans",        "tape",
    "knife",      "wrench",     "wallet",    "cup",         "charger",
    "badminton",  "glasses",    "pliers",    "headset",     "toothbrush",
    "card",       "paper",      "towel",     "shaver",      "socks",
    "watch"};

namespace {

// std::mt19937_64 output is fully specified; the conversions below replace the
// implementation-defined standard distributions so streams match everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  double normal() {
    // Box-Muller; always consumes two draws.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Area of the union of `rects` clipped to `frame`, by coordinate compression.
double union_area_within(const AABox& frame, const std::vector<AABox>& rects) {
  std::vector<AABox> clipped;
  std::vector<double> xs{frame.xmin(), frame.xmax()};
  std::vector<double> ys{frame.ymin(), frame.ymax()};
  for (const auto& r : rects) {
    const double x0 = std::max(frame.xmin(), r.xmin());
    const double x1 = std::min(frame.xmax(), r.xmax());
    const double y0 = std::max(frame.ymin(), r.ymin());
    const double y1 = std::min(frame.ymax(), r.ymax());
    if (x0 >= x1 || y0 >= y1) continue;
    clipped.emplace_back(x0, y0, x1, y1);
    xs.insert(xs.end(), {x0, x1});
    ys.insert(ys.end(), {y0, y1});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      const bool covered = std::any_of(clipped.begin(), clipped.end(), [&](const AABox& r) {
        return cx > r.xmin() && cx < r.xmax() && cy > r.ymin() && cy < r.ymax();
      });
      if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return area;
}

void render_depth(SimScene& scene) {
  scene.depth.assign(static_cast<std::size_t>(scene.width) * scene.height, scene.table_depth);
  std::vector<const SimObject*> order;
  for (const auto& o : scene.objects) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(),
                   [](const SimObject* a, const SimObject* b) { return a->level < b->level; });
  for (const SimObject* o : order) {
    const double d = scene.table_depth - scene.object_thickness * o->level;
    const int u0 = std::max(0, static_cast<int>(std::ceil(o->box.xmin() - 0.5)));
    const int u1 = std::min(scene.width - 1, static_cast<int>(std::ceil(o->box.xmax() - 0.5)) - 1);
    const int v0 = std::max(0, static_cast<int>(std::ceil(o->box.ymin() - 0.5)));
    const int v1 = std::min(scene.height - 1, static_cast<int>(std::ceil(o->box.ymax() - 0.5)) - 1);
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        double& px = scene.depth[static_cast<std::size_t>(v) * scene.width + u];
        px = std::min(px, d);
      }
    }
  }
}

AABox clamp_box(double cx, double cy, double w, double h, int width, int height) {
  const double x0 = std::clamp(cx - 0.5 * w, 0.0, width - w);
  const double y0 = std::clamp(cy - 0.5 * h, 0.0, height - h);
  return {x0, y0, x0 + w, y0 + h};
}

}  // namespace

// ---- scene ---------------------------------------------------------------

const SimObject* SimScene::find(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

std::vector<int> SimScene::ancestors(int id) const {
  std::set<int> seen;
  std::vector<int> frontier{id};
  while (!frontier.empty()) {
    const int cur = frontier.back();
    frontier.pop_back();
    for (const auto& e : support) {
      if (e.below == cur && seen.insert(e.above).second) frontier.push_back(e.above);
    }
  }
  return {seen.begin(), seen.end()};
}

bool SimScene::has_cover(int id) const {
  return std::any_of(support.begin(), support.end(),
                     [&](const SceneRelation& e) { return e.below == id; });
}

void SceneConfig::validate() const {
  if (min_objects < 1 || max_objects < min_objects ||
      max_objects > static_cast<int>(kSimCategories.size())) {
    throw Error(ErrorKind::kInvalidArgument, "invalid object count range");
  }
  if (width < 32 || height < 32) throw Error(ErrorKind::kInvalidArgument, "scene image too small");
  if (!(object_thickness > 0.0) || !(table_depth > object_thickness * (max_objects + 1))) {
    throw Error(ErrorKind::kInvalidArgument, "table depth must exceed the tallest stack");
  }
}

void NoiseModel::validate() const {
  for (double p : {drop, relation_flip}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "noise probabilities must lie in [0, 1]");
    }
  }
  for (double s : {box_sigma, angle_sigma, score_sigma}) {
    if (!(s >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "noise sigmas must be >= 0");
  }
}

void TrialConfig::validate() const {
  scene.validate();
  noise.validate();
  if (max_steps != 0 && max_steps < scene.max_objects) {
    throw Error(ErrorKind::kInvalidArgument, "max_steps must cover every object");
  }
  if (!(visibility > 0.0 && visibility <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "visibility threshold must lie in (0, 1]");
  }
  if (perception.top_n < 1) throw Error(ErrorKind::kInvalidArgument, "top-N must be >= 1");
}

SimScene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  SimScene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;
  scene.table_depth = cfg.table_depth;
  scene.object_thickness = cfg.object_thickness;
  const int n = rng.integer(cfg.min_objects, cfg.max_objects);

  // Distinct categories per scene: a partial Fisher-Yates shuffle.
  std::vector<int> cats(kSimCategories.size());
  for (std::size_t i = 0; i < cats.size(); ++i) cats[i] = static_cast<int>(i);
  for (int i = 0; i < n; ++i) {
    const int j = rng.integer(i, static_cast<int>(cats.size()) - 1);
    std::swap(cats[static_cast<std::size_t>(i)], cats[static_cast<std::size_t>(j)]);
  }

  const double min_side = 0.15 * std::min(cfg.width, cfg.height);
  const double max_side = 0.45 * std::min(cfg.width, cfg.height);
  for (int i = 0; i < n; ++i) {
    const double w = rng.uniform(min_side, max_side);
    const double h = rng.uniform(min_side, max_side);
    AABox box = clamp_box(rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height), w, h,
                          cfg.width, cfg.height);
    if (cfg.stacked && i > 0 && rng.uniform() < 0.75) {
      // Drop it onto an earlier object.
      const auto& base = scene.objects[static_cast<std::size_t>(rng.integer(0, i - 1))].box;
      const double cx = base.center().x + rng.uniform(-0.6, 0.6) * base.width();
      const double cy = base.center().y + rng.uniform(-0.6, 0.6) * base.height();
      box = clamp_box(cx, cy, w, h, cfg.width, cfg.height);
    } else if (!cfg.stacked) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        const bool clear = std::none_of(scene.objects.begin(), scene.objects.end(),
                                        [&](const SimObject& o) {
                                          return intersection_area(o.box, box) > 0.0;
                                        });
        if (clear) break;
        box = clamp_box(rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height), w, h,
                        cfg.width, cfg.height);
      }
    }

    SimObject obj{i + 1, std::string(kSimCategories[static_cast<std::size_t>(cats[static_cast<std::size_t>(i)])]),
                  box, {}, 1};
    for (const auto& below : scene.objects) {
      if (intersection_area(below.box, box) > 0.0) {
        scene.support.push_back({obj.id, below.id});
        obj.level = std::max(obj.level, below.level + 1);
      }
    }
    const int grasps = rng.integer(1, 3);
    const double side = std::min(box.width(), box.height());
    for (int g = 0; g < grasps; ++g) {
      const double gx = box.center().x + rng.uniform(-0.2, 0.2) * box.width();
      const double gy = box.center().y + rng.uniform(-0.2, 0.2) * box.height();
      const double gw = rng.uniform(0.4, 0.8) * side;
      const double gh = rng.uniform(0.3, 0.5) * gw;
      obj.grasps.emplace_back(gx, gy, gw, gh, rng.uniform(-90.0, 90.0));
    }
    scene.objects.push_back(std::move(obj));
  }
  render_depth(scene);
  return scene;
}

double coverage(const SimScene& scene, int id) {
  const SimObject* obj = scene.find(id);
  if (!obj) throw Error(ErrorKind::kInvalidArgument, "unknown object " + std::to_string(id));
  std::vector<AABox> covers;
  for (int a : scene.ancestors(id)) covers.push_back(scene.find(a)->box);
  return union_area_within(obj->box, covers) / obj->box.area();
}

bool visible(const SimScene& scene, int id, double threshold) {
  return coverage(scene, id) < threshold;
}

ScenePrediction oracle_predict(const SimScene& scene, const NoiseModel& noise,
                               std::uint64_t seed, double visibility) {
  noise.validate();
  Rng rng(seed);
  ScenePrediction pred;
  pred.width = scene.width;
  pred.height = scene.height;

  // Every random draw happens regardless of the noise magnitudes, so runs
  // with different noise levels stay aligned on the same stream.
  for (const auto& o : scene.objects) {
    if (!visible(scene, o.id, visibility)) continue;
    const double u_drop = rng.uniform();
    std::array<double, 4> jitter{};
    for (double& j : jitter) j = rng.normal() * noise.box_sigma;
    const double score_noise = rng.normal() * noise.score_sigma;
    std::vector<double> angle_noise;
    for (std::size_t g = 0; g < o.grasps.size(); ++g) {
      angle_noise.push_back(rng.normal() * noise.angle_sigma);
    }
    if (u_drop < noise.drop) continue;

    AABox box = o.box;
    const double x0 = std::clamp(o.box.xmin() + jitter[0], 0.0, static_cast<double>(scene.width));
    const double y0 = std::clamp(o.box.ymin() + jitter[1], 0.0, static_cast<double>(scene.height));
    const double x1 = std::clamp(o.box.xmax() + jitter[2], 0.0, static_cast<double>(scene.width));
    const double y1 = std::clamp(o.box.ymax() + jitter[3], 0.0, static_cast<double>(scene.height));
    if (x0 < x1 && y0 < y1) box = AABox(x0, y0, x1, y1);

    PredictedObject p{{box, o.category, std::clamp(1.0 - std::fabs(score_noise), 0.0, 1.0), o.id},
                      {}};
    for (std::size_t g = 0; g < o.grasps.size(); ++g) {
      const auto& r = o.grasps[g];
      p.grasps.push_back({OrientedRect(r.x(), r.y(), r.w(), r.h(), r.theta() + angle_noise[g]), 1.0});
    }
    pred.objects.push_back(std::move(p));
  }

  std::map<int, std::set<int>> above;  // id -> everything stacked on it
  for (const auto& o : pred.objects) {
    const auto anc = scene.ancestors(o.detection.instance_id);
    above[o.detection.instance_id] = {anc.begin(), anc.end()};
  }
  for (const auto& a : pred.objects) {
    for (const auto& b : pred.objects) {
      const int ia = a.detection.instance_id;
      const int ib = b.detection.instance_id;
      if (ia == ib) continue;
      int label = kRelNone;
      if (above[ib].count(ia)) label = kRelFirstAbove;
      if (above[ia].count(ib)) label = kRelFirstBelow;
      const double u_flip = rng.uniform();
      const double u_pick = rng.uniform();
      if (u_flip < noise.relation_flip) label = (label + (u_pick < 0.5 ? 1 : 2)) % 3;
      RelationPrediction r{ia, ib, {0.0, 0.0, 0.0}};
      r.probs[static_cast<std::size_t>(label)] = 1.0;
      pred.relations.push_back(r);
    }
  }
  return pred;
}

SimScene remove_object(const SimScene& scene, int id) {
  if (!scene.find(id)) {
    throw Error(ErrorKind::kInvalidArgument, "cannot remove unknown object " + std::to_string(id));
  }
  SimScene out = scene;
  std::erase_if(out.objects, [&](const SimObject& o) { return o.id == id; });
  std::erase_if(out.support,
                [&](const SceneRelation& e) { return e.above == id || e.below == id; });
  render_depth(out);
  return out;
}

SceneRecord to_record(const SimScene& scene) {
  SceneRecord rec;
  rec.width = scene.width;
  rec.height = scene.height;
  for (const auto& o : scene.objects) {
    rec.objects.push_back({o.id, o.category, o.box});
    for (const auto& g : o.grasps) rec.grasps.push_back({o.id, g});
  }
  rec.relations = scene.support;
  return rec;
}

// ---- trials --------------------------------------------------------------

TrialLog run_trial(const TrialConfig& cfg, std::uint64_t seed, const ScenePredictor& predictor) {
  cfg.validate();
  SimScene scene = generate_scene(seed, cfg.scene);
  Rng rng(splitmix64(seed ^ 0x7A5C0FFEEULL));

  TrialLog log;
  log.seed = seed;
  log.object_count = static_cast<int>(scene.objects.size());
  const auto& objs = scene.objects;
  switch (cfg.target_rule) {
    case TargetRule::kRandom:
      log.target = objs[static_cast<std::size_t>(rng.integer(0, log.object_count - 1))].id;
      break;
    case TargetRule::kBottom: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < objs.size(); ++i) {
        if (scene.ancestors(objs[i].id).size() > scene.ancestors(objs[best].id).size()) best = i;
      }
      log.target = objs[best].id;
      break;
    }
    case TargetRule::kHidden: {
      std::vector<int> hidden;
      for (const auto& o : objs) {
        if (!visible(scene, o.id, cfg.visibility)) hidden.push_back(o.id);
      }
      const int pick = rng.integer(0, log.object_count - 1);
      log.target = hidden.empty()
                       ? objs[static_cast<std::size_t>(pick)].id
                       : hidden[static_cast<std::size_t>(pick) % hidden.size()];
      break;
    }
  }
  log.target_initially_visible = visible(scene, log.target, cfg.visibility);

  const int budget = cfg.max_steps > 0 ? cfg.max_steps : log.object_count;
  for (int step = 0; step < budget; ++step) {
    TrialStep s;
    s.index = step;
    s.target_visible = visible(scene, log.target, cfg.visibility);
    const std::uint64_t step_seed = splitmix64(seed + 0x1000003ULL * static_cast<std::uint64_t>(step + 1));
    const ScenePrediction pred = predictor
                                     ? predictor(scene, step_seed)
                                     : oracle_predict(scene, cfg.noise, step_seed, cfg.visibility);
    const Perception perception = perceive(pred, cfg.perception);
    for (const auto& o : perception.objects) s.detected.push_back(o.detection.instance_id);
    if (perception.objects.empty()) {
      log.steps.push_back(std::move(s));
      continue;
    }
    s.graph = reason(perception);
    const GraspAction action = next_action(s.graph, perception.objects, Target{log.target});
    s.action = action;
    for (const auto& o : perception.objects) {
      if (o.detection.instance_id == action.object) s.grasp = o.best_grasp;
    }
    if (!s.grasp || (cfg.max_opening > 0.0 && s.grasp->w() > cfg.max_opening)) {
      s.grasp_failed = true;
      log.steps.push_back(std::move(s));
      continue;
    }
    if (!scene.find(action.object)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "predictor reported unknown object " + std::to_string(action.object));
    }
    s.order_valid = !scene.has_cover(action.object);
    s.removed = action.object;
    scene = remove_object(scene, action.object);
    log.steps.push_back(std::move(s));
    if (action.object == log.target) break;
  }
  log.success = sequential_success(log);
  return log;
}

void SimulationConfig::validate() const {
  if (trials_per_type < 1) throw Error(ErrorKind::kInvalidArgument, "trials_per_type must be >= 1");
  if (scene_types.empty()) throw Error(ErrorKind::kInvalidArgument, "no scene types configured");
  for (const auto& n : noise_levels) n.validate();
  for (const auto& t : scene_types) {
    TrialConfig c = trial;
    c.scene.min_objects = t.min_objects;
    c.scene.max_objects = t.max_objects;
    c.scene.stacked = t.stacked;
    c.validate();
  }
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t type_index, int trial) {
  return splitmix64(splitmix64(base ^ (0x51ED2701ULL * (type_index + 1))) +
                    static_cast<std::uint64_t>(trial));
}

std::vector<SimulationRow> simulate(const SimulationConfig& cfg) {
  cfg.validate();
  const std::vector<NoiseModel> levels =
      cfg.noise_levels.empty() ? std::vector<NoiseModel>{NoiseModel{}} : cfg.noise_levels;
  std::vector<SimulationRow> rows;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    for (std::size_t t = 0; t < cfg.scene_types.size(); ++t) {
      const auto& type = cfg.scene_types[t];
      TrialConfig c = cfg.trial;
      c.noise = levels[n];
      c.scene.min_objects = type.min_objects;
      c.scene.max_objects = type.max_objects;
      c.scene.stacked = type.stacked;
      SimulationRow row{n, levels[n], type.name, 0, 0, 0, 0};
      for (int i = 0; i < cfg.trials_per_type; ++i) {
        const TrialLog log = run_trial(c, trial_seed(cfg.seed, t, i));
        ++row.trials;
        row.successes += log.success ? 1 : 0;
        row.hidden_target_trials += log.target_initially_visible ? 0 : 1;
        row.total_steps += static_cast<int>(log.steps.size());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace graspkit
