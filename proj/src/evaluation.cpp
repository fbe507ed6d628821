#include "graspkit/evaluation.hpp"

#include <algorithm>
#include <tuple>

#include "graspkit/error.hpp"

namespace graspkit {

namespace {

double ratio(int num, int den, double empty) {
  return den == 0 ? empty : static_cast<double>(num) / den;
}

// Best unused same-category GT by box IoU; ties go to the lower index.
std::optional<std::size_t> best_box_match(const ObjectDetection& det,
                                          const SceneRecord& gt,
                                          const std::vector<bool>& used,
                                          double iou_threshold) {
  std::optional<std::size_t> best;
  double best_iou = -1.0;
  for (std::size_t g = 0; g < gt.objects.size(); ++g) {
    if (used[g] || gt.objects[g].category != det.category) continue;
    const double iou = aabb_iou(det.box, gt.objects[g].box);
    if (iou >= iou_threshold && iou > best_iou) {
      best = g;
      best_iou = iou;
    }
  }
  return best;
}

bool owns_matching_grasp(const SceneRecord& gt, int owner, const OrientedRect& grasp,
                         const EvalThresholds& thr) {
  return std::any_of(gt.grasps.begin(), gt.grasps.end(), [&](const SceneGrasp& g) {
    return g.owner == owner && grasp_matches(grasp, g.rect, thr);
  });
}

bool has_grasps(const SceneRecord& gt, int owner) {
  return std::any_of(gt.grasps.begin(), gt.grasps.end(),
                     [&](const SceneGrasp& g) { return g.owner == owner; });
}

}  // namespace

bool grasp_matches(const OrientedRect& pred, const OrientedRect& gt,
                   const EvalThresholds& thr) {
  return angle_difference(pred.theta(), gt.theta()) < thr.angle &&
         rotated_jaccard(pred, gt) > thr.jaccard;
}

std::optional<std::size_t> is_true_positive(const PerceivedObject& pred,
                                            const SceneRecord& gt,
                                            const std::vector<bool>& used,
                                            const EvalThresholds& thr) {
  const auto g = best_box_match(pred.detection, gt, used, thr.iou);
  if (!g || !pred.best_grasp) return std::nullopt;
  if (!owns_matching_grasp(gt, gt.objects[*g].id, *pred.best_grasp, thr)) return std::nullopt;
  return g;
}

double average_precision(const std::vector<bool>& ranked_tp, int positives) {
  if (positives <= 0) return 0.0;
  std::vector<double> rec{0.0};
  std::vector<double> prec{0.0};
  int tp = 0;
  int fp = 0;
  for (bool hit : ranked_tp) {
    hit ? ++tp : ++fp;
    rec.push_back(static_cast<double>(tp) / positives);
    prec.push_back(static_cast<double>(tp) / (tp + fp));
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) {
    prec[i - 1] = std::max(prec[i - 1], prec[i]);
  }
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    ap += (rec[i] - rec[i - 1]) * prec[i];
  }
  return ap;
}

EvalScene prepare_scene(std::string id, SceneRecord gt, const ScenePrediction& pred,
                        const PerceptionConfig& cfg) {
  EvalScene s{std::move(id), std::move(gt), perceive(pred, cfg), {}};
  std::vector<int> ids;
  for (const auto& o : s.perception.objects) ids.push_back(o.detection.instance_id);
  s.labels = symmetrize(RelationMatrix(ids, s.perception.relations));
  return s;
}

MetricsReport map_with_grasp(std::span<const EvalScene> scenes, const EvalThresholds& thr) {
  MetricsReport report;
  report.scenes = static_cast<int>(scenes.size());

  // Objects without any annotated grasp can never be matched; they are left
  // out of the positives and predictions landing on them are ignored.
  std::map<std::string, int> positives;
  for (const auto& s : scenes) {
    for (const auto& o : s.gt.objects) {
      ++report.gt_objects;
      if (has_grasps(s.gt, o.id)) ++positives[o.category];
    }
  }

  struct Ranked {
    double score;
    const EvalScene* scene;
    std::size_t object;
  };
  std::map<std::string, std::vector<Ranked>> by_class;
  for (const auto& s : scenes) {
    for (std::size_t i = 0; i < s.perception.objects.size(); ++i) {
      const auto& d = s.perception.objects[i].detection;
      ++report.predictions;
      if (positives.count(d.category)) by_class[d.category].push_back({d.score, &s, i});
    }
  }

  double sum = 0.0;
  for (const auto& [category, npos] : positives) {
    auto ranked = by_class[category];
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      const int ia = a.scene->perception.objects[a.object].detection.instance_id;
      const int ib = b.scene->perception.objects[b.object].detection.instance_id;
      return std::tie(b.score, a.scene->id, ia) < std::tie(a.score, b.scene->id, ib);
    });
    std::map<const EvalScene*, std::vector<bool>> used;
    std::vector<bool> hits;
    ClassAP cls{category, 0.0, npos, 0, 0};
    for (const auto& r : ranked) {
      auto& u = used[r.scene];
      if (u.empty()) u.assign(r.scene->gt.objects.size(), false);
      const auto& obj = r.scene->perception.objects[r.object];
      const auto g = best_box_match(obj.detection, r.scene->gt, u, thr.iou);
      if (g && !has_grasps(r.scene->gt, r.scene->gt.objects[*g].id)) continue;
      const bool tp = g && obj.best_grasp &&
                      owns_matching_grasp(r.scene->gt, r.scene->gt.objects[*g].id,
                                          *obj.best_grasp, thr);
      if (tp) u[*g] = true;
      hits.push_back(tp);
      tp ? ++cls.true_positives : ++cls.false_positives;
    }
    cls.ap = average_precision(hits, npos);
    sum += cls.ap;
    report.per_class.push_back(cls);
  }
  report.map_with_grasp = positives.empty() ? 0.0 : sum / static_cast<double>(positives.size());
  return report;
}

RelationMetrics relation_metrics(std::span<const EvalScene> scenes, const EvalThresholds& thr) {
  RelationMetrics out;
  int correct_images = 0;
  for (const auto& s : scenes) {
    // Box-and-class matching only; grasps do not matter for relations.
    std::vector<bool> used(s.gt.objects.size(), false);
    std::map<int, int> to_gt;  // predicted instance id -> GT object id
    for (const auto& o : s.perception.objects) {
      if (const auto g = best_box_match(o.detection, s.gt, used, thr.iou)) {
        used[*g] = true;
        to_gt[o.detection.instance_id] = s.gt.objects[*g].id;
      }
    }
    const int n_gt = static_cast<int>(s.gt.objects.size());
    const int n_pred = static_cast<int>(s.perception.objects.size());
    const int gt_pairs = n_gt * (n_gt - 1) / 2;
    const int pred_pairs = n_pred * (n_pred - 1) / 2;
    int correct = 0;
    for (const auto& l : s.labels) {
      const auto a = to_gt.find(l.first);
      const auto b = to_gt.find(l.second);
      if (a == to_gt.end() || b == to_gt.end()) continue;
      if (s.gt.relation_label(a->second, b->second) == l.label) ++correct;
    }
    out.gt_pairs += gt_pairs;
    out.predicted_pairs += pred_pairs;
    out.correct_pairs += correct;

    const bool all_found = static_cast<int>(to_gt.size()) == n_gt && n_pred == n_gt;
    const bool image_ok = all_found && correct == gt_pairs;
    auto& bucket = out.by_count[n_gt];
    ++bucket.total;
    if (image_ok) {
      ++bucket.correct;
      ++correct_images;
    }
  }
  out.obj_recall = ratio(out.correct_pairs, out.gt_pairs, 1.0);
  out.obj_precision = ratio(out.correct_pairs, out.predicted_pairs, out.gt_pairs == 0 ? 1.0 : 0.0);
  out.image_accuracy = ratio(correct_images, static_cast<int>(scenes.size()), 0.0);
  return out;
}

MetricsReport evaluate(std::span<const EvalScene> scenes, const EvalThresholds& thr) {
  MetricsReport report = map_with_grasp(scenes, thr);
  const RelationMetrics rel = relation_metrics(scenes, thr);
  report.obj_recall = rel.obj_recall;
  report.obj_precision = rel.obj_precision;
  report.image_accuracy = rel.image_accuracy;
  report.image_accuracy_by_count = rel.by_count;
  report.gt_pairs = rel.gt_pairs;
  report.predicted_pairs = rel.predicted_pairs;
  report.correct_pairs = rel.correct_pairs;
  return report;
}

bool sequential_success(const TrialLog& log) {
  std::optional<int> last;
  for (const auto& step : log.steps) {
    if (!step.removed) continue;
    if (!step.order_valid) return false;
    last = step.removed;
  }
  return last && *last == log.target;
}

}  // namespace graspkit
