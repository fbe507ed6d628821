#include "graspkit/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "graspkit/error.hpp"

namespace graspkit {

std::vector<GraspCandidate> decode_roi_grasps(const AABox& roi,
                                              std::span<const AnchorOutput> outputs,
                                              const AnchorConfig& cfg) {
  cfg.validate();
  if (outputs.size() != cfg.anchor_count()) {
    std::ostringstream os;
    os << "expected " << cfg.anchor_count() << " anchor outputs, got "
       << outputs.size();
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  const auto anchors = generate_anchors(roi, cfg);
  std::vector<GraspCandidate> out;
  out.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out.push_back({decode_grasp(anchors[i], outputs[i].delta, cfg.k),
                   graspable_probability(outputs[i].s_g, outputs[i].s_ug)});
  }
  return out;
}

std::size_t select_best_grasp_index(std::span<const GraspCandidate> cands,
                                    const AABox& obj, int n) {
  if (cands.empty()) {
    throw Error(ErrorKind::kNoGrasp, "no grasp candidates for object");
  }
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "top-N must be >= 1");

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cands[a].confidence > cands[b].confidence;
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n)));

  const Point2 c = obj.center();
  auto dist = [&](std::size_t i) {
    return std::hypot(cands[i].rect.x() - c.x, cands[i].rect.y() - c.y);
  };
  // `order` is confidence-descending with index tie-break, so keeping the
  // first strict minimum implements both tie rules.
  std::size_t best = order.front();
  double best_d = dist(best);
  for (std::size_t i : order) {
    const double d = dist(i);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::vector<ObjectDetection> nms(std::span<const ObjectDetection> dets,
                                 double iou_threshold, double score_floor) {
  std::vector<ObjectDetection> sorted;
  for (const auto& d : dets) {
    if (d.score >= score_floor) sorted.push_back(d);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ObjectDetection& a, const ObjectDetection& b) {
                     return a.score > b.score;
                   });
  std::vector<ObjectDetection> keep;
  for (const auto& d : sorted) {
    const bool suppressed = std::any_of(keep.begin(), keep.end(), [&](const auto& k) {
      return k.category == d.category && aabb_iou(k.box, d.box) > iou_threshold;
    });
    if (!suppressed) keep.push_back(d);
  }
  return keep;
}

Perception perceive(const ScenePrediction& pred, const PerceptionConfig& cfg) {
  std::vector<ObjectDetection> dets;
  dets.reserve(pred.objects.size());
  std::unordered_map<int, const PredictedObject*> by_id;
  for (const auto& o : pred.objects) {
    if (!by_id.emplace(o.detection.instance_id, &o).second) {
      throw Error(ErrorKind::kParse, "duplicate instance id " +
                                         std::to_string(o.detection.instance_id));
    }
    dets.push_back(o.detection);
  }

  std::vector<ObjectDetection> kept;
  if (cfg.nms_iou > 0.0 && cfg.nms_iou < 1.0) {
    kept = nms(dets, cfg.nms_iou, cfg.score_floor);
  } else {
    kept = nms(dets, 1.0, cfg.score_floor);  // IoU never exceeds 1
  }

  Perception out;
  std::set<int> alive;
  for (const auto& d : kept) {
    const PredictedObject& src = *by_id.at(d.instance_id);
    PerceivedObject p{d, std::nullopt, 0.0};
    if (!src.grasps.empty()) {
      const auto& g = select_best_grasp(src.grasps, d.box, cfg.top_n);
      p.best_grasp = g.rect;
      p.grasp_confidence = g.confidence;
    }
    out.objects.push_back(std::move(p));
    alive.insert(d.instance_id);
  }
  for (const auto& r : pred.relations) {
    if (alive.count(r.first) && alive.count(r.second)) out.relations.push_back(r);
  }
  return out;
}

}  // namespace graspkit
