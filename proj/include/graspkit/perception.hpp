#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspkit/anchor_codec.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/loss_oracle.hpp"

namespace graspkit {

struct ObjectDetection {
  AABox box;
  std::string category;
  double score = 0.0;
  int instance_id = 0;
};

struct GraspCandidate {
  OrientedRect rect;
  double confidence = 0.0;
};

/// A detection together with its chosen grasp. Objects whose predictor
/// returned no grasp candidates carry no best grasp.
struct PerceivedObject {
  ObjectDetection detection;
  std::optional<OrientedRect> best_grasp;
  double grasp_confidence = 0.0;
};

/// Decodes every anchor of one ROI. `outputs` must hold one entry per anchor
/// in generate_anchors order.
std::vector<GraspCandidate> decode_roi_grasps(const AABox& roi,
                                              std::span<const AnchorOutput> outputs,
                                              const AnchorConfig& cfg);

/// Index into `cands` of the candidate closest to the box center among the
/// `n` most confident. Throws Error(kNoGrasp) on an empty list.
std::size_t select_best_grasp_index(std::span<const GraspCandidate> cands,
                                    const AABox& obj, int n);

inline const GraspCandidate& select_best_grasp(std::span<const GraspCandidate> cands,
                                               const AABox& obj, int n) {
  return cands[select_best_grasp_index(cands, obj, n)];
}

/// Greedy category-aware suppression. Output is sorted by score, descending;
/// detections scoring below `score_floor` are dropped first.
std::vector<ObjectDetection> nms(std::span<const ObjectDetection> dets,
                                 double iou_threshold, double score_floor = 0.0);

// ---- predictor outputs -------------------------------------------------

struct PredictedObject {
  ObjectDetection detection;
  std::vector<GraspCandidate> grasps;
};

/// Everything a predictor reports for one image.
struct ScenePrediction {
  int width = 0;
  int height = 0;
  std::vector<PredictedObject> objects;
  std::vector<RelationPrediction> relations;  // keyed by instance id
};

struct PerceptionConfig {
  int top_n = 3;
  // NMS is skipped when nms_iou is not in (0, 1).
  double nms_iou = 0.3;
  double score_floor = 0.05;
};

struct Perception {
  std::vector<PerceivedObject> objects;       // score-descending
  std::vector<RelationPrediction> relations;  // restricted to surviving ids
};

/// Filters detections and picks the best grasp of each survivor.
Perception perceive(const ScenePrediction& pred, const PerceptionConfig& cfg);

}  // namespace graspkit
