#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspkit/dataset_io.hpp"
#include "graspkit/perception.hpp"
#include "graspkit/relation.hpp"
#include "graspkit/trial_log.hpp"

namespace graspkit {

struct EvalThresholds {
  double iou = 0.5;      // object box, inclusive
  double jaccard = 0.25;  // grasp overlap, strict
  double angle = 30.0;    // grasp angle in degrees, strict
};

/// Jaccard above and angle difference below the thresholds.
bool grasp_matches(const OrientedRect& pred, const OrientedRect& gt,
                   const EvalThresholds& thr);

/// Index of the unused same-category ground-truth object with the highest
/// box IoU (at least thr.iou), provided the predicted best grasp also matches
/// one of that object's grasps.
std::optional<std::size_t> is_true_positive(const PerceivedObject& pred,
                                            const SceneRecord& gt,
                                            const std::vector<bool>& used,
                                            const EvalThresholds& thr = {});

/// All-point interpolated average precision from a ranked TP/FP sequence.
double average_precision(const std::vector<bool>& ranked_tp, int positives);

struct ClassAP {
  std::string category;
  double ap = 0.0;
  int ground_truth = 0;
  int true_positives = 0;
  int false_positives = 0;
};

struct CountBucket {
  int correct = 0;
  int total = 0;
};

struct MetricsReport {
  double map_with_grasp = 0.0;
  std::vector<ClassAP> per_class;
  double obj_recall = 0.0;
  double obj_precision = 0.0;
  double image_accuracy = 0.0;
  std::map<int, CountBucket> image_accuracy_by_count;  // keyed by GT objects
  int scenes = 0;
  int gt_objects = 0;
  int predictions = 0;
  int gt_pairs = 0;
  int predicted_pairs = 0;
  int correct_pairs = 0;
};

struct EvalScene {
  std::string id;
  SceneRecord gt;
  Perception perception;
  std::vector<PairLabel> labels;
};

/// Runs perception and relation symmetrization on one predicted scene.
EvalScene prepare_scene(std::string id, SceneRecord gt, const ScenePrediction& pred,
                        const PerceptionConfig& cfg);

MetricsReport map_with_grasp(std::span<const EvalScene> scenes,
                             const EvalThresholds& thr = {});

struct RelationMetrics {
  double obj_recall = 0.0;
  double obj_precision = 0.0;
  double image_accuracy = 0.0;
  std::map<int, CountBucket> by_count;
  int gt_pairs = 0;
  int predicted_pairs = 0;
  int correct_pairs = 0;
};

RelationMetrics relation_metrics(std::span<const EvalScene> scenes,
                                 const EvalThresholds& thr = {});

/// Both metric families over the same scenes.
MetricsReport evaluate(std::span<const EvalScene> scenes, const EvalThresholds& thr = {});

/// Every removal was order-valid and the last one took the target.
bool sequential_success(const TrialLog& log);

}  // namespace graspkit
