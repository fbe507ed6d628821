#pragma once

#include <optional>
#include <vector>

#include "graspkit/perception.hpp"
#include "graspkit/relation.hpp"

namespace graspkit {

struct PlanStep {
  GraspAction action;
  ManipulationGraph graph;
  std::optional<OrientedRect> grasp;
  double grasp_confidence = 0.0;
};

struct Plan {
  std::vector<PlanStep> steps;
  bool target_reached = false;
  bool target_detected = false;  // present in the initial predictions
  bool target_ambiguous = false;
};

/// Replays the grasp loop on one fixed set of predictions: each chosen
/// object is dropped from the predictions before the next step. A target
/// missing from the predictions is an error unless `assume_hidden` is set,
/// in which case the plan clears leaves until nothing is left.
Plan plan_static(const ScenePrediction& pred, const Target& target, bool assume_hidden,
                 const PerceptionConfig& cfg = {});

}  // namespace graspkit
