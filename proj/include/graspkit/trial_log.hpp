#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "graspkit/relation.hpp"

namespace graspkit {

struct TrialStep {
  int index = 0;
  std::vector<int> detected;        // instance ids reported by the predictor
  std::optional<GraspAction> action;  // empty when nothing was detected
  ManipulationGraph graph;
  std::optional<OrientedRect> grasp;
  bool grasp_failed = false;  // opening check rejected the grasp
  std::optional<int> removed;
  bool order_valid = true;  // the removed object had nothing on it
  bool target_visible = false;
};

struct TrialLog {
  std::uint64_t seed = 0;
  int object_count = 0;
  int target = 0;
  bool target_initially_visible = true;
  std::vector<TrialStep> steps;
  bool success = false;
};

}  // namespace graspkit
