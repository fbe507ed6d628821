#include "graspkit/planning.hpp"

#include <algorithm>

#include "graspkit/error.hpp"

namespace graspkit {

namespace {

bool target_present(const Perception& p, const Target& target) {
  return std::any_of(p.objects.begin(), p.objects.end(), [&](const PerceivedObject& o) {
    if (const int* id = std::get_if<int>(&target)) return o.detection.instance_id == *id;
    return o.detection.category == std::get<std::string>(target);
  });
}

}  // namespace

Plan plan_static(const ScenePrediction& pred, const Target& target, bool assume_hidden,
                 const PerceptionConfig& cfg) {
  Plan plan;
  ScenePrediction current = pred;
  Perception perception = perceive(current, cfg);
  plan.target_detected = target_present(perception, target);
  if (!plan.target_detected && !assume_hidden) {
    const std::string name = std::holds_alternative<int>(target)
                                 ? "id " + std::to_string(std::get<int>(target))
                                 : "'" + std::get<std::string>(target) + "'";
    throw Error(ErrorKind::kInvalidArgument,
                "target " + name + " is not among the detections (use --assume-hidden)");
  }

  const std::size_t limit = current.objects.size();
  while (!perception.objects.empty() && plan.steps.size() < limit) {
    PlanStep step;
    step.graph = reason(perception);
    step.action = next_action(step.graph, perception.objects, target);
    plan.target_ambiguous = plan.target_ambiguous || step.action.target_ambiguous;
    for (const auto& o : perception.objects) {
      if (o.detection.instance_id == step.action.object) {
        step.grasp = o.best_grasp;
        step.grasp_confidence = o.grasp_confidence;
      }
    }
    const int removed = step.action.object;
    const bool done = step.action.is_final_target;
    plan.steps.push_back(std::move(step));
    if (done) {
      plan.target_reached = true;
      break;
    }
    std::erase_if(current.objects, [&](const PredictedObject& o) {
      return o.detection.instance_id == removed;
    });
    std::erase_if(current.relations, [&](const RelationPrediction& r) {
      return r.first == removed || r.second == removed;
    });
    perception = perceive(current, cfg);
  }
  return plan;
}

}  // namespace graspkit
