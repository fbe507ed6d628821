#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "graspkit/dataset_io.hpp"
#include "graspkit/perception.hpp"
#include "graspkit/trial_log.hpp"

namespace graspkit {

/// Opaque category labels; the count matches the VMRD catalog.
extern const std::array<std::string_view, 31> kSimCategories;

struct SimObject {
  int id = 0;
  std::string category;
  AABox box;
  std::vector<OrientedRect> grasps;
  int level = 1;  // 1 rests on the table
};

struct SimScene {
  int width = 0;
  int height = 0;
  std::vector<SimObject> objects;
  std::vector<SceneRelation> support;  // above -> below, overlapping pairs only
  std::vector<double> depth;           // row-major, millimeters
  double table_depth = 1000.0;
  double object_thickness = 40.0;

  const SimObject* find(int id) const;
  /// Objects with a support path onto `id`, ascending.
  std::vector<int> ancestors(int id) const;
  bool has_cover(int id) const;  // some object rests directly on `id`
};

struct SceneConfig {
  int min_objects = 2;
  int max_objects = 5;
  bool stacked = true;
  int width = 160;
  int height = 120;
  double table_depth = 1000.0;      // mm
  double object_thickness = 40.0;   // mm per stack level

  void validate() const;
};

struct NoiseModel {
  double drop = 0.0;           // probability a visible object goes unreported
  double box_sigma = 0.0;      // px
  double angle_sigma = 0.0;    // deg
  double relation_flip = 0.0;  // probability an ordered-pair label is replaced
  double score_sigma = 0.0;

  void validate() const;
};

enum class TargetRule { kRandom, kBottom, kHidden };

struct TrialConfig {
  SceneConfig scene;
  NoiseModel noise;
  TargetRule target_rule = TargetRule::kRandom;
  int max_steps = 0;         // 0 means one step per object
  double visibility = 0.8;   // coverage at which an object becomes hidden
  double max_opening = 0.0;  // px; 0 disables the gripper check
  PerceptionConfig perception;

  void validate() const;
};

SimScene generate_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Fraction of the object's box covered by boxes of objects above it.
double coverage(const SimScene& scene, int id);
bool visible(const SimScene& scene, int id, double threshold = 0.8);

/// Ground-truth-derived predictions for visible objects with noise applied.
/// Relation labels mark `first` above `second` whenever a support path leads
/// from first down to second.
ScenePrediction oracle_predict(const SimScene& scene, const NoiseModel& noise,
                               std::uint64_t seed, double visibility = 0.8);

/// Throws Error(kInvalidArgument) if `id` is absent.
SimScene remove_object(const SimScene& scene, int id);

SceneRecord to_record(const SimScene& scene);

using ScenePredictor =
    std::function<ScenePrediction(const SimScene& scene, std::uint64_t seed)>;

/// Predict, perceive, reason and remove until the target is gone or the step
/// budget runs out. Uses oracle_predict with cfg.noise when no predictor is
/// given.
TrialLog run_trial(const TrialConfig& cfg, std::uint64_t seed,
                   const ScenePredictor& predictor = {});

struct SceneType {
  std::string name;
  int min_objects = 2;
  int max_objects = 5;
  bool stacked = true;
};

struct SimulationConfig {
  std::uint64_t seed = 0;
  int trials_per_type = 32;
  std::vector<SceneType> scene_types;
  std::vector<NoiseModel> noise_levels;
  TrialConfig trial;  // scene counts and noise are overridden per row

  void validate() const;
};

struct SimulationRow {
  std::size_t noise_index = 0;
  NoiseModel noise;
  std::string scene_type;
  int successes = 0;
  int trials = 0;
  int hidden_target_trials = 0;
  int total_steps = 0;
};

/// Trial seeds depend on the scene type and trial index only, so every noise
/// level runs on the same scenes.
std::uint64_t trial_seed(std::uint64_t base, std::size_t type_index, int trial);

std::vector<SimulationRow> simulate(const SimulationConfig& cfg);

}  // namespace graspkit
