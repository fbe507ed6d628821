#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graspkit/geometry.hpp"
#include "graspkit/perception.hpp"

namespace graspkit {

struct SceneObject {
  int id = 0;
  std::string category;
  AABox box;
};

struct SceneGrasp {
  int owner = 0;
  OrientedRect rect;
};

struct SceneRelation {
  int above = 0;
  int below = 0;

  bool operator==(const SceneRelation&) const = default;
};

/// One annotated image: objects, the grasps each object owns, and the
/// stacking relations. Pairs without a relation are unrelated.
struct SceneRecord {
  int width = 0;
  int height = 0;
  std::optional<std::string> image_path;
  std::optional<std::string> depth_path;
  std::vector<SceneObject> objects;
  std::vector<SceneGrasp> grasps;
  std::vector<SceneRelation> relations;

  const SceneObject* find_object(int id) const;
  /// Relation class of the ordered pair (first, second).
  int relation_label(int first, int second) const;
};

/// Throws Error(kParse) naming the offending JSON path.
void validate_scene(const SceneRecord& rec);

SceneRecord parse_scene(std::string_view json_text);
/// Canonical text: fixed field order, two-space indentation.
std::string serialize_scene(const SceneRecord& rec);

SceneRecord hflip(const SceneRecord& rec);
/// Counter-clockwise quarter turns; negative values turn clockwise.
SceneRecord rot90(const SceneRecord& rec, int quarter_turns);

// ---- predictions file ----------------------------------------------------

ScenePrediction parse_prediction(std::string_view json_text);
std::string serialize_prediction(const ScenePrediction& pred);

/// Ground truth dressed up as a perfect prediction: every object with score
/// 1, its owned grasps with confidence 1, and one-hot relations.
ScenePrediction prediction_from_scene(const SceneRecord& rec);

}  // namespace graspkit
