#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "graspkit/loss_oracle.hpp"
#include "graspkit/perception.hpp"

namespace graspkit {

/// Class probabilities for every ordered pair of a set of objects.
class RelationMatrix {
 public:
  /// Throws Error(kParse) unless every one of the n(n-1) ordered pairs is
  /// present exactly once with a valid probability triple.
  RelationMatrix(std::vector<int> ids, std::span<const RelationPrediction> preds);

  const std::vector<int>& ids() const noexcept { return ids_; }
  const std::array<double, 3>& at(int first, int second) const;

 private:
  std::vector<int> ids_;  // sorted
  std::map<std::pair<int, int>, std::array<double, 3>> probs_;
};

/// Joint label of an unordered pair, oriented from `first` to `second`.
struct PairLabel {
  int first = 0;
  int second = 0;
  int label = kRelNone;
  double confidence = 0.0;
};

/// Combines (i,j) and (j,i) into one label per unordered pair by averaging
/// the probability of each consistent joint labeling. Ties go to `none`.
std::vector<PairLabel> symmetrize(const RelationMatrix& m);

struct GraphEdge {
  int above = 0;
  int below = 0;
  double confidence = 0.0;

  bool operator==(const GraphEdge&) const = default;
};

/// Stacking DAG; an edge above->below means `above` must be removed first.
struct ManipulationGraph {
  std::vector<int> nodes;  // sorted
  std::vector<GraphEdge> edges;
  std::vector<GraphEdge> deleted;  // removed to break cycles, in order
};

ManipulationGraph build_graph(std::vector<int> nodes,
                              std::span<const PairLabel> labels);

bool is_acyclic(const ManipulationGraph& g);

/// Nodes with nothing stacked on them, ascending.
std::vector<int> leaves(const ManipulationGraph& g);

/// Nodes with a directed path to `node` (everything transitively above it).
std::vector<int> ancestors(const ManipulationGraph& g, int node);

/// Target by category name or by instance id.
using Target = std::variant<std::string, int>;

struct GraspAction {
  int object = 0;
  bool is_final_target = false;
  bool target_detected = false;
  // Several detections share the target category; the best scoring was used.
  bool target_ambiguous = false;
};

/// Chooses the next object to remove for reaching `target`. Throws
/// Error(kEmptyScene) without detections.
GraspAction next_action(const ManipulationGraph& g,
                        std::span<const PerceivedObject> detections,
                        const Target& target);

/// perceive -> symmetrize -> build_graph in one step.
ManipulationGraph reason(const Perception& perception);

}  // namespace graspkit
