#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "graspkit/anchor_codec.hpp"

namespace graspkit {

/// Raw detector output for one anchor: five regression offsets and the
/// graspable / ungraspable logits.
struct AnchorOutput {
  GraspDelta delta;
  double s_g = 0.0;
  double s_ug = 0.0;
};

/// Graspable probability, softmax over the two logits.
double graspable_probability(double s_g, double s_ug);

struct LossWeights {
  double alpha = 1.0;   // classification weight inside the grasp loss
  double lambda = 1.0;  // grasp loss weight in the total
  double beta = 1.0;    // relation loss weight in the total

  void validate() const;
};

struct SmoothL1 {
  double value;
  double derivative;
};

SmoothL1 smooth_l1(double x);

/// d(loss)/d(input) for one anchor.
struct AnchorGradient {
  std::array<double, 5> delta{};  // dx, dy, dw, dh, dtheta
  double s_g = 0.0;
  double s_ug = 0.0;
};

struct GraspLossReport {
  double l_greg = 0.0;
  double l_gcls = 0.0;
  double l_g = 0.0;
  std::vector<AnchorGradient> gradients;  // of l_g, one per anchor output
  std::vector<std::size_t> mined_negatives;
};

/// Grasp detection loss over one ROI. `gt_deltas[i]` is the regression target
/// of `assign.positives[i]`. Negatives are mined by graspable probability,
/// hardest first, 3P of them (3 when there are no positives).
GraspLossReport grasp_loss(std::span<const AnchorOutput> preds,
                           const AnchorAssignment& assign,
                           std::span<const GraspDelta> gt_deltas,
                           const LossWeights& w = {});

/// Relation classes for an ordered pair (first, second).
enum RelationClass : int {
  kRelNone = 0,
  kRelFirstAbove = 1,
  kRelFirstBelow = 2,
};

struct RelationPrediction {
  int first = 0;
  int second = 0;
  std::array<double, 3> probs{};
};

/// Throws unless probabilities are non-negative and sum to 1 within 1e-6.
void validate_relation_prediction(const RelationPrediction& p);

struct RelationLossReport {
  double value = 0.0;
  std::vector<std::array<double, 3>> gradients;  // d/d probs, per prediction
  std::size_t clamped = 0;  // probabilities raised to the 1e-12 floor
};

using RelationLabels = std::map<std::pair<int, int>, int>;

/// Negative log-likelihood over ordered pairs. Throws Error(kInvalidArgument)
/// if a predicted pair has no label.
RelationLossReport relation_loss(std::span<const RelationPrediction> preds,
                                 const RelationLabels& gt);

/// Throws Error(kInvalidArgument) for negative `l_o`.
double total_loss(double l_o, double l_g, double l_r, const LossWeights& w = {});

struct LossReport {
  GraspLossReport grasp;
  RelationLossReport relation;
  double l_o = 0.0;
  double l_total = 0.0;
};

}  // namespace graspkit
