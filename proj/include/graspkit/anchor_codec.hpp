#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "graspkit/geometry.hpp"

namespace graspkit {

struct AnchorConfig {
  int grid_w = 7;
  int grid_h = 7;
  int k = 4;                 // orientations per cell
  double anchor_size = 12.0;  // square side in pixels; 24 is the other setting

  void validate() const;
  std::size_t anchor_count() const {
    return static_cast<std::size_t>(grid_w) * grid_h * k;
  }
};

struct OrientedAnchor {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;
  int row = 0;
  int col = 0;
  int orient_index = 0;

  OrientedRect rect() const { return {x, y, w, h, theta}; }
};

/// Regression offsets of one grasp relative to its anchor.
struct GraspDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
  double dtheta = 0.0;

  bool operator==(const GraspDelta&) const = default;
};

struct AnchorAssignment {
  // (anchor index, ground-truth index)
  std::vector<std::pair<std::size_t, std::size_t>> positives;
  std::vector<std::size_t> negatives;
  // Ground truth that produced no positive: center outside the ROI, or every
  // orientation of its cell already taken.
  std::vector<std::size_t> skipped;
};

/// Orientation of anchor `i` out of `k`, centered uniformly over [-90, 90).
double anchor_orientation(int i, int k);

/// Anchors ordered row-major over cells, then by orientation index, so the
/// anchor of (row, col, i) sits at ((row * grid_w) + col) * k + i.
std::vector<OrientedAnchor> generate_anchors(const AABox& roi,
                                             const AnchorConfig& cfg);

/// Throws Error(kNumerical) when the size offsets overflow or underflow.
OrientedRect decode_grasp(const OrientedAnchor& a, const GraspDelta& d, int k);

GraspDelta encode_grasp(const OrientedAnchor& a, const OrientedRect& g, int k);

/// Cell containing `p`; points on a shared cell border go to the lower index.
std::pair<int, int> containing_cell(const AABox& roi, const AnchorConfig& cfg,
                                    Point2 p);

/// Assigns each ground-truth grasp whose center lies in the ROI to the anchor
/// of its cell with the nearest orientation (ties to the lower orientation
/// index). Remaining anchors are the negative candidates.
AnchorAssignment match_anchors(const AABox& roi,
                               std::span<const OrientedAnchor> anchors,
                               std::span<const OrientedRect> gt,
                               const AnchorConfig& cfg);

}  // namespace graspkit
