#include "graspkit/anchor_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "graspkit/error.hpp"

namespace graspkit {

void AnchorConfig::validate() const {
  if (grid_w < 1 || grid_h < 1 || k < 1 || !(anchor_size > 0.0) ||
      !std::isfinite(anchor_size)) {
    std::ostringstream os;
    os << "invalid anchor config (grid " << grid_w << "x" << grid_h
       << ", k=" << k << ", size=" << anchor_size << ")";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
}

double anchor_orientation(int i, int k) {
  return -90.0 + (i + 0.5) * 180.0 / k;
}

std::vector<OrientedAnchor> generate_anchors(const AABox& roi,
                                             const AnchorConfig& cfg) {
  cfg.validate();
  const double cw = roi.width() / cfg.grid_w;
  const double ch = roi.height() / cfg.grid_h;
  std::vector<OrientedAnchor> out;
  out.reserve(cfg.anchor_count());
  for (int row = 0; row < cfg.grid_h; ++row) {
    for (int col = 0; col < cfg.grid_w; ++col) {
      for (int i = 0; i < cfg.k; ++i) {
        out.push_back({roi.xmin() + (col + 0.5) * cw,
                       roi.ymin() + (row + 0.5) * ch, cfg.anchor_size,
                       cfg.anchor_size, anchor_orientation(i, cfg.k), row, col,
                       i});
      }
    }
  }
  return out;
}

OrientedRect decode_grasp(const OrientedAnchor& a, const GraspDelta& d, int k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  const double w = std::exp(d.dw) * a.w;
  const double h = std::exp(d.dh) * a.h;
  const double x = d.dx * a.w + a.x;
  const double y = d.dy * a.h + a.y;
  const double theta = d.dtheta * (90.0 / k) + a.theta;
  if (!std::isfinite(w) || !std::isfinite(h) || !std::isfinite(x) ||
      !std::isfinite(y) || !std::isfinite(theta) ||
      w < OrientedRect::kMinSide || h < OrientedRect::kMinSide) {
    std::ostringstream os;
    os << "invalid grasp delta (" << d.dx << ", " << d.dy << ", " << d.dw
       << ", " << d.dh << ", " << d.dtheta << ")";
    throw Error(ErrorKind::kNumerical, os.str());
  }
  return {x, y, w, h, theta};
}

GraspDelta encode_grasp(const OrientedAnchor& a, const OrientedRect& g, int k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  GraspDelta d;
  d.dx = (g.x() - a.x) / a.w;
  d.dy = (g.y() - a.y) / a.h;
  d.dw = std::log(g.w() / a.w);
  d.dh = std::log(g.h() / a.h);
  d.dtheta = normalize_angle(g.theta() - a.theta) / (90.0 / k);
  return d;
}

std::pair<int, int> containing_cell(const AABox& roi, const AnchorConfig& cfg,
                                    Point2 p) {
  auto index = [](double t, int n) {
    const int i = static_cast<int>(std::ceil(t)) - 1;
    return std::clamp(i, 0, n - 1);
  };
  const double tx = (p.x - roi.xmin()) / (roi.width() / cfg.grid_w);
  const double ty = (p.y - roi.ymin()) / (roi.height() / cfg.grid_h);
  return {index(ty, cfg.grid_h), index(tx, cfg.grid_w)};
}

AnchorAssignment match_anchors(const AABox& roi,
                               std::span<const OrientedAnchor> anchors,
                               std::span<const OrientedRect> gt,
                               const AnchorConfig& cfg) {
  cfg.validate();
  if (anchors.size() != cfg.anchor_count()) {
    throw Error(ErrorKind::kInvalidArgument,
                "anchor list does not match the anchor config");
  }
  AnchorAssignment out;
  std::vector<bool> taken(anchors.size(), false);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!roi.contains(gt[g].center())) {
      out.skipped.push_back(g);
      continue;
    }
    const auto [row, col] = containing_cell(roi, cfg, gt[g].center());
    const std::size_t base =
        (static_cast<std::size_t>(row) * cfg.grid_w + col) * cfg.k;
    std::size_t best = anchors.size();
    double best_diff = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.k; ++i) {
      const std::size_t idx = base + i;
      if (taken[idx]) continue;
      const double diff = angle_difference(anchors[idx].theta, gt[g].theta());
      if (diff < best_diff) {
        best_diff = diff;
        best = idx;
      }
    }
    if (best == anchors.size()) {
      out.skipped.push_back(g);
      continue;
    }
    taken[best] = true;
    out.positives.emplace_back(best, g);
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (!taken[i]) out.negatives.push_back(i);
  }
  return out;
}

}  // namespace graspkit
