#pragma once

#include <array>
#include <span>
#include <vector>

namespace graspkit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Maps an angle in degrees onto [-90, 90), the period of a two-finger grasp.
double normalize_angle(double degrees);

/// Distance between two grasp angles on the 180-degree circle, in [0, 90].
double angle_difference(double a_deg, double b_deg);

/// Grasp rectangle in image pixels. `w` runs along the gripper opening,
/// `h` is the jaw width, `theta` is in degrees and always normalized.
class OrientedRect {
 public:
  static constexpr double kMinSide = 1e-6;

  /// Throws Error(kInvalidArgument) for non-finite input or a side below
  /// kMinSide.
  OrientedRect(double x, double y, double w, double h, double theta_deg);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }
  double theta() const noexcept { return theta_; }
  Point2 center() const noexcept { return {x_, y_}; }
  double area() const noexcept { return w_ * h_; }

  bool operator==(const OrientedRect&) const = default;

 private:
  double x_, y_, w_, h_, theta_;
};

/// Axis-aligned box with xmin < xmax and ymin < ymax.
class AABox {
 public:
  AABox(double xmin, double ymin, double xmax, double ymax);

  double xmin() const noexcept { return xmin_; }
  double ymin() const noexcept { return ymin_; }
  double xmax() const noexcept { return xmax_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }
  double area() const noexcept { return width() * height(); }
  Point2 center() const noexcept {
    return {0.5 * (xmin_ + xmax_), 0.5 * (ymin_ + ymax_)};
  }
  bool contains(Point2 p) const noexcept {
    return p.x >= xmin_ && p.x <= xmax_ && p.y >= ymin_ && p.y <= ymax_;
  }

  bool operator==(const AABox&) const = default;

 private:
  double xmin_, ymin_, xmax_, ymax_;
};

/// Corners of `r` in counter-clockwise order (positive shoelace area).
std::array<Point2, 4> rect_vertices(const OrientedRect& r);

/// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(std::span<const Point2> poly);

/// Clips `subject` against the convex counter-clockwise polygon `clip`.
std::vector<Point2> clip_convex(std::span<const Point2> subject,
                                std::span<const Point2> clip);

/// True when `p` lies strictly inside the rotated rectangle.
bool point_in_rect(const OrientedRect& r, Point2 p);

/// Intersection over union of two rotated rectangles, exact up to rounding.
double rotated_jaccard(const OrientedRect& a, const OrientedRect& b);

double aabb_iou(const AABox& a, const AABox& b);
AABox union_box(const AABox& a, const AABox& b);

/// Area of the intersection of two boxes, zero when disjoint.
double intersection_area(const AABox& a, const AABox& b);

}  // namespace graspkit
