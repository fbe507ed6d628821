#include "graspkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "graspkit/error.hpp"

namespace graspkit {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point2 line_intersection(Point2 p, Point2 q, Point2 a, Point2 b) {
  // Segment p->q against the infinite line through a->b.
  const double a1 = cross(a, b, p);
  const double a2 = cross(a, b, q);
  const double t = a1 / (a1 - a2);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

double normalize_angle(double degrees) {
  double t = std::fmod(degrees + 90.0, 180.0);
  if (t < 0.0) t += 180.0;
  t -= 90.0;
  // fmod of a value just below a multiple of 180 can round up to 90.
  if (t >= 90.0) t -= 180.0;
  return t;
}

double angle_difference(double a_deg, double b_deg) {
  const double d = std::fmod(std::fabs(a_deg - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

OrientedRect::OrientedRect(double x, double y, double w, double h,
                           double theta_deg)
    : x_(x), y_(y), w_(w), h_(h), theta_(0.0) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) ||
      !std::isfinite(h) || !std::isfinite(theta_deg)) {
    throw Error(ErrorKind::kInvalidArgument, "grasp rectangle has non-finite field");
  }
  if (w < kMinSide || h < kMinSide) {
    std::ostringstream os;
    os << "grasp rectangle too small (w=" << w << ", h=" << h << ")";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  theta_ = normalize_angle(theta_deg);
}

AABox::AABox(double xmin, double ymin, double xmax, double ymax)
    : xmin_(xmin), ymin_(ymin), xmax_(xmax), ymax_(ymax) {
  if (!std::isfinite(xmin) || !std::isfinite(ymin) || !std::isfinite(xmax) ||
      !std::isfinite(ymax)) {
    throw Error(ErrorKind::kInvalidArgument, "box has non-finite coordinate");
  }
  if (!(xmin < xmax) || !(ymin < ymax)) {
    std::ostringstream os;
    os << "box is empty or inverted (" << xmin << ", " << ymin << ", " << xmax
       << ", " << ymax << ")";
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
}

std::array<Point2, 4> rect_vertices(const OrientedRect& r) {
  const double c = std::cos(r.theta() * kDegToRad);
  const double s = std::sin(r.theta() * kDegToRad);
  const double hw = 0.5 * r.w();
  const double hh = 0.5 * r.h();
  const std::array<Point2, 4> local{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
  std::array<Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {r.x() + c * local[i].x - s * local[i].y,
              r.y() + s * local[i].x + c * local[i].y};
  }
  return out;
}

double polygon_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    acc += p.x * q.y - q.x * p.y;
  }
  return 0.5 * acc;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject,
                                std::span<const Point2> clip) {
  std::vector<Point2> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Point2 a = clip[e];
    const Point2 b = clip[(e + 1) % clip.size()];
    std::vector<Point2> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point2 cur = input[i];
      const Point2 prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = cross(a, b, cur) >= 0.0;
      const bool prev_in = cross(a, b, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) output.push_back(line_intersection(prev, cur, a, b));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(line_intersection(prev, cur, a, b));
      }
    }
  }
  return output;
}

bool point_in_rect(const OrientedRect& r, Point2 p) {
  const auto v = rect_vertices(r);
  for (std::size_t i = 0; i < 4; ++i) {
    if (cross(v[i], v[(i + 1) % 4], p) <= 0.0) return false;
  }
  return true;
}

double rotated_jaccard(const OrientedRect& a, const OrientedRect& b) {
  // Bounding circles disjoint: no overlap possible.
  const double ra = 0.5 * std::hypot(a.w(), a.h());
  const double rb = 0.5 * std::hypot(b.w(), b.h());
  if (std::hypot(a.x() - b.x(), a.y() - b.y()) >= ra + rb) return 0.0;

  const auto va = rect_vertices(a);
  const auto vb = rect_vertices(b);
  const auto inter_poly = clip_convex(va, vb);
  const double inter = std::max(0.0, polygon_area(inter_poly));
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double intersection_area(const AABox& a, const AABox& b) {
  const double iw = std::min(a.xmax(), b.xmax()) - std::max(a.xmin(), b.xmin());
  const double ih = std::min(a.ymax(), b.ymax()) - std::max(a.ymin(), b.ymin());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double aabb_iou(const AABox& a, const AABox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

AABox union_box(const AABox& a, const AABox& b) {
  return {std::min(a.xmin(), b.xmin()), std::min(a.ymin(), b.ymin()),
          std::max(a.xmax(), b.xmax()), std::max(a.ymax(), b.ymax())};
}

}  // namespace graspkit
