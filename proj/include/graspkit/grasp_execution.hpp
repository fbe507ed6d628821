#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graspkit/geometry.hpp"

namespace graspkit {

/// Depth raster in millimeters. A value of 0 marks a missing reading.
class DepthImage {
 public:
  DepthImage(int width, int height, std::vector<double> mm);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int u, int v) const { return mm_[index(u, v)]; }
  bool valid(int u, int v) const {
    return u >= 0 && v >= 0 && u < width_ && v < height_ && mm_[index(u, v)] > 0.0;
  }
  std::span<const double> values() const noexcept { return mm_; }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * width_ + u;
  }
  int width_;
  int height_;
  std::vector<double> mm_;
};

/// Binary (P5) or ASCII (P2) PGM with millimeter samples.
DepthImage load_depth_pgm(const std::string& path);
DepthImage parse_depth_pgm(std::span<const std::uint8_t> bytes);
/// Writes 16-bit binary PGM; values are rounded and clamped to [0, 65535].
std::vector<std::uint8_t> encode_depth_pgm(const DepthImage& depth);

/// (u px, v px, depth mm) -> robot (x, y, z) mm.
struct AffineMap {
  Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double residual_rms = 0.0;

  Eigen::Vector3d apply(const Eigen::Vector3d& pixel) const {
    return linear * pixel + offset;
  }
  /// Row-major linear part followed by the offset of each row:
  /// [a00 a01 a02 t0 a10 a11 a12 t1 a20 a21 a22 t2].
  std::array<double, 12> params() const;
  static AffineMap from_params(std::span<const double, 12> p);
};

struct CalibrationPair {
  Eigen::Vector3d pixel;  // u, v, depth
  Eigen::Vector3d robot;  // x, y, z
};

/// Least-squares affine fit over at least four non-coplanar pairs. Throws
/// Error(kNumerical) when the system is rank deficient or the fitted linear
/// part is singular.
AffineMap fit_affine(std::span<const CalibrationPair> pairs);

struct PixelDepth {
  int u = 0;
  int v = 0;
  double depth = 0.0;
};

/// Minimum-depth valid pixel strictly inside the rectangle; ties go to the
/// pixel nearest the center, then to row-major order. Throws
/// Error(kExecution) when the rectangle holds no valid pixel.
PixelDepth grasp_point(const DepthImage& depth, const OrientedRect& rect);

/// Averaged surface normal over a (2r+1)^2 window, oriented to point down
/// (negative robot z), i.e. from free space into the surface.
Eigen::Vector3d approach_vector(const DepthImage& depth, int u, int v,
                                const AffineMap& map, int radius = 5);

struct RobotGraspPose {
  Eigen::Vector3d point;
  Eigen::Vector3d approach;
  double roll = 0.0;     // degrees, modulo 180
  double opening = 0.0;  // mm
  PixelDepth pixel;
  bool exceeds_max_opening = false;
};

struct ExecutionConfig {
  int normal_radius = 5;
  double max_opening = 0.0;  // mm; 0 disables the check
};

RobotGraspPose to_robot_pose(const OrientedRect& grasp, const DepthImage& depth,
                             const AffineMap& map, const ExecutionConfig& cfg = {});

}  // namespace graspkit
