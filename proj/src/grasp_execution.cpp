#include "graspkit/grasp_execution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "graspkit/error.hpp"

namespace graspkit {

DepthImage::DepthImage(int width, int height, std::vector<double> mm)
    : width_(width), height_(height), mm_(std::move(mm)) {
  if (width < 1 || height < 1 ||
      mm_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::kInvalidArgument, "depth raster size mismatch");
  }
  for (double& d : mm_) {
    if (!std::isfinite(d) || d < 0.0) d = 0.0;
  }
}

// ---- PGM -----------------------------------------------------------------

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
      t.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (t.empty()) throw Error(ErrorKind::kParse, "truncated PGM header");
    return t;
  }

  long number() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v < 0) throw Error(ErrorKind::kParse, "bad PGM number '" + t + "'");
    return v;
  }

  // Exactly one whitespace byte separates the header from binary samples.
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::kParse, "malformed PGM header");
    }
    ++pos_;
  }

  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

DepthImage parse_depth_pgm(std::span<const std::uint8_t> bytes) {
  PgmReader r(bytes);
  const std::string magic = r.token();
  if (magic != "P5" && magic != "P2") {
    throw Error(ErrorKind::kParse, "not a PGM file (magic '" + magic + "')");
  }
  const long w = r.number();
  const long h = r.number();
  const long maxval = r.number();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
    throw Error(ErrorKind::kParse, "unsupported PGM dimensions or maxval");
  }
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> mm(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) mm[i] = static_cast<double>(r.number());
  } else {
    r.skip_single_space();
    const auto data = r.rest();
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (data.size() < n * bpp) throw Error(ErrorKind::kParse, "truncated PGM raster");
    for (std::size_t i = 0; i < n; ++i) {
      mm[i] = bpp == 2 ? static_cast<double>((data[2 * i] << 8) | data[2 * i + 1])
                       : static_cast<double>(data[i]);
    }
  }
  return {static_cast<int>(w), static_cast<int>(h), std::move(mm)};
}

DepthImage load_depth_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kParse, "cannot open depth file " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return parse_depth_pgm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_depth_pgm(const DepthImage& depth) {
  std::ostringstream header;
  header << "P5\n" << depth.width() << " " << depth.height() << "\n65535\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  for (double d : depth.values()) {
    const auto v = static_cast<std::uint16_t>(std::clamp(std::lround(d), 0L, 65535L));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

// ---- calibration ---------------------------------------------------------

std::array<double, 12> AffineMap::params() const {
  std::array<double, 12> p{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p[r * 4 + c] = linear(r, c);
    p[r * 4 + 3] = offset(r);
  }
  return p;
}

AffineMap AffineMap::from_params(std::span<const double, 12> p) {
  AffineMap m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.linear(r, c) = p[r * 4 + c];
    m.offset(r) = p[r * 4 + 3];
  }
  if (std::fabs(m.linear.determinant()) <= 1e-9) {
    throw Error(ErrorKind::kNumerical, "affine map has a singular linear part");
  }
  return m;
}

AffineMap fit_affine(std::span<const CalibrationPair> pairs) {
  if (pairs.size() < 4) {
    throw Error(ErrorKind::kNumerical,
                "calibration needs at least 4 point pairs, got " +
                    std::to_string(pairs.size()));
  }
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::MatrixXd target(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    design.row(i) << p.pixel.x(), p.pixel.y(), p.pixel.z(), 1.0;
    target.row(i) = p.robot.transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    throw Error(ErrorKind::kNumerical,
                "calibration points are coplanar in (u, v, depth); rank " +
                    std::to_string(qr.rank()) + " < 4");
  }
  const Eigen::MatrixXd x = qr.solve(target);  // 4 x 3

  AffineMap m;
  m.linear = x.topRows(3).transpose();
  m.offset = x.row(3).transpose();
  if (std::fabs(m.linear.determinant()) <= 1e-9) {
    throw Error(ErrorKind::kNumerical, "fitted affine map is singular");
  }
  const Eigen::MatrixXd residual = design * x - target;
  m.residual_rms = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
  return m;
}

// ---- grasp point and approach ------------------------------------------

PixelDepth grasp_point(const DepthImage& depth, const OrientedRect& rect) {
  const auto v = rect_vertices(rect);
  double umin = v[0].x, umax = v[0].x, vmin = v[0].y, vmax = v[0].y;
  for (const auto& p : v) {
    umin = std::min(umin, p.x);
    umax = std::max(umax, p.x);
    vmin = std::min(vmin, p.y);
    vmax = std::max(vmax, p.y);
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(umin)));
  const int u1 = std::min(depth.width() - 1, static_cast<int>(std::ceil(umax)));
  const int v0 = std::max(0, static_cast<int>(std::floor(vmin)));
  const int v1 = std::min(depth.height() - 1, static_cast<int>(std::ceil(vmax)));

  bool found = false;
  PixelDepth best;
  double best_dist = 0.0;
  for (int row = v0; row <= v1; ++row) {
    for (int col = u0; col <= u1; ++col) {
      if (!depth.valid(col, row)) continue;
      if (!point_in_rect(rect, {static_cast<double>(col), static_cast<double>(row)})) continue;
      const double d = depth.at(col, row);
      const double dist = std::hypot(col - rect.x(), row - rect.y());
      // Row-major scan: strict comparisons keep the earliest pixel on ties.
      if (!found || d < best.depth || (d == best.depth && dist < best_dist)) {
        best = {col, row, d};
        best_dist = dist;
        found = true;
      }
    }
  }
  if (!found) {
    std::ostringstream os;
    os << "no valid depth inside grasp rectangle at (" << rect.x() << ", "
       << rect.y() << ")";
    throw Error(ErrorKind::kExecution, os.str());
  }
  return best;
}

Eigen::Vector3d approach_vector(const DepthImage& depth, int u, int v,
                                const AffineMap& map, int radius) {
  if (radius < 1) throw Error(ErrorKind::kInvalidArgument, "normal radius must be >= 1");
  auto robot = [&](int cu, int cv) {
    return map.apply({static_cast<double>(cu), static_cast<double>(cv), depth.at(cu, cv)});
  };
  auto in_window = [&](int cu, int cv) {
    return std::abs(cu - u) <= radius && std::abs(cv - v) <= radius;
  };
  // Nearest valid pixel from (cu, cv) stepping by (du, dv), within the window.
  auto neighbour = [&](int cu, int cv, int du, int dv) -> std::optional<Eigen::Vector3d> {
    for (int s = 1; s <= 2 * radius; ++s) {
      const int nu = cu + s * du;
      const int nv = cv + s * dv;
      if (!in_window(nu, nv)) break;
      if (depth.valid(nu, nv)) return robot(nu, nv);
    }
    return std::nullopt;
  };

  int valid_pixels = 0;
  int normals = 0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int cv = v - radius; cv <= v + radius; ++cv) {
    for (int cu = u - radius; cu <= u + radius; ++cu) {
      if (!depth.valid(cu, cv)) continue;
      ++valid_pixels;
      const Eigen::Vector3d here = robot(cu, cv);
      const auto right = neighbour(cu, cv, 1, 0);
      const auto left = neighbour(cu, cv, -1, 0);
      const auto down = neighbour(cu, cv, 0, 1);
      const auto up = neighbour(cu, cv, 0, -1);
      if ((!right && !left) || (!down && !up)) continue;
      const Eigen::Vector3d tu = right.value_or(here) - left.value_or(here);
      const Eigen::Vector3d tv = down.value_or(here) - up.value_or(here);
      Eigen::Vector3d n = tu.cross(tv);
      const double len = n.norm();
      if (!(len > 0.0)) continue;
      n /= len;
      if (n.z() > 0.0) n = -n;
      sum += n;
      ++normals;
    }
  }
  if (valid_pixels < 3 || normals == 0 || !(sum.norm() > 0.0)) {
    std::ostringstream os;
    os << "degenerate surface around (" << u << ", " << v << "): " << valid_pixels
       << " valid pixels, " << normals << " normals";
    throw Error(ErrorKind::kNumerical, os.str());
  }
  return sum.normalized();
}

RobotGraspPose to_robot_pose(const OrientedRect& grasp, const DepthImage& depth,
                             const AffineMap& map, const ExecutionConfig& cfg) {
  RobotGraspPose pose;
  pose.pixel = grasp_point(depth, grasp);
  pose.point = map.apply({static_cast<double>(pose.pixel.u),
                          static_cast<double>(pose.pixel.v), pose.pixel.depth});
  pose.approach =
      approach_vector(depth, pose.pixel.u, pose.pixel.v, map, cfg.normal_radius);

  const Eigen::Matrix2d planar = map.linear.topLeftCorner<2, 2>();
  constexpr double kDeg = 180.0 / std::numbers::pi;
  const double t = grasp.theta() / kDeg;
  const Eigen::Vector2d dir = planar * Eigen::Vector2d(std::cos(t), std::sin(t));
  pose.roll = normalize_angle(std::atan2(dir.y(), dir.x()) * kDeg);

  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(planar);
  pose.opening = grasp.w() * svd.singularValues().mean();
  pose.exceeds_max_opening = cfg.max_opening > 0.0 && pose.opening > cfg.max_opening;
  return pose;
}

}  // namespace graspkit
