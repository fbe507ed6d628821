#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library: they trade speed for obviousness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

constexpr double kPi = 3.14159265358979323846;

struct Rect {
  double x, y, w, h, theta;
};

// Point-in-rotated-rect by projecting onto the rect's own axes.
inline bool inside(const Rect& r, double px, double py) {
  const double t = r.theta * kPi / 180.0;
  const double dx = px - r.x, dy = py - r.y;
  const double a = dx * std::cos(t) + dy * std::sin(t);
  const double b = -dx * std::sin(t) + dy * std::cos(t);
  return std::fabs(a) <= r.w / 2 && std::fabs(b) <= r.h / 2;
}

// Monte-Carlo Jaccard: sample uniformly from a box covering both rects.
inline double mc_jaccard(const Rect& a, const Rect& b, std::size_t samples, std::uint64_t seed) {
  const double ra = 0.5 * std::hypot(a.w, a.h), rb = 0.5 * std::hypot(b.w, b.h);
  const double x0 = std::min(a.x - ra, b.x - rb), x1 = std::max(a.x + ra, b.x + rb);
  const double y0 = std::min(a.y - ra, b.y - rb), y1 = std::max(a.y + ra, b.y + rb);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::size_t both = 0, any = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double px = ux(rng), py = uy(rng);
    const bool ia = inside(a, px, py), ib = inside(b, px, py);
    both += ia && ib;
    any += ia || ib;
  }
  return any == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(any);
}

// Affine fit through the normal equations of the stacked 12-unknown system.
inline Eigen::Matrix<double, 12, 1> normal_equations_fit(const std::vector<Eigen::Vector3d>& px,
                                                         const std::vector<Eigen::Vector3d>& rb) {
  const std::size_t n = px.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, 12);
  Eigen::VectorXd y(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int r = 0; r < 3; ++r) {
      const auto row = static_cast<Eigen::Index>(3 * i + r);
      A(row, 4 * r + 0) = px[i](0);
      A(row, 4 * r + 1) = px[i](1);
      A(row, 4 * r + 2) = px[i](2);
      A(row, 4 * r + 3) = 1.0;
      y(row) = rb[i](r);
    }
  }
  const Eigen::MatrixXd AtA = A.transpose() * A;
  const Eigen::VectorXd Aty = A.transpose() * y;
  return AtA.inverse() * Aty;
}

// Every topological order of a DAG on nodes 0..n-1 given edges (above, below),
// where `above` must come first.
inline std::set<std::vector<int>> all_orders(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::set<std::vector<int>> out;
  do {
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    bool ok = true;
    for (auto [a, b] : edges) ok = ok && pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
    if (ok) out.insert(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Prefixes of valid orders that end at `target`: the shortest valid ways of
// reaching it when only its ancestors must go first.
inline bool is_valid_prefix(const std::vector<int>& seq, int n,
                            const std::vector<std::pair<int, int>>& edges) {
  const auto orders = all_orders(n, edges);
  return std::any_of(orders.begin(), orders.end(), [&](const std::vector<int>& o) {
    return std::equal(seq.begin(), seq.end(), o.begin());
  });
}

// VOC all-point AP computed by the textbook recipe: precision envelope, then
// the area under the stepwise recall curve.
inline double voc_ap(const std::vector<bool>& tp, int positives) {
  if (positives == 0) return 0.0;
  std::vector<double> rec{0.0}, prec{0.0};
  int t = 0, f = 0;
  for (bool b : tp) {
    (b ? t : f)++;
    rec.push_back(static_cast<double>(t) / positives);
    prec.push_back(static_cast<double>(t) / (t + f));
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) ap += (rec[i] - rec[i - 1]) * prec[i];
  return ap;
}

}  // namespace oracle
