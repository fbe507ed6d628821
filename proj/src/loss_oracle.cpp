#include "graspkit/loss_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "graspkit/error.hpp"

namespace graspkit {

namespace {

constexpr double kProbFloor = 1e-12;

// -log softmax(a over {a, b}), stable for large logits.
double neg_log_softmax(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m)) - a;
}

std::array<double, 5> as_array(const GraspDelta& d) {
  return {d.dx, d.dy, d.dw, d.dh, d.dtheta};
}

}  // namespace

double graspable_probability(double s_g, double s_ug) {
  return 1.0 / (1.0 + std::exp(s_ug - s_g));
}

void LossWeights::validate() const {
  if (!(alpha > 0.0) || !(lambda > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "loss weights must be positive");
  }
}

SmoothL1 smooth_l1(double x) {
  if (std::fabs(x) < 1.0) return {0.5 * x * x, x};
  return {std::fabs(x) - 0.5, x > 0.0 ? 1.0 : -1.0};
}

GraspLossReport grasp_loss(std::span<const AnchorOutput> preds,
                           const AnchorAssignment& assign,
                           std::span<const GraspDelta> gt_deltas,
                           const LossWeights& w) {
  w.validate();
  if (gt_deltas.size() != assign.positives.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "one regression target is required per positive anchor");
  }
  GraspLossReport out;
  out.gradients.resize(preds.size());
  auto check_index = [&](std::size_t i) {
    if (i >= preds.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "assignment refers to an anchor outside the predictions");
    }
  };

  for (std::size_t p = 0; p < assign.positives.size(); ++p) {
    const std::size_t i = assign.positives[p].first;
    check_index(i);
    const auto pred = as_array(preds[i].delta);
    const auto target = as_array(gt_deltas[p]);
    for (std::size_t m = 0; m < 5; ++m) {
      const auto s = smooth_l1(pred[m] - target[m]);
      out.l_greg += s.value;
      out.gradients[i].delta[m] += s.derivative;
    }
    // -log c_g
    out.l_gcls += neg_log_softmax(preds[i].s_g, preds[i].s_ug);
    const double c_g = graspable_probability(preds[i].s_g, preds[i].s_ug);
    out.gradients[i].s_g += w.alpha * (c_g - 1.0);
    out.gradients[i].s_ug += w.alpha * (1.0 - c_g);
  }

  // Hard negatives: highest graspable probability first, ties by index.
  std::vector<std::size_t> negatives(assign.negatives.begin(),
                                     assign.negatives.end());
  for (std::size_t i : negatives) check_index(i);
  std::stable_sort(negatives.begin(), negatives.end(),
                   [&](std::size_t a, std::size_t b) {
                     // Compare logit margins; monotone in c_g and exact.
                     return preds[a].s_g - preds[a].s_ug >
                            preds[b].s_g - preds[b].s_ug;
                   });
  const std::size_t quota = 3 * std::max<std::size_t>(assign.positives.size(), 1);
  negatives.resize(std::min(quota, negatives.size()));
  for (std::size_t i : negatives) {
    // -log c_ug
    out.l_gcls += neg_log_softmax(preds[i].s_ug, preds[i].s_g);
    const double c_g = graspable_probability(preds[i].s_g, preds[i].s_ug);
    out.gradients[i].s_g += w.alpha * c_g;
    out.gradients[i].s_ug += w.alpha * (-c_g);
  }
  out.mined_negatives = std::move(negatives);
  out.l_g = out.l_greg + w.alpha * out.l_gcls;
  return out;
}

void validate_relation_prediction(const RelationPrediction& p) {
  double sum = 0.0;
  for (double v : p.probs) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "relation probabilities must be finite and non-negative");
    }
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "relation probabilities for (" << p.first << ", " << p.second
       << ") sum to " << sum;
    throw Error(ErrorKind::kInvalidArgument, os.str());
  }
  if (p.first == p.second) {
    throw Error(ErrorKind::kInvalidArgument, "relation pair refers to one object");
  }
}

RelationLossReport relation_loss(std::span<const RelationPrediction> preds,
                                 const RelationLabels& gt) {
  RelationLossReport out;
  out.gradients.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto it = gt.find({preds[i].first, preds[i].second});
    if (it == gt.end()) {
      std::ostringstream os;
      os << "no ground-truth relation for pair (" << preds[i].first << ", "
         << preds[i].second << ")";
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
    const int r = it->second;
    if (r < 0 || r > 2) {
      throw Error(ErrorKind::kInvalidArgument, "relation label outside {0,1,2}");
    }
    const double p = preds[i].probs[r];
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "relation probability is invalid");
    }
    if (p < kProbFloor) {
      out.value -= std::log(kProbFloor);
      ++out.clamped;
    } else {
      out.value -= std::log(p);
      out.gradients[i][r] = -1.0 / p;
    }
  }
  return out;
}

double total_loss(double l_o, double l_g, double l_r, const LossWeights& w) {
  w.validate();
  if (!(l_o >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "object detection loss must be non-negative");
  }
  return l_o + w.lambda * l_g + w.beta * l_r;
}

}  // namespace graspkit
