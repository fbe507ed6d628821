#pragma once

// JSON documents exchanged with the command line: metrics, plans, trial logs,
// simulation configs and tables, calibration files and loss evaluations.

#include <string>
#include <string_view>
#include <vector>

#include "graspkit/evaluation.hpp"
#include "graspkit/grasp_execution.hpp"
#include "graspkit/loss_oracle.hpp"
#include "graspkit/planning.hpp"
#include "graspkit/scene_sim.hpp"

namespace graspkit {

struct ReportIssue {
  std::string kind;  // "missing_prediction", "missing_ground_truth", "parse_error"
  std::string detail;
};

std::string metrics_to_json(const MetricsReport& report, const EvalThresholds& thr,
                            const std::vector<ReportIssue>& issues = {});

std::string plan_to_json(const Plan& plan);

std::string trial_log_to_json(const TrialLog& log);

/// Defaults: two scene types ("familiar" 2-5 and "complex" 6-9 objects),
/// 32 trials each, one noiseless level.
SimulationConfig parse_simulation_config(std::string_view json_text);
std::string simulation_to_json(const SimulationConfig& cfg,
                               const std::vector<SimulationRow>& rows);

/// [{"pixel": [u, v, d], "robot": [x, y, z]}, ...]
std::vector<CalibrationPair> parse_calibration_pairs(std::string_view json_text);
std::string affine_to_json(const AffineMap& map);
AffineMap parse_affine(std::string_view json_text);

struct LossInput {
  AABox roi{0.0, 0.0, 1.0, 1.0};
  AnchorConfig anchors;
  std::vector<OrientedRect> gt_grasps;
  std::vector<AnchorOutput> outputs;
  std::vector<RelationPrediction> relations;
  RelationLabels relation_labels;
  double l_o = 0.0;
  LossWeights weights;
};

LossInput parse_loss_input(std::string_view json_text);

struct LossEvaluation {
  AnchorAssignment assignment;
  LossReport report;
};

/// Anchors, matching, encoding and every loss term for one ROI.
LossEvaluation evaluate_losses(const LossInput& in);
std::string loss_evaluation_to_json(const LossEvaluation& eval);

}  // namespace graspkit
