#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>

#include "graspkit/error.hpp"
#include "graspkit/planning.hpp"
#include "graspkit/reports.hpp"

using namespace graspkit;
using json = nlohmann::json;

namespace {

// Chain 1 over 2 over 3, all detected.
ScenePrediction chain() {
  ScenePrediction p;
  p.width = p.height = 100;
  for (int id = 1; id <= 3; ++id) {
    const double o = 10.0 * id;
    p.objects.push_back({{{o, o, o + 30, o + 30}, "c" + std::to_string(id), 0.9, id},
                         {{{o + 15, o + 15, 10, 4, 0}, 0.8}}});
  }
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) {
      if (a == b) continue;
      RelationPrediction r{a, b, {0, 0, 0}};
      r.probs[a < b ? kRelFirstAbove : kRelFirstBelow] = 1.0;
      p.relations.push_back(r);
    }
  }
  return p;
}

}  // namespace

TEST_CASE("single object plan") {
  ScenePrediction p;
  p.objects.push_back({{{0, 0, 10, 10}, "cup", 0.9, 4}, {{{5, 5, 4, 2, 0}, 1.0}}});
  const auto plan = plan_static(p, 4, false);
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.steps[0].action.is_final_target);
  CHECK(plan.target_reached);
  CHECK(plan.steps[0].grasp.has_value());
}

TEST_CASE("chain plan follows the stack") {
  const auto plan = plan_static(chain(), 3, false);
  REQUIRE(plan.steps.size() == 3);
  CHECK(plan.steps[0].action.object == 1);
  CHECK(plan.steps[1].action.object == 2);
  CHECK(plan.steps[2].action.object == 3);
  CHECK(plan.target_reached);
  CHECK(plan.steps[0].graph.edges.size() == 3);
  CHECK(plan.steps[2].graph.edges.empty());

  const auto by_name = plan_static(chain(), std::string("c2"), false);
  CHECK(by_name.steps.size() == 2);
}

TEST_CASE("missing target") {
  CHECK_THROWS_AS(plan_static(chain(), std::string("ghost"), false), Error);
  const auto plan = plan_static(chain(), std::string("ghost"), true);
  CHECK_FALSE(plan.target_detected);
  CHECK_FALSE(plan.target_reached);
  REQUIRE(plan.steps.size() == 3);
  CHECK(plan.steps[0].action.object == 1);
}

TEST_CASE("plan JSON") {
  const auto doc = json::parse(plan_to_json(plan_static(chain(), 3, false)));
  CHECK(doc["steps"].size() == 3);
  CHECK(doc["steps"][0]["action"]["object"] == 1);
  CHECK(doc["steps"][0]["graph"]["leaves"] == json::array({1}));
  CHECK(doc["target_reached"] == true);
}

TEST_CASE("simulation config parsing") {
  const auto d = parse_simulation_config("{}");
  CHECK(d.trials_per_type == 32);
  REQUIRE(d.scene_types.size() == 2);
  CHECK(d.scene_types[1].min_objects == 6);

  const auto c = parse_simulation_config(R"({"seed": 9, "trials_per_type": 4,
    "noise_levels": [{"relation_flip": 0.1}, {"drop": 0.2}], "target_rule": "hidden"})");
  CHECK(c.seed == 9);
  CHECK(c.noise_levels.size() == 2);
  CHECK(c.trial.target_rule == TargetRule::kHidden);
  CHECK_THROWS_AS(parse_simulation_config(R"({"noise_levels": [{"drop": 2}]})"), Error);
  CHECK_THROWS_AS(parse_simulation_config(R"({"target_rule": "top"})"), Error);

  const auto doc = json::parse(simulation_to_json(c, simulate(c)));
  CHECK(doc["rows"].size() == 4);
  const auto& row = doc["rows"][0];
  char expect[64];
  std::snprintf(expect, sizeof expect, "%.1f%% (%d/4)", 25.0 * row["successes"].get<int>(),
                row["successes"].get<int>());
  CHECK(row["formatted"] == expect);
  CHECK(row["trials"] == 4);
}

TEST_CASE("calibration documents") {
  const auto pairs = parse_calibration_pairs(R"([
    {"pixel": [0, 0, 1], "robot": [0, 0, 1]}, {"pixel": [1, 0, 1], "robot": [1, 0, 1]},
    {"pixel": [0, 1, 1], "robot": [0, 1, 1]}, {"pixel": [0, 0, 2], "robot": [0, 0, 2]}])");
  const auto m = fit_affine(pairs);
  const auto back = parse_affine(affine_to_json(m));
  CHECK(back.params() == m.params());
  CHECK_THROWS_AS(parse_calibration_pairs(R"([{"pixel": [0, 0], "robot": [0, 0, 1]}])"), Error);
}

TEST_CASE("loss evaluation document") {
  std::string outputs;
  for (int i = 0; i < 8; ++i) outputs += std::string(i ? "," : "") + "[0,0,0,0,0,0,0]";
  const std::string text = R"({"roi": [0, 0, 20, 20], "anchors": {"grid_w": 2, "grid_h": 2, "k": 2},
    "gt_grasps": [[5, 5, 12, 12, -45]], "outputs": [)" + outputs + R"(],
    "relations": [{"first": 1, "second": 2, "probs": [0.5, 0.5, 0], "label": 1}],
    "l_o": 1.0})";
  const auto eval = evaluate_losses(parse_loss_input(text));
  REQUIRE(eval.assignment.positives.size() == 1);
  CHECK(eval.assignment.positives[0].first == 0);
  CHECK(eval.report.grasp.l_greg == doctest::Approx(0.0));
  CHECK(eval.report.grasp.l_gcls == doctest::Approx(4 * std::log(2.0)));
  CHECK(eval.report.relation.value == doctest::Approx(std::log(2.0)));
  CHECK(eval.report.l_total == doctest::Approx(1 + 5 * std::log(2.0)));
  const auto doc = json::parse(loss_evaluation_to_json(eval));
  CHECK(doc["gradients"]["outputs"].size() == 8);
  CHECK_THROWS_AS(parse_loss_input(R"({"roi": [0, 0, 20, 20], "outputs": []})"), Error);
}
