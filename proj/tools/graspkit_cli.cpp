// graspkit command line: eval, plan, simulate, calibrate, augment.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graspkit/graspkit.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int exit_code(gk_status s) {
  switch (s) {
    case GK_OK:
      return 0;
    case GK_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case GK_ERR_NUMERICAL:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

struct CliError {
  int code;
  std::string message;
};

void check(gk_status s, const std::string& context) {
  if (s != GK_OK) throw CliError{exit_code(s), context + ": " + gk_last_error()};
}

std::string take(char* s) {
  std::string out(s);
  gk_string_free(s);
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw CliError{kExitData, "cannot read " + p.string()};
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw CliError{kExitData, "cannot write " + path};
}

// RAII holders for C handles.
template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() { Free(p); }
};
using Scene = Handle<gk_scene, gk_scene_free>;
using Prediction = Handle<gk_prediction, gk_prediction_free>;
using Evaluator = Handle<gk_evaluator, gk_evaluator_free>;
using Affine = Handle<gk_affine, gk_affine_free>;

std::map<std::string, fs::path> json_files(const std::string& dir) {
  std::map<std::string, fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw CliError{kExitData, "not a directory: " + dir};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      out[entry.path().stem().string()] = entry.path();
    }
  }
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---- pretty renderers -----------------------------------------------------

std::string pretty_metrics(const std::string& report) {
  const json r = json::parse(report);
  std::ostringstream out;
  out << "mAP with grasp   " << fmt("%.4f", r["map_with_grasp"].get<double>()) << "\n"
      << "obj recall       " << fmt("%.4f", r["obj_recall"].get<double>()) << "\n"
      << "obj precision    " << fmt("%.4f", r["obj_precision"].get<double>()) << "\n"
      << "image accuracy   " << fmt("%.4f", r["image_accuracy"].get<double>()) << "\n\n";
  out << "category              AP      GT    TP    FP\n";
  for (const auto& c : r["per_class_ap"]) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s  %6.4f  %4d  %4d  %4d\n",
                  c["category"].get<std::string>().c_str(), c["ap"].get<double>(),
                  c["ground_truth"].get<int>(), c["true_positives"].get<int>(),
                  c["false_positives"].get<int>());
    out << line;
  }
  out << "\nobjects  image accuracy\n";
  for (const auto& b : r["image_accuracy_by_object_count"]) {
    char line[96];
    std::snprintf(line, sizeof line, "%7d  %6.4f (%d/%d)\n", b["objects"].get<int>(),
                  b["accuracy"].get<double>(), b["correct"].get<int>(), b["total"].get<int>());
    out << line;
  }
  for (const auto& i : r["issues"]) {
    out << "issue: " << i["kind"].get<std::string>() << " " << i["detail"].get<std::string>()
        << "\n";
  }
  return out.str();
}

std::string pretty_simulation(const std::string& report) {
  const json r = json::parse(report);
  std::ostringstream out;
  out << "noise  scene type      success rate        mean steps\n";
  for (const auto& row : r["rows"]) {
    char line[160];
    std::snprintf(line, sizeof line, "%5d  %-14s  %-18s  %.2f\n", row["noise_level"].get<int>(),
                  row["scene_type"].get<std::string>().c_str(),
                  row["formatted"].get<std::string>().c_str(), row["mean_steps"].get<double>());
    out << line;
  }
  return out.str();
}

std::string pretty_plan(const std::string& report) {
  const json r = json::parse(report);
  std::ostringstream out;
  for (const auto& s : r["steps"]) {
    out << "step " << s["step"].get<int>() << ": grasp object " << s["action"]["object"].get<int>();
    if (s["action"]["is_final_target"].get<bool>()) out << " (target)";
    out << "\n";
  }
  out << (r["target_reached"].get<bool>() ? "target reached\n" : "target not reached\n");
  return out.str();
}

// ---- commands -------------------------------------------------------------

struct EvalArgs {
  std::string gt, pred, out, losses;
  bool pretty = false;
  gk_thresholds thr = gk_thresholds_default();
};

int cmd_eval(const EvalArgs& a) {
  if (!a.losses.empty()) {
    char* s = nullptr;
    check(gk_evaluate_losses(read_file(a.losses).c_str(), &s), a.losses);
    write_output(a.out, take(s));
    return 0;
  }
  if (a.gt.empty() || a.pred.empty()) throw CliError{kExitUsage, "eval needs --gt and --pred"};
  const auto gts = json_files(a.gt);
  const auto preds = json_files(a.pred);

  Evaluator ev;
  check(gk_evaluator_create(&a.thr, &ev.p), "thresholds");
  int code = 0;
  auto issue = [&](const char* kind, const std::string& detail) {
    std::cerr << "graspkit eval: " << kind << ": " << detail << "\n";
    check(gk_evaluator_note_issue(ev.p, kind, detail.c_str()), "issue");
    code = kExitData;
  };

  for (const auto& [id, gt_path] : gts) {
    const auto it = preds.find(id);
    if (it == preds.end()) {
      issue("missing_prediction", gt_path.string());
      continue;
    }
    Scene scene;
    if (gk_scene_parse(read_file(gt_path).c_str(), &scene.p) != GK_OK) {
      issue("parse_error", gt_path.string() + ": " + gk_last_error());
      continue;
    }
    Prediction pred;
    if (gk_prediction_parse(read_file(it->second).c_str(), &pred.p) != GK_OK) {
      issue("parse_error", it->second.string() + ": " + gk_last_error());
      continue;
    }
    check(gk_evaluator_add(ev.p, id.c_str(), scene.p, pred.p), id);
  }
  for (const auto& [id, pred_path] : preds) {
    if (!gts.count(id)) issue("missing_ground_truth", pred_path.string());
  }

  char* s = nullptr;
  check(gk_evaluator_report(ev.p, &s), "report");
  const std::string report = take(s);
  write_output(a.out, a.pretty ? pretty_metrics(report) : report);
  return code;
}

struct PlanArgs {
  std::string scene, target, out;
  bool assume_hidden = false;
  bool pretty = false;
  int topn = 3;
};

int cmd_plan(const PlanArgs& a) {
  Prediction pred;
  check(gk_prediction_parse(read_file(a.scene).c_str(), &pred.p), a.scene);
  gk_thresholds thr = gk_thresholds_default();
  thr.top_n = a.topn;
  char* s = nullptr;
  check(gk_plan(pred.p, a.target.c_str(), a.assume_hidden ? 1 : 0, &thr, &s), "plan");
  const std::string report = take(s);
  write_output(a.out, a.pretty ? pretty_plan(report) : report);
  return 0;
}

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  double visibility = 0.0;
  bool pretty = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const std::string cfg = a.config.empty() ? std::string("{}") : read_file(a.config);
  char* s = nullptr;
  check(gk_simulate(cfg.c_str(), a.seed ? 1 : 0, a.seed.value_or(0), a.visibility, &s),
        a.config.empty() ? "simulate" : a.config);
  const std::string report = take(s);
  write_output(a.out, a.pretty ? pretty_simulation(report) : report);
  return 0;
}

struct CalibrateArgs {
  std::string pairs, out;
  double warn_rms = 5.0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  Affine map;
  check(gk_affine_fit_json(read_file(a.pairs).c_str(), &map.p), a.pairs);
  double rms = 0.0;
  check(gk_affine_residual(map.p, &rms), "residual");
  if (rms > a.warn_rms) {
    std::cerr << "graspkit calibrate: warning: residual RMS " << fmt("%.3f", rms)
              << " mm exceeds " << fmt("%.1f", a.warn_rms) << " mm\n";
  }
  char* s = nullptr;
  check(gk_affine_serialize(map.p, &s), "serialize");
  write_output(a.out, take(s));
  return 0;
}

struct AugmentArgs {
  std::string scene, out;
  bool hflip = false;
  int rot90 = 0;
};

int cmd_augment(const AugmentArgs& a) {
  Scene scene;
  check(gk_scene_parse(read_file(a.scene).c_str(), &scene.p), a.scene);
  if (a.hflip) {
    Scene flipped;
    check(gk_scene_hflip(scene.p, &flipped.p), "hflip");
    std::swap(scene.p, flipped.p);
  }
  if (a.rot90 != 0) {
    Scene turned;
    check(gk_scene_rot90(scene.p, a.rot90, &turned.p), "rot90");
    std::swap(scene.p, turned.p);
  }
  char* s = nullptr;
  check(gk_scene_serialize(scene.p, &s), "serialize");
  write_output(a.out, take(s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graspkit: grasp detection evaluation, planning and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gk_version());

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score prediction files against ground truth");
  eval->add_option("--gt", ev.gt, "Directory of ground-truth scene files");
  eval->add_option("--pred", ev.pred, "Directory of prediction files, matched by file stem");
  eval->add_option("--losses", ev.losses, "Evaluate loss terms for one ROI input file instead");
  eval->add_option("--out", ev.out, "Output path (default stdout)");
  eval->add_flag("--pretty", ev.pretty, "Render a table instead of JSON");
  eval->add_option("--iou", ev.thr.iou, "Object box IoU threshold")->capture_default_str();
  eval->add_option("--jaccard", ev.thr.jaccard, "Grasp Jaccard threshold")->capture_default_str();
  eval->add_option("--angle", ev.thr.angle, "Grasp angle threshold (deg)")->capture_default_str();
  eval->add_option("--topn", ev.thr.top_n, "Grasp candidates considered per object")
      ->capture_default_str();

  PlanArgs pl;
  auto* plan = app.add_subcommand("plan", "Replay the grasp loop on one predictions file");
  plan->add_option("--scene", pl.scene, "Predictions file")->required();
  plan->add_option("--target", pl.target, "Target category, or id:N")->required();
  plan->add_flag("--assume-hidden", pl.assume_hidden, "Target may be hidden; clear leaves");
  plan->add_option("--topn", pl.topn, "Grasp candidates considered per object")
      ->capture_default_str();
  plan->add_option("--out", pl.out, "Output path (default stdout)");
  plan->add_flag("--pretty", pl.pretty, "Render a step list instead of JSON");

  SimulateArgs sm;
  auto* sim = app.add_subcommand("simulate", "Run seeded grasping trials in the simulator");
  sim->add_option("--config", sm.config, "Trial config file (defaults when omitted)");
  sim->add_option("--seed", sm.seed, "Override the config seed");
  sim->add_option("--visibility", sm.visibility, "Coverage at which an object is hidden");
  sim->add_option("--out", sm.out, "Output path (default stdout)");
  sim->add_flag("--pretty", sm.pretty, "Render a table instead of JSON");

  CalibrateArgs cb;
  auto* cal = app.add_subcommand("calibrate", "Fit the pixel-to-robot affine map");
  cal->add_option("pairs", cb.pairs, "Calibration pairs file")->required();
  cal->add_option("--out", cb.out, "Output path (default stdout)");

  AugmentArgs au;
  auto* aug = app.add_subcommand("augment", "Flip or rotate an annotated scene");
  aug->add_option("--scene", au.scene, "Scene file")->required();
  aug->add_flag("--hflip", au.hflip, "Mirror horizontally");
  aug->add_option("--rot90", au.rot90, "Counter-clockwise quarter turns");
  aug->add_option("--out", au.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*eval) return cmd_eval(ev);
    if (*plan) return cmd_plan(pl);
    if (*sim) return cmd_simulate(sm);
    if (*cal) return cmd_calibrate(cb);
    if (*aug) return cmd_augment(au);
  } catch (const CliError& e) {
    std::cerr << "graspkit: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "graspkit: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
