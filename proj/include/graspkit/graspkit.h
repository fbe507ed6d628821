#ifndef GRASPKIT_GRASPKIT_H
#define GRASPKIT_GRASPKIT_H

/* Flat C interface to the toolkit. Objects are opaque handles released with
 * their *_free function; strings returned through char** are released with
 * gk_string_free. Every call returns a gk_status; on failure the message is
 * available from gk_last_error() on the same thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GK_API __declspec(dllexport)
#else
#define GK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gk_status {
  GK_OK = 0,
  GK_ERR_INVALID_ARGUMENT = 1,
  GK_ERR_DATA = 2,
  GK_ERR_NUMERICAL = 3,
  GK_ERR_INTERNAL = 4
} gk_status;

GK_API const char* gk_last_error(void);
GK_API void gk_string_free(char* s);
GK_API const char* gk_version(void);

/* ---- geometry ---------------------------------------------------------- */

typedef struct gk_rect {
  double x, y, w, h, theta; /* center, size, degrees */
} gk_rect;

typedef struct gk_box {
  double xmin, ymin, xmax, ymax;
} gk_box;

typedef struct gk_delta {
  double dx, dy, dw, dh, dtheta;
} gk_delta;

GK_API gk_status gk_rotated_jaccard(const gk_rect* a, const gk_rect* b, double* out);
GK_API gk_status gk_angle_difference(double a, double b, double* out);
GK_API gk_status gk_aabb_iou(const gk_box* a, const gk_box* b, double* out);

/* Anchor `index` of `roi` on a grid_w x grid_h grid with k orientations. */
GK_API gk_status gk_decode_grasp(const gk_box* roi, int grid_w, int grid_h, int k,
                                 double anchor_size, int index, const gk_delta* d,
                                 gk_rect* out);
GK_API gk_status gk_encode_grasp(const gk_box* roi, int grid_w, int grid_h, int k,
                                 double anchor_size, int index, const gk_rect* g,
                                 gk_delta* out);

/* ---- scenes and predictions -------------------------------------------- */

typedef struct gk_scene gk_scene;
typedef struct gk_prediction gk_prediction;

GK_API gk_status gk_scene_parse(const char* json, gk_scene** out);
GK_API void gk_scene_free(gk_scene* s);
GK_API gk_status gk_scene_serialize(const gk_scene* s, char** out);
GK_API gk_status gk_scene_hflip(const gk_scene* s, gk_scene** out);
GK_API gk_status gk_scene_rot90(const gk_scene* s, int quarter_turns, gk_scene** out);
GK_API gk_status gk_scene_object_count(const gk_scene* s, int* out);

GK_API gk_status gk_prediction_parse(const char* json, gk_prediction** out);
GK_API gk_status gk_prediction_from_scene(const gk_scene* s, gk_prediction** out);
GK_API void gk_prediction_free(gk_prediction* p);

/* ---- evaluation -------------------------------------------------------- */

typedef struct gk_thresholds {
  double iou;
  double jaccard;
  double angle;
  int top_n;
} gk_thresholds;

GK_API gk_thresholds gk_thresholds_default(void);

typedef struct gk_evaluator gk_evaluator;

GK_API gk_status gk_evaluator_create(const gk_thresholds* thr, gk_evaluator** out);
GK_API void gk_evaluator_free(gk_evaluator* e);
/* `pred` may be NULL for a scene with no prediction file. */
GK_API gk_status gk_evaluator_add(gk_evaluator* e, const char* id, const gk_scene* gt,
                                  const gk_prediction* pred);
GK_API gk_status gk_evaluator_note_issue(gk_evaluator* e, const char* kind,
                                         const char* detail);
GK_API gk_status gk_evaluator_report(const gk_evaluator* e, char** out);

/* Loss terms and gradients for one ROI described by a JSON document. */
GK_API gk_status gk_evaluate_losses(const char* json, char** out);

/* ---- planning ---------------------------------------------------------- */

/* `target` is a category name or "id:N" for an instance id. */
GK_API gk_status gk_plan(const gk_prediction* pred, const char* target, int assume_hidden,
                         const gk_thresholds* thr, char** out);

/* ---- grasp execution --------------------------------------------------- */

typedef struct gk_affine gk_affine;

/* pixel: n rows of (u, v, depth); robot: n rows of (x, y, z). */
GK_API gk_status gk_affine_fit(const double* pixel, const double* robot, size_t n,
                               gk_affine** out);
GK_API gk_status gk_affine_fit_json(const char* pairs_json, gk_affine** out);
GK_API gk_status gk_affine_parse(const char* json, gk_affine** out);
GK_API void gk_affine_free(gk_affine* a);
/* Row-major [a00 a01 a02 t0 a10 a11 a12 t1 a20 a21 a22 t2]. */
GK_API gk_status gk_affine_params(const gk_affine* a, double out[12]);
GK_API gk_status gk_affine_residual(const gk_affine* a, double* out);
GK_API gk_status gk_affine_apply(const gk_affine* a, const double pixel[3], double out[3]);
GK_API gk_status gk_affine_serialize(const gk_affine* a, char** out);

typedef struct gk_depth gk_depth;

/* Millimeters, row-major; 0 marks a missing reading. */
GK_API gk_status gk_depth_create(int width, int height, const double* mm, gk_depth** out);
GK_API gk_status gk_depth_load_pgm(const char* path, gk_depth** out);
GK_API gk_status gk_depth_save_pgm(const gk_depth* d, const char* path);
GK_API void gk_depth_free(gk_depth* d);

typedef struct gk_pose {
  double point[3];
  double approach[3];
  double roll;
  double opening;
  int pixel_u;
  int pixel_v;
  double pixel_depth;
  int exceeds_max_opening;
} gk_pose;

GK_API gk_status gk_robot_pose(const gk_rect* grasp, const gk_depth* depth,
                               const gk_affine* map, int normal_radius, double max_opening,
                               gk_pose* out);

/* ---- simulation -------------------------------------------------------- */

/* Runs the configured sweep; a set `has_seed` overrides the config seed and a
 * positive `visibility` overrides the visibility threshold. */
GK_API gk_status gk_simulate(const char* config_json, int has_seed, uint64_t seed,
                             double visibility, char** out);
/* One trial under the config's first scene type and noise level. */
GK_API gk_status gk_run_trial(const char* config_json, uint64_t seed, char** out);

#ifdef __cplusplus
}
#endif

#endif /* GRASPKIT_GRASPKIT_H */
