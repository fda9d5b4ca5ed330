/* C interface to the vosda library. Objects are opaque handles released with
 * their matching *_free function. Every call returns a vosda_status; on
 * failure vosda_last_error() describes the most recent error of the calling
 * thread. Strings returned through char** are owned by the caller and released
 * with vosda_string_free. */
#ifndef VOSDA_H
#define VOSDA_H

#include <stddef.h>

#if defined(VOSDA_BUILDING)
#define VOSDA_API __attribute__((visibility("default")))
#else
#define VOSDA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vosda_status {
  VOSDA_OK = 0,
  VOSDA_ERR_USAGE = 1,
  VOSDA_ERR_IO_FAILURE,
  VOSDA_ERR_MAGIC_MISMATCH,
  VOSDA_ERR_TRUNCATED_FILE,
  VOSDA_ERR_SPEC_INVALID,
  VOSDA_ERR_LAYOUT,
  VOSDA_ERR_COUNT_MISMATCH,
  VOSDA_ERR_SHAPE,
  VOSDA_ERR_CROP_TOO_LARGE,
  VOSDA_ERR_NON_FINITE_GRADIENT,
  VOSDA_ERR_NON_FINITE_VALUE,
  VOSDA_ERR_FINGERPRINT_MISMATCH,
  VOSDA_ERR_CORRUPT_CHECKPOINT,
  VOSDA_ERR_MISSING_CHECKPOINT,
  VOSDA_ERR_MISSING_GROUND_TRUTH,
  VOSDA_ERR_LABEL_ACCESS,
  VOSDA_ERR_CONFIG,
  VOSDA_ERR_EMPTY_INPUT,
  VOSDA_ERR_ISOLATION_VIOLATION,
  VOSDA_ERR_INTERNAL = 100
} vosda_status;

/* Process exit code for a status: 0 ok, 1 usage, 2 data, 3 numeric. */
VOSDA_API int vosda_exit_code(vosda_status status);
VOSDA_API const char* vosda_status_name(vosda_status status);
VOSDA_API const char* vosda_last_error(void);
VOSDA_API const char* vosda_version(void);
VOSDA_API void vosda_string_free(char* s);

/* Optical flow fields (.flo). */
typedef struct vosda_flow vosda_flow;

VOSDA_API vosda_status vosda_flow_read(const char* path, vosda_flow** out);
VOSDA_API vosda_status vosda_flow_write(const vosda_flow* flow, const char* path);
VOSDA_API void vosda_flow_free(vosda_flow* flow);
VOSDA_API vosda_status vosda_flow_size(const vosda_flow* flow, int* height, int* width);
VOSDA_API vosda_status vosda_flow_info(const vosda_flow* flow, char** text);
VOSDA_API vosda_status vosda_flow_crop(const vosda_flow* flow, int y0, int x0, int height,
                                       int width, vosda_flow** out);
VOSDA_API vosda_status vosda_flow_resize(const vosda_flow* flow, int height, int width,
                                         vosda_flow** out);
/* Colour-wheel PNG; max_magnitude 0 normalises by the field's own maximum. */
VOSDA_API vosda_status vosda_flow_visualize(const vosda_flow* flow, double max_magnitude,
                                            const char* png_path);

/* Training configuration (flat key = value text). */
typedef struct vosda_config vosda_config;

VOSDA_API vosda_status vosda_config_new(vosda_config** out);
VOSDA_API vosda_status vosda_config_load(const char* path, vosda_config** out);
VOSDA_API vosda_status vosda_config_parse(const char* text, vosda_config** out);
VOSDA_API void vosda_config_free(vosda_config* config);
VOSDA_API vosda_status vosda_config_set(vosda_config* config, const char* key, const char* value);
VOSDA_API vosda_status vosda_config_get(const vosda_config* config, const char* key, char** value);
VOSDA_API vosda_status vosda_config_to_text(const vosda_config* config, char** text);

/* Materialises a synthetic dataset spec file as a DAVIS tree. */
VOSDA_API vosda_status vosda_generate(const char* spec_path, const char* out_dir, int force,
                                      char** manifest_hash);

typedef void (*vosda_log_fn)(const char* line, void* user);

typedef struct vosda_run_options {
  const char* out_dir;      /* required */
  const char* source_ckpt;  /* separated regime: the frozen source model */
  const char* resume_ckpt;  /* continue from an epoch-boundary checkpoint */
  int verify_isolation;     /* checksum frozen modules every sub-step */
  vosda_log_fn log;         /* progress lines, may be NULL */
  void* log_user;
} vosda_run_options;

/* Runs the regime named by the config. The run directory receives
 * config.txt, seed.txt, version.txt, history.csv, epochs.csv, model.ckpt and
 * report/ (source validation split). */
VOSDA_API vosda_status vosda_run(const vosda_config* config, const vosda_run_options* options);

typedef struct vosda_report vosda_report;

typedef struct vosda_eval_options {
  double threshold;         /* 0: 0.5 */
  int tol_radius;           /* 0: per-frame default */
  double recall_threshold;  /* 0: 0.5 */
  int stream;               /* 0 auto, 1 source encoder, 2 target encoder */
} vosda_eval_options;

VOSDA_API vosda_status vosda_evaluate_checkpoint(const char* ckpt_path, const char* dataset_root,
                                                 const char* split,
                                                 const vosda_eval_options* options,
                                                 vosda_report** out);
/* Predictions are <pred_root>/<seq>/%05d.png masks for every usable frame. */
VOSDA_API vosda_status vosda_evaluate_masks(const char* pred_root, const char* dataset_root,
                                            const char* split, const vosda_eval_options* options,
                                            vosda_report** out);
VOSDA_API void vosda_report_free(vosda_report* report);
/* report.json, report.txt and per_sequence.csv. */
VOSDA_API vosda_status vosda_report_write(const vosda_report* report, const char* dir);
VOSDA_API vosda_status vosda_report_json(const vosda_report* report, char** json);
VOSDA_API vosda_status vosda_report_table(const vosda_report* report, char** table);
/* J mean/recall/decay then F mean/recall/decay. */
VOSDA_API vosda_status vosda_report_stats(const vosda_report* report, double stats[6]);

/* Seven-row fusion / flow-supervision grid on one dataset. Writes one run
 * directory per row plus ablation.csv and ablation.txt. `jobs` > 1 runs rows
 * concurrently. Returns VOSDA_OK only when every row finished. */
VOSDA_API vosda_status vosda_ablate(const vosda_config* config, const char* out_dir, int jobs,
                                    vosda_log_fn log, void* log_user, char** table);

#ifdef __cplusplus
}
#endif

#endif /* VOSDA_H */
