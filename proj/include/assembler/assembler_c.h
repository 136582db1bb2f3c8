#ifndef ASSEMBLER_C_H
#define ASSEMBLER_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ASM_API __declspec(dllexport)
#else
#define ASM_API __attribute__((visibility("default")))
#endif

typedef struct asm_context asm_context;
typedef struct asm_report asm_report;

typedef enum asm_status {
  ASM_OK = 0,
  ASM_ERR_INVALID_ARGUMENT = 1,
  ASM_ERR_DEGENERATE = 2,
  ASM_ERR_SINGULAR = 3,
  ASM_ERR_CONVERGENCE = 4,
  ASM_ERR_PARSE = 5,
  ASM_ERR_IO = 6,
  ASM_ERR_INTERNAL = 99
} asm_status;

typedef struct asm_report_summary {
  int feasible;
  int converged;
  int constraints_satisfied;
  int iterations;
  double objective_initial;
  double objective_final;
  double max_abs_initial;
  double max_abs_final;
  double mean_abs_initial;
  double mean_abs_final;
  double worst_margin;
  double runtime_seconds;
} asm_report_summary;

enum { ASM_POSE_INITIAL = 0, ASM_POSE_FINAL = 1 };

/* Message for the last failed call on this thread ("" if none). */
ASM_API const char* asm_last_error(void);
ASM_API const char* asm_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
ASM_API void asm_string_free(char* s);

/* config_path may be NULL for the built-in defaults. */
ASM_API asm_status asm_context_create(const char* config_path, asm_context** out);
ASM_API asm_status asm_context_create_from_json(const char* json_text, asm_context** out);
ASM_API void asm_context_destroy(asm_context* ctx);

ASM_API asm_status asm_context_config_json(const asm_context* ctx, char** out);
ASM_API asm_status asm_platform_count(const asm_context* ctx, size_t* out);
ASM_API asm_status asm_scenario_count(const asm_context* ctx, size_t* out);
ASM_API asm_status asm_scenario_name(const asm_context* ctx, size_t index, char** out);

/* Initialize, optimize and evaluate one named scenario. Safe to call from
   several threads on the same context. */
ASM_API asm_status asm_run_scenario(const asm_context* ctx, const char* name, asm_report** out);
ASM_API void asm_report_destroy(asm_report* report);

ASM_API asm_status asm_report_summary_get(const asm_report* report, asm_report_summary* out);
ASM_API asm_status asm_report_json(const asm_report* report, char** out);
ASM_API asm_status asm_report_force_csv(const asm_report* report, char** out);
ASM_API asm_status asm_report_pose_json(const asm_report* report, int which, char** out);
/* Leg forces, row-major 6 x n (row = leg). *count receives 6n; capacity may be
   0 with out NULL to query the size. */
ASM_API asm_status asm_report_forces(const asm_report* report, int which, double* out, size_t capacity,
                                     size_t* count);

/* Initial-condition solve for goal = {x, y, z, rx, ry, rz} (axis-angle).
   *feasible receives 0 or 1; *pose_json receives the plate poses. */
ASM_API asm_status asm_solve_ik(const asm_context* ctx, const double goal[6], int* feasible, char** pose_json);

/* Leg forces (CSV block with header SP1..SPn) for a pose in the JSON format
   written by asm_report_pose_json. */
ASM_API asm_status asm_forces_from_pose(const asm_context* ctx, const char* pose_json, char** csv);

#ifdef __cplusplus
}
#endif

#endif
