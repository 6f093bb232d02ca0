/*
 * C interface to the ABPR engine: program parsing and execution, declarative
 * tracing, ARC task evaluation, and interactive bug localization.
 *
 * All functions returning abpr_status set a thread-local message readable
 * through abpr_last_error() on failure. Strings returned through char** are
 * heap-allocated; release them with abpr_string_free().
 */
#ifndef ABPR_H
#define ABPR_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum abpr_status {
  ABPR_OK = 0,
  ABPR_E_INVALID_ARG = 1,
  ABPR_E_SYNTAX = 2,       /* malformed program text */
  ABPR_E_UNSUPPORTED = 3,  /* construct outside the Prolog subset */
  ABPR_E_RESOURCE = 4,     /* step, depth, or wall-time limit hit */
  ABPR_E_TYPE = 5,         /* type error during execution */
  ABPR_E_FORMAT = 6,       /* malformed task file or grid */
  ABPR_E_IO = 7,
  ABPR_E_CONFIG = 8,
  ABPR_E_NO_SOLUTION = 9,  /* solve/2 found no solution */
  ABPR_E_RUNTIME = 10,
  ABPR_E_ABORTED = 11      /* interactive session ended at EOF */
} abpr_status;

typedef struct abpr_program abpr_program;  /* parsed logic program */
typedef struct abpr_task abpr_task;        /* ARC task record */

typedef struct abpr_limits {
  long long max_steps;
  long long max_depth;
  long long timeout_ms;
} abpr_limits;

const char* abpr_version(void);
const char* abpr_status_name(abpr_status status);
const char* abpr_last_error(void);
void abpr_string_free(char* s);
abpr_limits abpr_default_limits(void);

/* -- programs ----------------------------------------------------------- */

abpr_status abpr_program_parse(const char* source, abpr_program** out);
void abpr_program_free(abpr_program* program);
/* Canonical clause-by-clause rendering. */
abpr_status abpr_program_render(const abpr_program* program, char** out);

/* Runs solve/2 on a grid given as JSON rows, e.g. "[[0,8],[8,0]]". */
abpr_status abpr_exec(const abpr_program* program, const char* input_grid_json,
                      const abpr_limits* limits, char** output_grid_json);

/* Solves a goal while reifying the derivation; returns the rendered tree
 * (or the failure witness when the goal has no solution). */
abpr_status abpr_trace_goal(const abpr_program* program, const char* goal_text,
                            const abpr_limits* limits, long long max_nodes, char** rendered);

/* -- tasks -------------------------------------------------------------- */

abpr_status abpr_task_load(const char* path, abpr_task** out);
abpr_status abpr_task_parse(const char* json_text, const char* task_id, abpr_task** out);
void abpr_task_free(abpr_task* task);
/* {"task_id":..., "train_pairs":n, "test_pairs":n, "has_expected":b,
 *  "warnings":[...]} */
abpr_status abpr_task_info(const abpr_task* task, char** info_json);

/* -- evaluation --------------------------------------------------------- */

/* config_json keys (all optional): t_max, k, n_instances, provider, model,
 * temperature, base_seed, prompt_budget, mode ("live"|"mock"|"interactive"),
 * mock_script, base_selection ("latest"|"best"), max_steps, max_depth,
 * timeout_ms, out_dir, explicit_localization. "{}" selects the defaults
 * (t_max=10, k=2, n_instances=8, temperature=1.0). */
abpr_status abpr_solve_task(const abpr_task* task, const char* config_json, char** result_json);

/* Evaluates every .json task under tasks_dir; writes results.jsonl,
 * runs.jsonl, summary.csv, and config.json into out_dir. */
abpr_status abpr_run_dir(const char* tasks_dir, const char* config_json, const char* out_dir,
                         char** summary_json);

/* Recomputes aggregates from a results.jsonl file. */
abpr_status abpr_report(const char* results_jsonl_path, char** summary_json);

/* Interactive bug localization over the first failing training pair, talking
 * to the attached terminal. Returns ABPR_E_ABORTED on EOF. */
abpr_status abpr_interactive_debug(const abpr_program* program, const abpr_task* task,
                                   const char* config_json, int* buggy_count);

#ifdef __cplusplus
}
#endif

#endif /* ABPR_H */
