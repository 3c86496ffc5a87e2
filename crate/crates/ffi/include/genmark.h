#ifndef GENMARK_H
#define GENMARK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GM_HELPER_NONE 0

#define GM_HELPER_HADD 1

#define GM_HELPER_HMAX 2

#define GM_HELPER_GOALCOUNT 3

typedef enum GmOutcome {
  GM_OUTCOME_SOLVED = 0,
  GM_OUTCOME_UNSOLVABLE = 1,
  GM_OUTCOME_RESOURCE_LIMIT = 2,
} GmOutcome;

typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_ARGUMENT = 1,
  GM_STATUS_INVALID_UTF8 = 2,
  GM_STATUS_PARSE = 3,
  GM_STATUS_INVALID_ARGUMENT = 4,
  GM_STATUS_FINGERPRINT_MISMATCH = 5,
  GM_STATUS_GRAPH_INAPPLICABLE = 6,
  GM_STATUS_DISCOVERY_FAILED = 7,
  GM_STATUS_OUT_OF_RANGE = 8,
  GM_STATUS_INTERNAL = 9,
} GmStatus;

typedef struct GmGraph GmGraph;

/**
 * Result of one search, including the statistics.
 */
typedef struct GmPlan GmPlan;

/**
 * A parsed domain and problem.
 */
typedef struct GmTask GmTask;

/**
 * Search settings. Zero caps mean unlimited.
 */
typedef struct GmSearchOptions {
  /**
   * One of the `GM_HELPER_*` constants.
   */
  uint32_t helper;
  bool prune;
  uint64_t max_expansions;
  /**
   * Seconds.
   */
  double timeout;
} GmSearchOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *gm_last_error(void);

/**
 * Default options: HAdd, pruning on, no caps.
 */
struct GmSearchOptions gm_search_options_default(void);

/**
 * Parses PDDL domain and problem text.
 *
 * # Safety
 * String arguments must be nul-terminated; `out` must be writable.
 */
enum GmStatus gm_task_new(const char *domain, const char *problem, struct GmTask **out);

/**
 * # Safety
 * `task` must come from [`gm_task_new`] and not be freed twice.
 */
void gm_task_free(struct GmTask *task);

/**
 * Loads a graph from its JSON form.
 *
 * # Safety
 * `json` must be nul-terminated; `out` must be writable.
 */
enum GmStatus gm_graph_from_json(const char *json, struct GmGraph **out);

/**
 * Discovers a graph from a trajectory document. `beta` names a feature
 * configuration (`b1`..`b5`) and `phi` a preprocessing configuration
 * (`phi1`..`phi4`).
 *
 * # Safety
 * String arguments must be nul-terminated; `out` must be writable.
 */
enum GmStatus gm_graph_discover(const char *domain,
                                const char *trajectories_json,
                                const char *beta,
                                const char *phi,
                                struct GmGraph **out);

/**
 * Serializes a graph; release the string with [`gm_string_free`].
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum GmStatus gm_graph_to_json(const struct GmGraph *graph, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void gm_string_free(char *s);

/**
 * # Safety
 * `graph` must be a live handle; `nodes` and `loops` must be writable.
 */
enum GmStatus gm_graph_shape(const struct GmGraph *graph, size_t *nodes, size_t *loops);

/**
 * Total landmark acceptances the graph requires on `task`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GmStatus gm_graph_h_max(const struct GmGraph *graph, const struct GmTask *task, uint32_t *out);

/**
 * # Safety
 * `graph` must come from this library and not be freed twice.
 */
void gm_graph_free(struct GmGraph *graph);

/**
 * Searches for a plan. `graph` may be null for the helper alone; `options`
 * may be null for [`gm_search_options_default`].
 *
 * # Safety
 * Non-null handles must be live; `out` must be writable.
 */
enum GmStatus gm_plan(const struct GmTask *task,
                      const struct GmGraph *graph,
                      const struct GmSearchOptions *options,
                      struct GmPlan **out);

/**
 * A null plan reads as unsolvable.
 *
 * # Safety
 * `plan` must be a live handle or null.
 */
enum GmOutcome gm_plan_outcome(const struct GmPlan *plan);

/**
 * Number of actions; 0 unless solved.
 *
 * # Safety
 * `plan` must be a live handle or null.
 */
size_t gm_plan_len(const struct GmPlan *plan);

/**
 * Action `index`; the string lives as long as the plan.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum GmStatus gm_plan_action(const struct GmPlan *plan, size_t index, const char **out);

/**
 * # Safety
 * `plan` must be a live handle or null.
 */
uint64_t gm_plan_expanded(const struct GmPlan *plan);

/**
 * # Safety
 * `plan` must be a live handle or null.
 */
uint64_t gm_plan_evaluated(const struct GmPlan *plan);

/**
 * # Safety
 * `plan` must come from [`gm_plan`] and not be freed twice.
 */
void gm_plan_free(struct GmPlan *plan);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENMARK_H */
