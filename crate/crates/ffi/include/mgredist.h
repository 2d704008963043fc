#ifndef MGREDIST_H
#define MGREDIST_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MgrInterp {
  MGR_INTERP_OPERATOR_INDUCED = 0,
  MGR_INTERP_BILINEAR = 1,
} MgrInterp;

typedef enum MgrMode {
  MGR_MODE_NON_REDUNDANT = 0,
  MGR_MODE_REDUNDANT = 1,
} MgrMode;

/**
 * Result of every fallible call.
 */
typedef enum MgrStatus {
  MGR_STATUS_OK = 0,
  MGR_STATUS_NULL_POINTER = 1,
  MGR_STATUS_INVALID_ARGUMENT = 2,
  MGR_STATUS_PLAN = 3,
  MGR_STATUS_NUMERICAL = 4,
  MGR_STATUS_SIMULATION = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  MGR_STATUS_INTERNAL = 6,
} MgrStatus;

/**
 * Serial multigrid hierarchy of the anisotropic diffusion test problem.
 */
typedef struct MgrHierarchy MgrHierarchy;

/**
 * A costed redistribution path.
 */
typedef struct MgrPath MgrPath;

/**
 * Search graph for one fine grid, processor grid and machine.
 */
typedef struct MgrPlanner MgrPlanner;

/**
 * Seconds per message, per byte and per flop.
 */
typedef struct MgrMachine {
  double alpha;
  double beta;
  double gamma;
} MgrMachine;

/**
 * Model cost of one V-cycle, split by component.
 */
typedef struct MgrCost {
  double smooth;
  double residual;
  double restrict_;
  double interp;
  double agglomerate;
  double cgsolve;
  double total;
} MgrCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Latest error message on this thread, or null. The string is owned by the
 * caller and released with [`mgr_string_free`].
 */
char *mgr_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void mgr_string_free(char *s);

/**
 * Blue Waters model parameters.
 */
struct MgrMachine mgr_machine_blue_waters(void);

/**
 * Creates a planner for a fine grid of `dim` extents on a processor grid of
 * `dim` extents, with two pre- and one post-smoothing sweep.
 *
 * # Safety
 * `grid` and `procs` must point to `dim` values; `out` must be writable.
 */
enum MgrStatus mgr_planner_new(const size_t *grid,
                               const size_t *procs,
                               size_t dim,
                               struct MgrMachine machine,
                               enum MgrMode mode,
                               struct MgrPlanner **out);

/**
 * # Safety
 * `p` must come from [`mgr_planner_new`] or be null.
 */
void mgr_planner_free(struct MgrPlanner *p);

/**
 * Cheapest path by A* (or exhaustive search when `brute` is set). The node
 * count lands in `expanded` when it is not null.
 *
 * # Safety
 * `p` must be a live planner; `out` must be writable.
 */
enum MgrStatus mgr_planner_search(const struct MgrPlanner *p,
                                  bool brute,
                                  struct MgrPath **out,
                                  uint64_t *expanded);

/**
 * Costs a path written like `64x32 -> 16x1 -> 1x1`.
 *
 * # Safety
 * `p` must be a live planner, `text` a NUL-terminated string; `out` must be
 * writable.
 */
enum MgrStatus mgr_planner_evaluate(const struct MgrPlanner *p,
                                    const char *text,
                                    struct MgrPath **out);

/**
 * Model cost of one V-cycle under `path`.
 *
 * # Safety
 * `p` and `path` must be live handles from the same planner.
 */
enum MgrStatus mgr_planner_cycle_cost(const struct MgrPlanner *p,
                                      const struct MgrPath *path,
                                      struct MgrCost *out);

/**
 * # Safety
 * `p` must come from this library or be null.
 */
void mgr_path_free(struct MgrPath *p);

/**
 * Sum of the transition costs in seconds, or NaN for a null handle.
 *
 * # Safety
 * `p` must be a live path or null.
 */
double mgr_path_total(const struct MgrPath *p);

/**
 * Number of processor grids on the path, or 0 for a null handle.
 *
 * # Safety
 * `p` must be a live path or null.
 */
size_t mgr_path_len(const struct MgrPath *p);

/**
 * Whether every hop is a search successor.
 *
 * # Safety
 * `p` must be a live path or null.
 */
bool mgr_path_valid(const struct MgrPath *p);

/**
 * Processor grid `index` of the path and the level where it takes over.
 *
 * # Safety
 * `p` must be a live path; `procs` must hold `dim` values.
 */
enum MgrStatus mgr_path_state(const struct MgrPath *p,
                              size_t index,
                              size_t *procs,
                              size_t dim,
                              size_t *depth);

/**
 * Path in arrow notation with ASCII arrows, owned by the caller.
 *
 * # Safety
 * `p` must be a live path or null.
 */
char *mgr_path_to_string(const struct MgrPath *p);

/**
 * Builds the V(nu1, nu2) hierarchy of `-div(diag(1/r, r) grad u) = f` on an
 * `nx x ny` interior grid with cell aspect `hy/hx = aspect`. The
 * right-hand side is set per solve.
 *
 * # Safety
 * `out` must be writable.
 */
enum MgrStatus mgr_hierarchy_new(size_t nx,
                                 size_t ny,
                                 double r,
                                 double aspect,
                                 enum MgrInterp interp,
                                 size_t nu1,
                                 size_t nu2,
                                 struct MgrHierarchy **out);

/**
 * # Safety
 * `h` must come from this library or be null.
 */
void mgr_hierarchy_free(struct MgrHierarchy *h);

/**
 * Number of levels, or 0 for a null handle.
 *
 * # Safety
 * `h` must be a live hierarchy or null.
 */
size_t mgr_hierarchy_levels(const struct MgrHierarchy *h);

/**
 * One serial V-cycle; `x` (first index fastest) is updated in place.
 *
 * # Safety
 * `x` and `b` must hold `n` values each.
 */
enum MgrStatus mgr_hierarchy_vcycle(const struct MgrHierarchy *h,
                                    double *x,
                                    const double *b,
                                    size_t n);

/**
 * Runs `cycles` V-cycles on logical ranks following `path`, updating `x`
 * in place. `reconciled` reports whether the logged traffic equals the
 * traffic the cost model implies.
 *
 * # Safety
 * Handles must be live, the planner's fine grid must be the hierarchy's,
 * and `x`, `b` must hold `n` values each.
 */
enum MgrStatus mgr_simulate(const struct MgrHierarchy *h,
                            const struct MgrPlanner *p,
                            const struct MgrPath *path,
                            size_t cycles,
                            double *x,
                            const double *b,
                            size_t n,
                            bool *reconciled);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MGREDIST_H */
