#ifndef AEDES_H
#define AEDES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum AedesStatus {
  AEDES_STATUS_OK = 0,
  AEDES_STATUS_NULL_POINTER = 1,
  AEDES_STATUS_INVALID_ARGUMENT = 2,
  AEDES_STATUS_CONFIG = 3,
  AEDES_STATUS_INVALID_PARAMETER = 4,
  AEDES_STATUS_NUMERICAL = 5,
  AEDES_STATUS_CRITERION_FAILED = 6,
  AEDES_STATUS_IO = 7,
  AEDES_STATUS_PANIC = 8,
} AedesStatus;

typedef enum AedesPatch {
  AEDES_PATCH_HOMOGENEOUS = 0,
  AEDES_PATCH_FOREST = 1,
  AEDES_PATCH_URBAN = 2,
} AedesPatch;

typedef enum AedesDirection {
  AEDES_DIRECTION_SPECIES1_INVADES = 1,
  AEDES_DIRECTION_SPECIES2_INVADES = 2,
} AedesDirection;

typedef enum AedesFrontSide {
  AEDES_FRONT_SIDE_INVADER = 0,
  AEDES_FRONT_SIDE_RESIDENT = 1,
} AedesFrontSide;

typedef enum AedesModel {
  AEDES_MODEL_FULL = 0,
  AEDES_MODEL_REDUCED = 1,
} AedesModel;

// Snapshot field. `W` exists only for reduced trajectories, `E1`/`E2`
// only for full ones.
typedef enum AedesField {
  AEDES_FIELD_E1 = 0,
  AEDES_FIELD_F1 = 1,
  AEDES_FIELD_E2 = 2,
  AEDES_FIELD_F2 = 3,
  AEDES_FIELD_W = 4,
} AedesField;

// Opaque stationary front on a half-line.
typedef struct AedesFront AedesFront;

// Opaque scenario handle.
typedef struct AedesScenario AedesScenario;

// Opaque simulation result.
typedef struct AedesTrajectory AedesTrajectory;

// Constant equilibria of one patch. Entries of a non-viable species are NaN,
// as is the threshold when it is undefined.
typedef struct AedesEquilibria {
  double n1;
  double n2;
  double e1_star;
  double f1_star;
  double e2_star;
  double f2_star;
  double threshold;
} AedesEquilibria;

typedef struct AedesCriterion {
  double f_inv_star;
  double f_res_star;
  double l_tilde;
  double zeta;
  double chi0;
  double argmax;
  double gamma_at_fstar;
  bool invasion;
} AedesCriterion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next `aedes_*` call on the same thread.
const char *aedes_last_error_message(void);

// Parses a scenario from `key = value` text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum AedesStatus aedes_scenario_parse(const char *text, struct AedesScenario **out);

// Loads a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum AedesStatus aedes_scenario_load(const char *path, struct AedesScenario **out);

// Built-in reference scenario: homogeneous habitat when `two_patch` is
// false, forest/urban habitat otherwise.
//
// # Safety
// `out` must be a valid pointer.
enum AedesStatus aedes_scenario_reference(bool two_patch, struct AedesScenario **out);

// Overrides the time settings of a scenario.
//
// # Safety
// `scenario` must come from this library and not be freed.
enum AedesStatus aedes_scenario_set_time(struct AedesScenario *scenario,
                                         double dt,
                                         double t_end,
                                         size_t output_stride);

// Releases a scenario. NULL is ignored.
//
// # Safety
// `scenario` must come from this library and not be freed twice.
void aedes_scenario_free(struct AedesScenario *scenario);

// Reproduction numbers, single-species equilibria and competition
// threshold for one patch.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum AedesStatus aedes_equilibria(const struct AedesScenario *scenario,
                                  enum AedesPatch patch,
                                  struct AedesEquilibria *out);

// Invasion integral. A false verdict is a successful call; inspect
// `out->invasion`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum AedesStatus aedes_criterion(const struct AedesScenario *scenario,
                                 enum AedesDirection direction,
                                 enum AedesPatch patch,
                                 struct AedesCriterion *out);

// Stationary invasion front on the default half-line with spacing `dx`.
// Fails with `AEDES_STATUS_CRITERION_FAILED` when the invasion hypothesis
// does not hold.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum AedesStatus aedes_front_new(const struct AedesScenario *scenario,
                                 enum AedesDirection direction,
                                 double dx,
                                 struct AedesFront **out);

// Number of nodes of a front, or 0 for NULL.
//
// # Safety
// `front` must be NULL or a live handle.
size_t aedes_front_len(const struct AedesFront *front);

// Node spacing of a front, or NaN for NULL.
//
// # Safety
// `front` must be NULL or a live handle.
double aedes_front_dx(const struct AedesFront *front);

// Copies one component of a front (nodes from x = 0 outward) into `buf`.
//
// # Safety
// `front` must be a live handle; `buf` must hold `len` doubles.
enum AedesStatus aedes_front_copy(const struct AedesFront *front,
                                  enum AedesFrontSide side,
                                  double *buf,
                                  size_t len);

// Releases a front. NULL is ignored.
//
// # Safety
// `front` must come from this library and not be freed twice.
void aedes_front_free(struct AedesFront *front);

// Integrates the scenario with its own initial data and time settings.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum AedesStatus aedes_simulate(const struct AedesScenario *scenario,
                                enum AedesModel model,
                                struct AedesTrajectory **out);

// Number of stored snapshots, or 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live handle.
size_t aedes_trajectory_snapshots(const struct AedesTrajectory *traj);

// Number of grid nodes, or 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live handle.
size_t aedes_trajectory_nodes(const struct AedesTrajectory *traj);

// Time of snapshot `index`.
//
// # Safety
// `traj` must be a live handle and `out` a valid pointer.
enum AedesStatus aedes_trajectory_time(const struct AedesTrajectory *traj,
                                       size_t index,
                                       double *out);

// Copies one field of snapshot `index` into `buf`.
//
// # Safety
// `traj` must be a live handle; `buf` must hold `len` doubles.
enum AedesStatus aedes_trajectory_copy(const struct AedesTrajectory *traj,
                                       size_t index,
                                       enum AedesField field,
                                       double *buf,
                                       size_t len);

// Releases a trajectory. NULL is ignored.
//
// # Safety
// `traj` must come from this library and not be freed twice.
void aedes_trajectory_free(struct AedesTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AEDES_H */
