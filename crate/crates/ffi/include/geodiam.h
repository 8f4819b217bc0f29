#ifndef GEODIAM_H
#define GEODIAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GeodiamStatus {
  GEODIAM_STATUS_OK = 0,
  GEODIAM_STATUS_NULL_POINTER = 1,
  GEODIAM_STATUS_INVALID_ARGUMENT = 2,
  GEODIAM_STATUS_DISCONNECTED = 3,
  GEODIAM_STATUS_BUDGET_EXCEEDED = 4,
  GEODIAM_STATUS_IO = 5,
  GEODIAM_STATUS_PARSE = 6,
  GEODIAM_STATUS_INTERNAL = 7,
} GeodiamStatus;

typedef enum GeodiamSpace {
  GEODIAM_SPACE_SQUARE = 0,
  GEODIAM_SPACE_TORUS = 1,
} GeodiamSpace;

typedef enum GeodiamStrategy {
  GEODIAM_STRATEGY_REFINED = 0,
  GEODIAM_STRATEGY_SIZE_DOUBLING = 1,
} GeodiamStrategy;

/**
 * Opaque graph handle.
 */
typedef struct GeodiamGraph GeodiamGraph;

/**
 * Options for [`geodiam_diameter_framework`]. Start from
 * [`geodiam_framework_options_default`].
 */
typedef struct GeodiamFrameworkOptions {
  /**
   * Quadtree leaf level, or -1 to derive it from `c_leaf`.
   */
  int32_t leaf_level;
  double c_leaf;
  enum GeodiamStrategy strategy;
  /**
   * Fixed block size limit, or 0 for none.
   */
  uint64_t fixed_k;
  /**
   * Largest work budget, or 0 for none.
   */
  uint64_t budget_cap;
} GeodiamFrameworkOptions;

typedef struct GeodiamFrameworkResult {
  uint32_t diameter;
  uint32_t leaf_level;
  uint64_t max_leaf_size;
  uint64_t decide_calls;
  uint64_t direct_pairs;
  uint64_t overlay_pairs;
  uint64_t oracle_entries;
  uint64_t oracle_work;
  uint64_t total_work;
} GeodiamFrameworkResult;

typedef struct GeodiamIfubResult {
  uint32_t diameter;
  uint64_t center;
  uint64_t fringe_bfs;
  uint64_t total_bfs;
  uint64_t work;
} GeodiamIfubResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *geodiam_version(void);

/**
 * Message of the last failed call on this thread. Valid until the next
 * call into the library from the same thread.
 */
const char *geodiam_last_error(void);

/**
 * Static description of a status code.
 */
const char *geodiam_status_message(enum GeodiamStatus status);

/**
 * Samples `n` uniform points on a square or torus of side `√n` and joins
 * pairs at distance at most `n^rho`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum GeodiamStatus geodiam_graph_generate(uint64_t n,
                                          double rho,
                                          enum GeodiamSpace space,
                                          uint64_t seed,
                                          struct GeodiamGraph **out);

/**
 * Builds a geometric graph from `n` points given as `xy[2i], xy[2i+1]`.
 *
 * # Safety
 * `xy` must point to `2n` readable doubles and `out` to writable storage.
 */
enum GeodiamStatus geodiam_graph_from_points(enum GeodiamSpace space,
                                             double side,
                                             const double *xy,
                                             uint64_t n,
                                             double r,
                                             struct GeodiamGraph **out);

/**
 * Reads a graph file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable storage.
 */
enum GeodiamStatus geodiam_graph_read(const char *path, struct GeodiamGraph **out);

/**
 * Writes a graph file.
 *
 * # Safety
 * `g` must be a live handle and `path` a NUL-terminated string.
 */
enum GeodiamStatus geodiam_graph_write(const struct GeodiamGraph *g, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void geodiam_graph_free(struct GeodiamGraph *g);

/**
 * Vertex count, 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uint64_t geodiam_graph_num_vertices(const struct GeodiamGraph *g);

/**
 * Edge count, 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uint64_t geodiam_graph_num_edges(const struct GeodiamGraph *g);

/**
 * 1 if connected, 0 otherwise or for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
int32_t geodiam_graph_is_connected(const struct GeodiamGraph *g);

struct GeodiamFrameworkOptions geodiam_framework_options_default(void);

/**
 * Exact diameter with the separator-hierarchy algorithm.
 *
 * # Safety
 * `g` must be a live handle, `opts` null (defaults) or readable, and `out`
 * writable.
 */
enum GeodiamStatus geodiam_diameter_framework(const struct GeodiamGraph *g,
                                              const struct GeodiamFrameworkOptions *opts,
                                              struct GeodiamFrameworkResult *out);

/**
 * Exact diameter with iFUB. A negative `center` selects the double-sweep
 * center started at vertex 0.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum GeodiamStatus geodiam_diameter_ifub(const struct GeodiamGraph *g,
                                         int64_t center,
                                         struct GeodiamIfubResult *out);

/**
 * Exact diameter by BFS from every vertex. `work` may be null.
 *
 * # Safety
 * `g` must be a live handle, `diameter` writable, `work` null or writable.
 */
enum GeodiamStatus geodiam_diameter_naive(const struct GeodiamGraph *g,
                                          uint32_t *diameter,
                                          uint64_t *work);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEODIAM_H */
