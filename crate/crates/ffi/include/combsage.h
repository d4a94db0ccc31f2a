#ifndef COMBSAGE_H
#define COMBSAGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CombsageStatus {
  COMBSAGE_STATUS_OK = 0,
  COMBSAGE_STATUS_NULL_POINTER = 1,
  COMBSAGE_STATUS_INVALID_UTF8 = 2,
  COMBSAGE_STATUS_INPUT = 3,
  COMBSAGE_STATUS_PRECONDITION = 4,
  COMBSAGE_STATUS_SHAPE = 5,
  COMBSAGE_STATUS_PARSE = 6,
  COMBSAGE_STATUS_CONFIG = 7,
  COMBSAGE_STATUS_NUMERIC = 8,
  COMBSAGE_STATUS_IO = 9,
  COMBSAGE_STATUS_JSON = 10,
  COMBSAGE_STATUS_PANIC = 11,
} CombsageStatus;

/**
 * Undirected graph handle.
 */
typedef struct CombsageGraph CombsageGraph;

/**
 * Row-major matrix handle (features or embeddings).
 */
typedef struct CombsageMatrix CombsageMatrix;

typedef struct CombsageMetrics {
  double auc_roc;
  double auprc;
  double average_precision;
  double macro_f1;
  double balanced_accuracy;
} CombsageMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *combsage_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *combsage_version(void);

/**
 * Builds a graph from `num_edges` pairs stored flat in `edges`
 * (`u0, v0, u1, v1, ...`). Duplicates and self-loops are dropped.
 */
enum CombsageStatus combsage_graph_new(size_t num_nodes,
                                       const size_t *edges,
                                       size_t num_edges,
                                       struct CombsageGraph **out);

/**
 * Reads an edge-list file for a graph with `num_nodes` nodes.
 */
enum CombsageStatus combsage_graph_load(const char *path,
                                        size_t num_nodes,
                                        struct CombsageGraph **out);

void combsage_graph_free(struct CombsageGraph *graph);

/**
 * Node count, or 0 for a null handle.
 */
size_t combsage_graph_num_nodes(const struct CombsageGraph *graph);

/**
 * Undirected edge count, or 0 for a null handle.
 */
size_t combsage_graph_num_edges(const struct CombsageGraph *graph);

/**
 * Sorted neighbours of `v`, borrowed from the graph: valid until the graph
 * is freed.
 */
enum CombsageStatus combsage_graph_neighbors(const struct CombsageGraph *graph,
                                             size_t v,
                                             const size_t **out_neighbors,
                                             size_t *out_len);

/**
 * Connected components of the subgraph induced by `subset` (all neighbours
 * of `v`). Writes, for each `subset[i]`, the index of its component to
 * `out_labels[i]` and the number of components to `out_count`. Components
 * are numbered in order of their smallest node id.
 */
enum CombsageStatus combsage_graph_components(const struct CombsageGraph *graph,
                                              size_t v,
                                              const size_t *subset,
                                              size_t len,
                                              size_t *out_labels,
                                              size_t *out_count);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 */
enum CombsageStatus combsage_matrix_new(size_t rows,
                                        size_t cols,
                                        const double *data,
                                        struct CombsageMatrix **out);

enum CombsageStatus combsage_matrix_load(const char *path, struct CombsageMatrix **out);

enum CombsageStatus combsage_matrix_save(const struct CombsageMatrix *matrix, const char *path);

void combsage_matrix_free(struct CombsageMatrix *matrix);

size_t combsage_matrix_rows(const struct CombsageMatrix *matrix);

size_t combsage_matrix_cols(const struct CombsageMatrix *matrix);

/**
 * Row-major values borrowed from the matrix, or null for a null handle.
 */
const double *combsage_matrix_data(const struct CombsageMatrix *matrix);

/**
 * Generates a synthetic community graph and its features. `config_json`
 * holds generator settings (null for defaults); randomness comes from
 * `seed`.
 */
enum CombsageStatus combsage_generate_synthetic(const char *config_json,
                                                uint64_t seed,
                                                struct CombsageGraph **out_graph,
                                                struct CombsageMatrix **out_features);

/**
 * Embeds every node with `method` (`deepwalk`, `features_only`,
 * `graphsage_mean`, `graphsage_lstm` or `combsage`). `settings_json` holds
 * `gnn`/`deepwalk` hyperparameters (null for defaults).
 */
enum CombsageStatus combsage_embed(const struct CombsageGraph *graph,
                                   const struct CombsageMatrix *features,
                                   const char *method,
                                   const char *settings_json,
                                   uint64_t seed,
                                   struct CombsageMatrix **out);

/**
 * Link-prediction metrics for `n` scores; `labels[i]` is nonzero for a
 * positive example.
 */
enum CombsageStatus combsage_compute_metrics(const double *scores,
                                             const uint8_t *labels,
                                             size_t n,
                                             struct CombsageMetrics *out);

/**
 * Runs the repeated split/classify evaluation for a comma-separated list
 * of methods and returns the report as a JSON string, to be released with
 * [`combsage_string_free`]. Null `settings_json`/`eval_json` use defaults.
 */
enum CombsageStatus combsage_evaluate(const struct CombsageGraph *graph,
                                      const struct CombsageMatrix *features,
                                      const char *methods,
                                      const char *settings_json,
                                      const char *eval_json,
                                      uint64_t seed,
                                      char **out_json);

/**
 * Releases a string returned by this library.
 */
void combsage_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMBSAGE_H */
