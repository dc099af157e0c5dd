// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#ifndef ARGSPLAT_ARGSPLAT_H
#define ARGSPLAT_ARGSPLAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef ARGSPLAT_BUILDING_LIBRARY
#    define ARGSPLAT_API __declspec(dllexport)
#  else
#    define ARGSPLAT_API __declspec(dllimport)
#  endif
#else
#  define ARGSPLAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every entry point returns a status; on failure a message is available from
 * argsplat_last_error() on the calling thread until the next call. Output
 * handles are only written on success. */
typedef enum argsplat_status {
    ARGSPLAT_OK = 0,
    ARGSPLAT_ERR_NULL_ARGUMENT = 1,
    ARGSPLAT_ERR_INVALID_PARAMETER = 2,
    ARGSPLAT_ERR_NUMERICAL_DEGENERACY = 3,
    ARGSPLAT_ERR_DEGENERATE_MERGE = 4,
    ARGSPLAT_ERR_INSUFFICIENT_POPULATION = 5,
    ARGSPLAT_ERR_INVALID_TARGET = 6,
    ARGSPLAT_ERR_INCONSISTENT_SEQUENCE = 7,
    ARGSPLAT_ERR_NOT_FULLY_SIMPLIFIED = 8,
    ARGSPLAT_ERR_INCONSISTENCY = 9,
    ARGSPLAT_ERR_SHAPE_MISMATCH = 10,
    ARGSPLAT_ERR_IMAGE_TOO_SMALL = 11,
    ARGSPLAT_ERR_IO = 12,
    ARGSPLAT_ERR_FORMAT = 13,
    ARGSPLAT_ERR_BAD_MAGIC = 14,
    ARGSPLAT_ERR_BAD_VERSION = 15,
    ARGSPLAT_ERR_TRUNCATED = 16,
    ARGSPLAT_ERR_UNSUPPORTED = 17,
    ARGSPLAT_ERR_OUT_OF_RANGE = 18,
    ARGSPLAT_ERR_INTERNAL = 99
} argsplat_status;

typedef enum argsplat_mask_variant {
    ARGSPLAT_MASK_CAUSAL = 0,
    ARGSPLAT_MASK_LEVELWISE = 1,
    ARGSPLAT_MASK_TREE = 2,
    ARGSPLAT_MASK_TREE_ALL_INTERNAL = 3
} argsplat_mask_variant;

typedef struct argsplat_set argsplat_set;           /* gaussians with ids */
typedef struct argsplat_sequence argsplat_sequence; /* merge log */
typedef struct argsplat_tree argsplat_tree;         /* merge hierarchy */
typedef struct argsplat_quant_spec argsplat_quant_spec;
typedef struct argsplat_tokens argsplat_tokens;
typedef struct argsplat_mask argsplat_mask;
typedef struct argsplat_image argsplat_image;

/* Plain view of one Gaussian; rotation is (w, x, y, z). Higher-order SH is
 * not exposed here. */
typedef struct argsplat_gaussian {
    double center[3];
    double opacity;
    double scale[3];
    double rotation[4];
    double dc[3];
} argsplat_gaussian;

typedef struct argsplat_simplify_options {
    double beta;           /* partner distance |du| / m0^beta; 0 = euclidean */
    int reference_scan;    /* nonzero: exhaustive partner search */
} argsplat_simplify_options;

typedef struct argsplat_camera {
    double rotation[9]; /* world -> camera, row-major */
    double translation[3];
    double fx, fy, cx, cy;
    uint32_t width, height;
} argsplat_camera;

typedef struct argsplat_tree_stats {
    size_t leaves;
    size_t internal;
    size_t depth;
    size_t max_leaf_depth;
    double mean_leaf_depth;
} argsplat_tree_stats;

ARGSPLAT_API const char *argsplat_last_error(void);
ARGSPLAT_API const char *argsplat_status_string(argsplat_status status);
ARGSPLAT_API const char *argsplat_version(void);

/* --- gaussian sets ------------------------------------------------------ */
ARGSPLAT_API argsplat_status argsplat_set_load_ply(const char *path, argsplat_set **out);
ARGSPLAT_API argsplat_status argsplat_set_save_ply(const argsplat_set *set, const char *path);
/* Exact native encoding ("ARGX"), ids included. */
ARGSPLAT_API argsplat_status argsplat_set_load(const char *path, argsplat_set **out);
ARGSPLAT_API argsplat_status argsplat_set_save(const argsplat_set *set, const char *path);
ARGSPLAT_API argsplat_status argsplat_set_synthesize(uint64_t seed, uint32_t count, uint32_t clusters,
                                                     argsplat_set **out);
ARGSPLAT_API argsplat_status argsplat_set_create(argsplat_set **out);
ARGSPLAT_API argsplat_status argsplat_set_add(argsplat_set *set, uint32_t id, const argsplat_gaussian *g);
ARGSPLAT_API size_t argsplat_set_size(const argsplat_set *set);
ARGSPLAT_API argsplat_status argsplat_set_get(const argsplat_set *set, size_t index, uint32_t *id,
                                              argsplat_gaussian *out);
ARGSPLAT_API void argsplat_set_free(argsplat_set *set);

/* --- simplification ----------------------------------------------------- */
ARGSPLAT_API argsplat_status argsplat_simplify(const argsplat_set *set, uint32_t target_count,
                                               const argsplat_simplify_options *options,
                                               argsplat_sequence **sequence_out,
                                               argsplat_set **remaining_out);
ARGSPLAT_API argsplat_status argsplat_expand(const argsplat_set *roots, const argsplat_sequence *sequence,
                                             size_t steps, argsplat_set **out);
ARGSPLAT_API argsplat_status argsplat_sequence_load(const char *path, argsplat_sequence **out);
ARGSPLAT_API argsplat_status argsplat_sequence_save(const argsplat_sequence *sequence, const char *path);
ARGSPLAT_API size_t argsplat_sequence_size(const argsplat_sequence *sequence);
ARGSPLAT_API uint32_t argsplat_sequence_source_count(const argsplat_sequence *sequence);
ARGSPLAT_API void argsplat_sequence_free(argsplat_sequence *sequence);

/* --- hierarchy ------------------------------------------------------------ */
/* `roots` may be NULL unless the sequence is empty (single-gaussian input). */
ARGSPLAT_API argsplat_status argsplat_tree_build(const argsplat_sequence *sequence, const argsplat_set *roots,
                                                 argsplat_tree **out);
ARGSPLAT_API size_t argsplat_tree_size(const argsplat_tree *tree);
ARGSPLAT_API argsplat_status argsplat_tree_stats_get(const argsplat_tree *tree, argsplat_tree_stats *out);
/* Level sizes |N_0| .. |N_L|; `needed` receives L + 1. */
ARGSPLAT_API argsplat_status argsplat_tree_level_sizes(const argsplat_tree *tree, size_t *sizes, size_t capacity,
                                                       size_t *needed);
ARGSPLAT_API argsplat_status argsplat_tree_save_text(const argsplat_tree *tree, const char *path);
ARGSPLAT_API argsplat_status argsplat_tree_save_stats_json(const argsplat_tree *tree, const char *path);
ARGSPLAT_API argsplat_status argsplat_tree_frontier(const argsplat_tree *tree, size_t level, argsplat_set **out);
/* Every node, internal and leaf. */
ARGSPLAT_API argsplat_status argsplat_tree_nodes(const argsplat_tree *tree, argsplat_set **out);
ARGSPLAT_API void argsplat_tree_free(argsplat_tree *tree);

/* --- tokens ----------------------------------------------------------------- */
ARGSPLAT_API argsplat_status argsplat_quant_spec_fit(const argsplat_set *const *sets, size_t count,
                                                     argsplat_quant_spec **out);
ARGSPLAT_API void argsplat_quant_spec_free(argsplat_quant_spec *spec);
ARGSPLAT_API argsplat_status argsplat_tokenize_tree(const argsplat_tree *tree, const argsplat_quant_spec *spec,
                                                    argsplat_tokens **out);
ARGSPLAT_API argsplat_status argsplat_tokens_load(const char *path, argsplat_tokens **out);
ARGSPLAT_API argsplat_status argsplat_tokens_save(const argsplat_tokens *tokens, const char *path);
ARGSPLAT_API size_t argsplat_tokens_size(const argsplat_tokens *tokens);
ARGSPLAT_API uint32_t argsplat_tokens_depth(const argsplat_tokens *tokens);
/* Dequantized frontier at `level`. */
ARGSPLAT_API argsplat_status argsplat_tokens_frontier(const argsplat_tokens *tokens, size_t level,
                                                      argsplat_set **out);
ARGSPLAT_API void argsplat_tokens_free(argsplat_tokens *tokens);

/* --- masks ------------------------------------------------------------------ */
ARGSPLAT_API argsplat_status argsplat_mask_build(argsplat_mask_variant variant, const argsplat_tokens *tokens,
                                                 const argsplat_tree *tree, argsplat_mask **out);
ARGSPLAT_API argsplat_status argsplat_mask_causal(size_t n, argsplat_mask **out);
ARGSPLAT_API argsplat_status argsplat_mask_load(const char *path, argsplat_mask **out);
ARGSPLAT_API argsplat_status argsplat_mask_save(const argsplat_mask *mask, const char *path);
ARGSPLAT_API argsplat_status argsplat_mask_save_text(const argsplat_mask *mask, const char *path);
ARGSPLAT_API size_t argsplat_mask_size(const argsplat_mask *mask);
ARGSPLAT_API argsplat_status argsplat_mask_allowed(const argsplat_mask *mask, size_t query, size_t key,
                                                   int *allowed);
ARGSPLAT_API void argsplat_mask_free(argsplat_mask *mask);
/* Distinct keys needed per level 0..L; `needed` receives L + 1. */
ARGSPLAT_API argsplat_status argsplat_decode_cost(const argsplat_tree *tree, argsplat_mask_variant variant,
                                                  size_t *costs, size_t capacity, size_t *needed);

/* --- rendering and metrics ------------------------------------------------------ */
ARGSPLAT_API argsplat_status argsplat_orbit_cameras(const argsplat_set *set, size_t count, uint32_t width,
                                                    uint32_t height, argsplat_camera *out);
ARGSPLAT_API argsplat_status argsplat_render(const argsplat_set *set, const argsplat_camera *camera,
                                             unsigned workers, argsplat_image **out);
ARGSPLAT_API argsplat_status argsplat_image_load_raw(const char *path, argsplat_image **out);
ARGSPLAT_API argsplat_status argsplat_image_save_raw(const argsplat_image *image, const char *path);
ARGSPLAT_API argsplat_status argsplat_image_load_ppm(const char *path, argsplat_image **out);
ARGSPLAT_API argsplat_status argsplat_image_save_ppm(const argsplat_image *image, const char *path);
ARGSPLAT_API argsplat_status argsplat_image_size(const argsplat_image *image, uint32_t *width, uint32_t *height);
ARGSPLAT_API void argsplat_image_free(argsplat_image *image);
ARGSPLAT_API argsplat_status argsplat_psnr(const argsplat_image *a, const argsplat_image *b, double *out);
ARGSPLAT_API argsplat_status argsplat_ssim(const argsplat_image *a, const argsplat_image *b, double *out);

/* --- verification -------------------------------------------------------------- */
/* Runs the oracle suites; writes a JSON summary to `json_path` when non-NULL. */
ARGSPLAT_API argsplat_status argsplat_verify(uint64_t seed, const char *json_path, size_t *failures);

#ifdef __cplusplus
}
#endif

#endif /* ARGSPLAT_ARGSPLAT_H */
