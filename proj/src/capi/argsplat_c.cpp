// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/argsplat.h"

#include "argsplat/error.hpp"
#include "argsplat/hierarchy.hpp"
#include "argsplat/io.hpp"
#include "argsplat/masks.hpp"
#include "argsplat/render.hpp"
#include "argsplat/simplify.hpp"
#include "argsplat/synth.hpp"
#include "argsplat/tokenize.hpp"
#include "argsplat/verify.hpp"

#include <algorithm>
#include <memory>
#include <new>
#include <string>
#include <vector>

struct argsplat_set { argsplat::GaussianSet value; };
struct argsplat_sequence { argsplat::MergeSequence value; };
struct argsplat_tree { argsplat::HierarchyTree value; };
struct argsplat_quant_spec { argsplat::QuantSpec value; };
struct argsplat_tokens { argsplat::TokenStream value; };
struct argsplat_mask { argsplat::AttentionMask value; };
struct argsplat_image { argsplat::Image value; };

namespace {

thread_local std::string tLastError;

argsplat_status
statusFor(argsplat::ErrorCode code) {
    using argsplat::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidParameter: return ARGSPLAT_ERR_INVALID_PARAMETER;
    case ErrorCode::NumericalDegeneracy: return ARGSPLAT_ERR_NUMERICAL_DEGENERACY;
    case ErrorCode::DegenerateMerge: return ARGSPLAT_ERR_DEGENERATE_MERGE;
    case ErrorCode::InsufficientPopulation: return ARGSPLAT_ERR_INSUFFICIENT_POPULATION;
    case ErrorCode::InvalidTarget: return ARGSPLAT_ERR_INVALID_TARGET;
    case ErrorCode::InconsistentSequence: return ARGSPLAT_ERR_INCONSISTENT_SEQUENCE;
    case ErrorCode::NotFullySimplified: return ARGSPLAT_ERR_NOT_FULLY_SIMPLIFIED;
    case ErrorCode::Inconsistency: return ARGSPLAT_ERR_INCONSISTENCY;
    case ErrorCode::ShapeMismatch: return ARGSPLAT_ERR_SHAPE_MISMATCH;
    case ErrorCode::ImageTooSmall: return ARGSPLAT_ERR_IMAGE_TOO_SMALL;
    case ErrorCode::Io: return ARGSPLAT_ERR_IO;
    case ErrorCode::Format: return ARGSPLAT_ERR_FORMAT;
    case ErrorCode::BadMagic: return ARGSPLAT_ERR_BAD_MAGIC;
    case ErrorCode::BadVersion: return ARGSPLAT_ERR_BAD_VERSION;
    case ErrorCode::Truncated: return ARGSPLAT_ERR_TRUNCATED;
    case ErrorCode::Unsupported: return ARGSPLAT_ERR_UNSUPPORTED;
    }
    return ARGSPLAT_ERR_INTERNAL;
}

template <typename F>
argsplat_status
guarded(F &&f) noexcept {
    try {
        tLastError.clear();
        f();
        return ARGSPLAT_OK;
    } catch (const argsplat::Error &e) {
        tLastError = e.what();
        return statusFor(e.code());
    } catch (const std::bad_alloc &) {
        tLastError = "out of memory";
        return ARGSPLAT_ERR_INTERNAL;
    } catch (const std::exception &e) {
        tLastError = e.what();
        return ARGSPLAT_ERR_INTERNAL;
    }
}


template <typename... Ptr>
bool
anyNull(Ptr... p) {
    return ((p == nullptr) || ...);
}

#define ARGSPLAT_REQUIRE(...)                                                                  \
    do {                                                                                        \
        if (anyNull(__VA_ARGS__)) {                                                            \
            tLastError = "null argument";                                                      \
            return ARGSPLAT_ERR_NULL_ARGUMENT;                                                 \
        }                                                                                       \
    } while (0)

template <typename Handle, typename T>
void
emit(Handle **out, T &&value) {
    *out = new Handle{std::forward<T>(value)};
}

argsplat_gaussian
toC(const argsplat::Gaussian3D &g) {
    argsplat_gaussian c{};
    for (int i = 0; i < 3; ++i) {
        c.center[i] = g.center[i];
        c.scale[i]  = g.scale[i];
        c.dc[i]     = g.dc[i];
    }
    c.opacity = g.opacity;
    for (int i = 0; i < 4; ++i) c.rotation[i] = g.rotation[i];
    return c;
}

argsplat::Gaussian3D
fromC(const argsplat_gaussian &c) {
    argsplat::Gaussian3D g;
    for (int i = 0; i < 3; ++i) {
        g.center[i] = c.center[i];
        g.scale[i]  = c.scale[i];
        g.dc[i]     = c.dc[i];
    }
    g.opacity = c.opacity;
    for (int i = 0; i < 4; ++i) g.rotation[i] = c.rotation[i];
    return g;
}

argsplat::Camera
fromC(const argsplat_camera &c) {
    argsplat::Camera cam;
    for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) cam.rotation(r, k) = c.rotation[r * 3 + k];
        cam.translation[r] = c.translation[r];
    }
    cam.fx = c.fx;
    cam.fy = c.fy;
    cam.cx = c.cx;
    cam.cy = c.cy;
    cam.width  = c.width;
    cam.height = c.height;
    return cam;
}

argsplat_camera
toC(const argsplat::Camera &cam) {
    argsplat_camera c{};
    for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) c.rotation[r * 3 + k] = cam.rotation(r, k);
        c.translation[r] = cam.translation[r];
    }
    c.fx = cam.fx;
    c.fy = cam.fy;
    c.cx = cam.cx;
    c.cy = cam.cy;
    c.width  = cam.width;
    c.height = cam.height;
    return c;
}

argsplat::MaskVariant
variantFromC(argsplat_mask_variant v) {
    switch (v) {
    case ARGSPLAT_MASK_CAUSAL: return argsplat::MaskVariant::Causal;
    case ARGSPLAT_MASK_LEVELWISE: return argsplat::MaskVariant::Levelwise;
    case ARGSPLAT_MASK_TREE: return argsplat::MaskVariant::Tree;
    case ARGSPLAT_MASK_TREE_ALL_INTERNAL: return argsplat::MaskVariant::TreeAllInternal;
    }
    argsplat::fail(argsplat::ErrorCode::InvalidParameter, "unknown mask variant");
}

argsplat_status
copySizes(const std::vector<std::size_t> &values, size_t *dst, size_t capacity, size_t *needed) {
    *needed = values.size();
    if (dst && capacity >= values.size()) {
        std::copy(values.begin(), values.end(), dst);
        return ARGSPLAT_OK;
    }
    if (!dst && capacity == 0) {
        return ARGSPLAT_OK;
    }
    tLastError = "output buffer too small";
    return ARGSPLAT_ERR_OUT_OF_RANGE;
}

} // namespace

extern "C" {

const char *
argsplat_last_error(void) {
    return tLastError.c_str();
}

const char *
argsplat_status_string(argsplat_status status) {
    switch (status) {
    case ARGSPLAT_OK: return "ok";
    case ARGSPLAT_ERR_NULL_ARGUMENT: return "null argument";
    case ARGSPLAT_ERR_INVALID_PARAMETER: return "invalid parameter";
    case ARGSPLAT_ERR_NUMERICAL_DEGENERACY: return "numerical degeneracy";
    case ARGSPLAT_ERR_DEGENERATE_MERGE: return "degenerate merge";
    case ARGSPLAT_ERR_INSUFFICIENT_POPULATION: return "insufficient population";
    case ARGSPLAT_ERR_INVALID_TARGET: return "invalid target";
    case ARGSPLAT_ERR_INCONSISTENT_SEQUENCE: return "inconsistent sequence";
    case ARGSPLAT_ERR_NOT_FULLY_SIMPLIFIED: return "not fully simplified";
    case ARGSPLAT_ERR_INCONSISTENCY: return "inconsistency";
    case ARGSPLAT_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case ARGSPLAT_ERR_IMAGE_TOO_SMALL: return "image too small";
    case ARGSPLAT_ERR_IO: return "i/o error";
    case ARGSPLAT_ERR_FORMAT: return "format error";
    case ARGSPLAT_ERR_BAD_MAGIC: return "bad magic";
    case ARGSPLAT_ERR_BAD_VERSION: return "unsupported version";
    case ARGSPLAT_ERR_TRUNCATED: return "truncated data";
    case ARGSPLAT_ERR_UNSUPPORTED: return "unsupported variant";
    case ARGSPLAT_ERR_OUT_OF_RANGE: return "out of range";
    case ARGSPLAT_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char *
argsplat_version(void) {
    return "0.1.0";
}

// --- sets -------------------------------------------------------------------

argsplat_status
argsplat_set_load_ply(const char *path, argsplat_set **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::loadPly(path)); });
}

argsplat_status
argsplat_set_save_ply(const argsplat_set *set, const char *path) {
    ARGSPLAT_REQUIRE(set, path);
    return guarded([&] { argsplat::io::savePly(set->value, path); });
}

argsplat_status
argsplat_set_load(const char *path, argsplat_set **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodeSet(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_set_save(const argsplat_set *set, const char *path) {
    ARGSPLAT_REQUIRE(set, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodeSet(set->value)); });
}

argsplat_status
argsplat_set_synthesize(uint64_t seed, uint32_t count, uint32_t clusters, argsplat_set **out) {
    ARGSPLAT_REQUIRE(out);
    return guarded([&] {
        argsplat::SynthOptions opts;
        opts.count    = count;
        opts.clusters = clusters;
        emit(out, argsplat::synthesizeObject(seed, opts));
    });
}

argsplat_status
argsplat_set_create(argsplat_set **out) {
    ARGSPLAT_REQUIRE(out);
    return guarded([&] { emit(out, argsplat::GaussianSet{}); });
}

argsplat_status
argsplat_set_add(argsplat_set *set, uint32_t id, const argsplat_gaussian *g) {
    ARGSPLAT_REQUIRE(set, g);
    return guarded([&] {
        argsplat::Gaussian3D value = fromC(*g);
        argsplat::validate(value);
        if (std::find(set->value.ids.begin(), set->value.ids.end(), id) != set->value.ids.end()) {
            argsplat::fail(argsplat::ErrorCode::InvalidParameter, "duplicate id " + std::to_string(id));
        }
        set->value.add(id, std::move(value));
    });
}

size_t
argsplat_set_size(const argsplat_set *set) {
    return set ? set->value.size() : 0;
}

argsplat_status
argsplat_set_get(const argsplat_set *set, size_t index, uint32_t *id, argsplat_gaussian *out) {
    ARGSPLAT_REQUIRE(set, out);
    if (index >= set->value.size()) {
        tLastError = "index out of range";
        return ARGSPLAT_ERR_OUT_OF_RANGE;
    }
    if (id) *id = set->value.ids[index];
    *out = toC(set->value.gaussians[index]);
    return ARGSPLAT_OK;
}

void
argsplat_set_free(argsplat_set *set) {
    delete set;
}

// --- simplification -----------------------------------------------------------

argsplat_status
argsplat_simplify(const argsplat_set *set, uint32_t target_count, const argsplat_simplify_options *options,
                  argsplat_sequence **sequence_out, argsplat_set **remaining_out) {
    ARGSPLAT_REQUIRE(set, sequence_out);
    return guarded([&] {
        argsplat::SimplifyConfig config;
        if (options) {
            config.beta          = options->beta;
            config.referenceScan = options->reference_scan != 0;
        }
        argsplat::SimplifyResult r = argsplat::simplify(set->value, target_count, config);
        auto seq = std::make_unique<argsplat_sequence>(argsplat_sequence{std::move(r.sequence)});
        if (remaining_out) {
            emit(remaining_out, std::move(r.remaining));
        }
        *sequence_out = seq.release();
    });
}

argsplat_status
argsplat_expand(const argsplat_set *roots, const argsplat_sequence *sequence, size_t steps, argsplat_set **out) {
    ARGSPLAT_REQUIRE(roots, sequence, out);
    return guarded([&] { emit(out, argsplat::expand(roots->value, sequence->value, steps)); });
}

argsplat_status
argsplat_sequence_load(const char *path, argsplat_sequence **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodeSequence(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_sequence_save(const argsplat_sequence *sequence, const char *path) {
    ARGSPLAT_REQUIRE(sequence, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodeSequence(sequence->value)); });
}

size_t
argsplat_sequence_size(const argsplat_sequence *sequence) {
    return sequence ? sequence->value.records.size() : 0;
}

uint32_t
argsplat_sequence_source_count(const argsplat_sequence *sequence) {
    return sequence ? sequence->value.sourceCount : 0;
}

void
argsplat_sequence_free(argsplat_sequence *sequence) {
    delete sequence;
}

// --- hierarchy ------------------------------------------------------------------

argsplat_status
argsplat_tree_build(const argsplat_sequence *sequence, const argsplat_set *roots, argsplat_tree **out) {
    ARGSPLAT_REQUIRE(sequence, out);
    return guarded([&] {
        emit(out, roots ? argsplat::buildTree(sequence->value, roots->value) : argsplat::buildTree(sequence->value));
    });
}

size_t
argsplat_tree_size(const argsplat_tree *tree) {
    return tree ? tree->value.size() : 0;
}

argsplat_status
argsplat_tree_stats_get(const argsplat_tree *tree, argsplat_tree_stats *out) {
    ARGSPLAT_REQUIRE(tree, out);
    return guarded([&] {
        const auto s = argsplat::stats(tree->value);
        *out = {s.leaves, s.internal, s.depth, s.maxLeafDepth, s.meanLeafDepth};
    });
}

argsplat_status
argsplat_tree_level_sizes(const argsplat_tree *tree, size_t *sizes, size_t capacity, size_t *needed) {
    ARGSPLAT_REQUIRE(tree, needed);
    std::vector<std::size_t> values;
    const argsplat_status st = guarded([&] { values = argsplat::stats(tree->value).levelSizes; });
    return st != ARGSPLAT_OK ? st : copySizes(values, sizes, capacity, needed);
}

argsplat_status
argsplat_tree_save_text(const argsplat_tree *tree, const char *path) {
    ARGSPLAT_REQUIRE(tree, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::treeToText(tree->value)); });
}

argsplat_status
argsplat_tree_save_stats_json(const argsplat_tree *tree, const char *path) {
    ARGSPLAT_REQUIRE(tree, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::statsToJson(argsplat::stats(tree->value))); });
}

argsplat_status
argsplat_tree_frontier(const argsplat_tree *tree, size_t level, argsplat_set **out) {
    ARGSPLAT_REQUIRE(tree, out);
    return guarded([&] { emit(out, argsplat::frontierSet(tree->value, level)); });
}

argsplat_status
argsplat_tree_nodes(const argsplat_tree *tree, argsplat_set **out) {
    ARGSPLAT_REQUIRE(tree, out);
    return guarded([&] { emit(out, argsplat::allNodes(tree->value)); });
}

void
argsplat_tree_free(argsplat_tree *tree) {
    delete tree;
}

// --- tokens ------------------------------------------------------------------------

argsplat_status
argsplat_quant_spec_fit(const argsplat_set *const *sets, size_t count, argsplat_quant_spec **out) {
    ARGSPLAT_REQUIRE(sets, out);
    return guarded([&] {
        std::vector<argsplat::GaussianSet> corpus;
        corpus.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!sets[i]) argsplat::fail(argsplat::ErrorCode::InvalidParameter, "null set in corpus");
            corpus.push_back(sets[i]->value);
        }
        emit(out, argsplat::fitQuantSpec(corpus));
    });
}

void
argsplat_quant_spec_free(argsplat_quant_spec *spec) {
    delete spec;
}

argsplat_status
argsplat_tokenize_tree(const argsplat_tree *tree, const argsplat_quant_spec *spec, argsplat_tokens **out) {
    ARGSPLAT_REQUIRE(tree, spec, out);
    return guarded([&] { emit(out, argsplat::tokenizeTree(tree->value, spec->value)); });
}

argsplat_status
argsplat_tokens_load(const char *path, argsplat_tokens **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodeTokens(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_tokens_save(const argsplat_tokens *tokens, const char *path) {
    ARGSPLAT_REQUIRE(tokens, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodeTokens(tokens->value)); });
}

size_t
argsplat_tokens_size(const argsplat_tokens *tokens) {
    return tokens ? tokens->value.tokens.size() : 0;
}

uint32_t
argsplat_tokens_depth(const argsplat_tokens *tokens) {
    return tokens ? tokens->value.depth : 0;
}

argsplat_status
argsplat_tokens_frontier(const argsplat_tokens *tokens, size_t level, argsplat_set **out) {
    ARGSPLAT_REQUIRE(tokens, out);
    return guarded([&] { emit(out, argsplat::tokenFrontier(tokens->value, level)); });
}

void
argsplat_tokens_free(argsplat_tokens *tokens) {
    delete tokens;
}

// --- masks ---------------------------------------------------------------------------

argsplat_status
argsplat_mask_build(argsplat_mask_variant variant, const argsplat_tokens *tokens, const argsplat_tree *tree,
                    argsplat_mask **out) {
    ARGSPLAT_REQUIRE(tokens, tree, out);
    return guarded([&] { emit(out, argsplat::buildMask(variantFromC(variant), tokens->value, tree->value)); });
}

argsplat_status
argsplat_mask_causal(size_t n, argsplat_mask **out) {
    ARGSPLAT_REQUIRE(out);
    return guarded([&] { emit(out, argsplat::causalMask(n)); });
}

argsplat_status
argsplat_mask_load(const char *path, argsplat_mask **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodeMask(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_mask_save(const argsplat_mask *mask, const char *path) {
    ARGSPLAT_REQUIRE(mask, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodeMask(mask->value)); });
}

argsplat_status
argsplat_mask_save_text(const argsplat_mask *mask, const char *path) {
    ARGSPLAT_REQUIRE(mask, path);
    return guarded([&] { argsplat::io::writeFile(path, mask->value.toText()); });
}

size_t
argsplat_mask_size(const argsplat_mask *mask) {
    return mask ? mask->value.size() : 0;
}

argsplat_status
argsplat_mask_allowed(const argsplat_mask *mask, size_t query, size_t key, int *allowed) {
    ARGSPLAT_REQUIRE(mask, allowed);
    if (query >= mask->value.size() || key >= mask->value.size()) {
        tLastError = "mask index out of range";
        return ARGSPLAT_ERR_OUT_OF_RANGE;
    }
    *allowed = mask->value.allowed(query, key) ? 1 : 0;
    return ARGSPLAT_OK;
}

void
argsplat_mask_free(argsplat_mask *mask) {
    delete mask;
}

argsplat_status
argsplat_decode_cost(const argsplat_tree *tree, argsplat_mask_variant variant, size_t *costs, size_t capacity,
                     size_t *needed) {
    ARGSPLAT_REQUIRE(tree, needed);
    std::vector<std::size_t> values;
    const argsplat_status st =
        guarded([&] { values = argsplat::decodeCost(tree->value, variantFromC(variant)); });
    return st != ARGSPLAT_OK ? st : copySizes(values, costs, capacity, needed);
}

// --- rendering ------------------------------------------------------------------------

argsplat_status
argsplat_orbit_cameras(const argsplat_set *set, size_t count, uint32_t width, uint32_t height, argsplat_camera *out) {
    ARGSPLAT_REQUIRE(set, out);
    return guarded([&] {
        const auto cams = argsplat::orbitCameras(set->value, count, width, height);
        for (std::size_t i = 0; i < cams.size(); ++i) out[i] = toC(cams[i]);
    });
}

argsplat_status
argsplat_render(const argsplat_set *set, const argsplat_camera *camera, unsigned workers, argsplat_image **out) {
    ARGSPLAT_REQUIRE(set, camera, out);
    return guarded([&] { emit(out, argsplat::render(set->value, fromC(*camera), workers)); });
}

argsplat_status
argsplat_image_load_raw(const char *path, argsplat_image **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodeRaw(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_image_save_raw(const argsplat_image *image, const char *path) {
    ARGSPLAT_REQUIRE(image, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodeRaw(image->value)); });
}

argsplat_status
argsplat_image_load_ppm(const char *path, argsplat_image **out) {
    ARGSPLAT_REQUIRE(path, out);
    return guarded([&] { emit(out, argsplat::io::decodePpm(argsplat::io::readFile(path))); });
}

argsplat_status
argsplat_image_save_ppm(const argsplat_image *image, const char *path) {
    ARGSPLAT_REQUIRE(image, path);
    return guarded([&] { argsplat::io::writeFile(path, argsplat::io::encodePpm(image->value)); });
}

argsplat_status
argsplat_image_size(const argsplat_image *image, uint32_t *width, uint32_t *height) {
    ARGSPLAT_REQUIRE(image, width, height);
    *width  = image->value.width;
    *height = image->value.height;
    return ARGSPLAT_OK;
}

void
argsplat_image_free(argsplat_image *image) {
    delete image;
}

argsplat_status
argsplat_psnr(const argsplat_image *a, const argsplat_image *b, double *out) {
    ARGSPLAT_REQUIRE(a, b, out);
    return guarded([&] { *out = argsplat::psnr(a->value, b->value); });
}

argsplat_status
argsplat_ssim(const argsplat_image *a, const argsplat_image *b, double *out) {
    ARGSPLAT_REQUIRE(a, b, out);
    return guarded([&] { *out = argsplat::ssim(a->value, b->value); });
}

// --- verification -------------------------------------------------------------------------

argsplat_status
argsplat_verify(uint64_t seed, const char *json_path, size_t *failures) {
    ARGSPLAT_REQUIRE(failures);
    return guarded([&] {
        const argsplat::VerifyReport report = argsplat::runVerification(seed);
        if (json_path) {
            argsplat::io::writeFile(json_path, report.toJson());
        }
        *failures = report.failures();
    });
}

} // extern "C"
