// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "argsplat/argsplat.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace {

argsplat_gaussian
unitGaussian(double x) {
    argsplat_gaussian g{};
    g.center[0] = x;
    g.opacity   = 0.5;
    for (double &s : g.scale) s = 0.2;
    g.rotation[0] = 1.0;
    return g;
}

std::string
tempFile(const char *name) {
    return (std::filesystem::temp_directory_path() / (std::string("argsplat_capi_") + name)).string();
}

} // namespace

TEST_CASE("status strings and version") {
    CHECK(std::string(argsplat_version()) == "0.1.0");
    CHECK(std::string(argsplat_status_string(ARGSPLAT_OK)) == "ok");
    CHECK(std::string(argsplat_status_string(ARGSPLAT_ERR_BAD_MAGIC)) == "bad magic");
    CHECK(std::string(argsplat_status_string(static_cast<argsplat_status>(1234))) == "unknown status");
}

TEST_CASE("null arguments are reported, not dereferenced") {
    CHECK(argsplat_set_create(nullptr) == ARGSPLAT_ERR_NULL_ARGUMENT);
    CHECK(argsplat_simplify(nullptr, 1, nullptr, nullptr, nullptr) == ARGSPLAT_ERR_NULL_ARGUMENT);
    CHECK(argsplat_set_load(nullptr, nullptr) == ARGSPLAT_ERR_NULL_ARGUMENT);
    CHECK(argsplat_psnr(nullptr, nullptr, nullptr) == ARGSPLAT_ERR_NULL_ARGUMENT);
    CHECK(argsplat_set_size(nullptr) == 0);
    argsplat_set_free(nullptr);
    argsplat_tree_free(nullptr);
    CHECK(std::strlen(argsplat_last_error()) > 0);
}

TEST_CASE("sets reject invalid gaussians and duplicate ids") {
    argsplat_set *set = nullptr;
    REQUIRE(argsplat_set_create(&set) == ARGSPLAT_OK);
    argsplat_gaussian g = unitGaussian(0.0);
    CHECK(argsplat_set_add(set, 3, &g) == ARGSPLAT_OK);
    CHECK(argsplat_set_add(set, 3, &g) == ARGSPLAT_ERR_INVALID_PARAMETER);
    g.scale[1] = 0.0;
    CHECK(argsplat_set_add(set, 4, &g) == ARGSPLAT_ERR_INVALID_PARAMETER);
    CHECK(std::string(argsplat_last_error()).find("scale") != std::string::npos);
    CHECK(argsplat_set_size(set) == 1);

    std::uint32_t id = 0;
    argsplat_gaussian back{};
    CHECK(argsplat_set_get(set, 0, &id, &back) == ARGSPLAT_OK);
    CHECK(id == 3);
    CHECK(back.scale[0] == 0.2);
    CHECK(argsplat_set_get(set, 1, &id, &back) == ARGSPLAT_ERR_OUT_OF_RANGE);
    argsplat_set_free(set);
}

TEST_CASE("simplify, expand and hierarchy through handles") {
    argsplat_set *set = nullptr;
    REQUIRE(argsplat_set_synthesize(11, 100, 4, &set) == ARGSPLAT_OK);
    argsplat_sequence *seq = nullptr;
    argsplat_set *roots    = nullptr;
    REQUIRE(argsplat_simplify(set, 1, nullptr, &seq, &roots) == ARGSPLAT_OK);
    CHECK(argsplat_sequence_size(seq) == 99);
    CHECK(argsplat_sequence_source_count(seq) == 100);
    CHECK(argsplat_set_size(roots) == 1);

    argsplat_set *full = nullptr;
    REQUIRE(argsplat_expand(roots, seq, 99, &full) == ARGSPLAT_OK);
    REQUIRE(argsplat_set_size(full) == 100);
    // Expansion returns the input, id for id and bit for bit.
    for (std::size_t i = 0; i < 100; ++i) {
        std::uint32_t a = 0, b = 0;
        argsplat_gaussian ga{}, gb{};
        argsplat_set_get(set, i, &a, &ga);
        argsplat_set_get(full, i, &b, &gb);
        CHECK(a == b);
        CHECK(std::memcmp(&ga, &gb, sizeof ga) == 0);
    }
    argsplat_set *tooFar = nullptr;
    CHECK(argsplat_expand(roots, seq, 100, &tooFar) == ARGSPLAT_ERR_INVALID_PARAMETER);
    CHECK(tooFar == nullptr);

    argsplat_simplify_options opts{0.5, 1};
    argsplat_sequence *seq2 = nullptr;
    argsplat_set *rest2     = nullptr;
    CHECK(argsplat_simplify(set, 0, &opts, &seq2, &rest2) == ARGSPLAT_ERR_INVALID_TARGET);
    CHECK(argsplat_simplify(set, 50, &opts, &seq2, &rest2) == ARGSPLAT_OK);
    CHECK(argsplat_set_size(rest2) == 50);
    argsplat_sequence_free(seq2);
    argsplat_set_free(rest2);

    argsplat_tree *tree = nullptr;
    REQUIRE(argsplat_tree_build(seq, nullptr, &tree) == ARGSPLAT_OK);
    CHECK(argsplat_tree_size(tree) == 199);
    argsplat_tree_stats stats{};
    REQUIRE(argsplat_tree_stats_get(tree, &stats) == ARGSPLAT_OK);
    CHECK(stats.leaves == 100);
    CHECK(stats.internal == 99);

    // Size-query protocol.
    std::size_t needed = 0;
    CHECK(argsplat_tree_level_sizes(tree, nullptr, 0, &needed) == ARGSPLAT_OK);
    CHECK(needed == stats.depth + 1);
    std::vector<std::size_t> sizes(needed);
    if (needed > 1) {
        CHECK(argsplat_tree_level_sizes(tree, sizes.data(), needed - 1, &needed) == ARGSPLAT_ERR_OUT_OF_RANGE);
    }
    REQUIRE(argsplat_tree_level_sizes(tree, sizes.data(), sizes.size(), &needed) == ARGSPLAT_OK);
    CHECK(sizes.front() == 1);
    CHECK(sizes.back() == 100);

    argsplat_set *front = nullptr;
    REQUIRE(argsplat_tree_frontier(tree, stats.depth, &front) == ARGSPLAT_OK);
    CHECK(argsplat_set_size(front) == 100);
    argsplat_set_free(front);

    argsplat_set *nodes = nullptr;
    REQUIRE(argsplat_tree_nodes(tree, &nodes) == ARGSPLAT_OK);
    argsplat_quant_spec *spec = nullptr;
    const argsplat_set *corpus[] = {nodes};
    REQUIRE(argsplat_quant_spec_fit(corpus, 1, &spec) == ARGSPLAT_OK);
    argsplat_tokens *tokens = nullptr;
    REQUIRE(argsplat_tokenize_tree(tree, spec, &tokens) == ARGSPLAT_OK);
    CHECK(argsplat_tokens_size(tokens) == 199);
    CHECK(argsplat_tokens_depth(tokens) == stats.depth);

    const std::string tokPath = tempFile("tokens.argt");
    REQUIRE(argsplat_tokens_save(tokens, tokPath.c_str()) == ARGSPLAT_OK);
    argsplat_tokens *tokBack = nullptr;
    REQUIRE(argsplat_tokens_load(tokPath.c_str(), &tokBack) == ARGSPLAT_OK);
    CHECK(argsplat_tokens_size(tokBack) == 199);

    argsplat_mask *mask = nullptr;
    REQUIRE(argsplat_mask_build(ARGSPLAT_MASK_TREE, tokBack, tree, &mask) == ARGSPLAT_OK);
    CHECK(argsplat_mask_size(mask) == 199);
    int allowed = -1;
    CHECK(argsplat_mask_allowed(mask, 0, 0, &allowed) == ARGSPLAT_OK);
    CHECK(allowed == 1);
    CHECK(argsplat_mask_allowed(mask, 0, 1, &allowed) == ARGSPLAT_OK);
    CHECK(allowed == 0);
    CHECK(argsplat_mask_allowed(mask, 199, 0, &allowed) == ARGSPLAT_ERR_OUT_OF_RANGE);

    CHECK(argsplat_decode_cost(tree, ARGSPLAT_MASK_LEVELWISE, nullptr, 0, &needed) == ARGSPLAT_OK);
    CHECK(needed == stats.depth + 1);

    std::filesystem::remove(tokPath);
    argsplat_mask_free(mask);
    argsplat_tokens_free(tokBack);
    argsplat_tokens_free(tokens);
    argsplat_quant_spec_free(spec);
    argsplat_set_free(nodes);
    argsplat_tree_free(tree);
    argsplat_set_free(full);
    argsplat_set_free(roots);
    argsplat_sequence_free(seq);
    argsplat_set_free(set);
}

TEST_CASE("file errors carry their own status") {
    const std::string path = tempFile("garbage.args");
    {
        std::FILE *f = std::fopen(path.c_str(), "wb");
        REQUIRE(f);
        std::fputs("NOPE\x01\x00", f);
        std::fclose(f);
    }
    argsplat_sequence *seq = nullptr;
    CHECK(argsplat_sequence_load(path.c_str(), &seq) == ARGSPLAT_ERR_BAD_MAGIC);
    CHECK(seq == nullptr);
    CHECK(argsplat_sequence_load("/nonexistent/argsplat.args", &seq) == ARGSPLAT_ERR_IO);
    argsplat_set *set = nullptr;
    CHECK(argsplat_set_load_ply(path.c_str(), &set) == ARGSPLAT_ERR_BAD_MAGIC);
    std::filesystem::remove(path);
}

TEST_CASE("render and metrics through handles") {
    argsplat_set *set = nullptr;
    REQUIRE(argsplat_set_synthesize(2, 50, 3, &set) == ARGSPLAT_OK);
    argsplat_camera cams[2];
    REQUIRE(argsplat_orbit_cameras(set, 2, 32, 24, cams) == ARGSPLAT_OK);
    argsplat_image *a = nullptr, *b = nullptr;
    REQUIRE(argsplat_render(set, &cams[0], 1, &a) == ARGSPLAT_OK);
    REQUIRE(argsplat_render(set, &cams[0], 4, &b) == ARGSPLAT_OK);
    std::uint32_t w = 0, h = 0;
    CHECK(argsplat_image_size(a, &w, &h) == ARGSPLAT_OK);
    CHECK(w == 32);
    CHECK(h == 24);
    double psnr = 0, ssim = 0;
    CHECK(argsplat_psnr(a, b, &psnr) == ARGSPLAT_OK);
    CHECK(psnr == 100.0);
    CHECK(argsplat_ssim(a, b, &ssim) == ARGSPLAT_OK);
    CHECK(ssim == 1.0);

    const std::string raw = tempFile("view.argf");
    REQUIRE(argsplat_image_save_raw(a, raw.c_str()) == ARGSPLAT_OK);
    argsplat_image *c = nullptr;
    REQUIRE(argsplat_image_load_raw(raw.c_str(), &c) == ARGSPLAT_OK);
    CHECK(argsplat_psnr(a, c, &psnr) == ARGSPLAT_OK);
    CHECK(psnr == 100.0);
    std::filesystem::remove(raw);

    argsplat_camera bad = cams[0];
    bad.fx = -1.0;
    argsplat_image *d = nullptr;
    CHECK(argsplat_render(set, &bad, 1, &d) == ARGSPLAT_ERR_INVALID_PARAMETER);

    argsplat_image_free(a);
    argsplat_image_free(b);
    argsplat_image_free(c);
    argsplat_set_free(set);
}

TEST_CASE("verify runs clean") {
    const std::string path = tempFile("verify.json");
    std::size_t failures = 99;
    CHECK(argsplat_verify(1, path.c_str(), &failures) == ARGSPLAT_OK);
    CHECK(failures == 0);
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
}
