// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
// argsplat command line driver. Every stage reads and writes files under --out
// so that stages compose, and `pipeline` is literally the stages in order.

#include "argsplat/argsplat.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
    kExitOk           = 0,
    kExitInternal     = 1,
    kExitUsage        = 2,
    kExitFormat       = 3,
    kExitNumerical    = 4,
    kExitInvalidInput = 5,
    kExitConsistency  = 6,
    kExitVerifyFailed = 7,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
    ApiError(argsplat_status s, const std::string &what)
        : std::runtime_error(what)
        , status(s) {}
    argsplat_status status;
};

int
exitCodeFor(argsplat_status status) {
    switch (status) {
    case ARGSPLAT_OK: return kExitOk;
    case ARGSPLAT_ERR_IO:
    case ARGSPLAT_ERR_FORMAT:
    case ARGSPLAT_ERR_BAD_MAGIC:
    case ARGSPLAT_ERR_BAD_VERSION:
    case ARGSPLAT_ERR_TRUNCATED:
    case ARGSPLAT_ERR_UNSUPPORTED: return kExitFormat;
    case ARGSPLAT_ERR_NUMERICAL_DEGENERACY:
    case ARGSPLAT_ERR_DEGENERATE_MERGE: return kExitNumerical;
    case ARGSPLAT_ERR_NULL_ARGUMENT:
    case ARGSPLAT_ERR_INVALID_PARAMETER:
    case ARGSPLAT_ERR_INSUFFICIENT_POPULATION:
    case ARGSPLAT_ERR_INVALID_TARGET:
    case ARGSPLAT_ERR_SHAPE_MISMATCH:
    case ARGSPLAT_ERR_IMAGE_TOO_SMALL:
    case ARGSPLAT_ERR_OUT_OF_RANGE: return kExitInvalidInput;
    case ARGSPLAT_ERR_INCONSISTENT_SEQUENCE:
    case ARGSPLAT_ERR_NOT_FULLY_SIMPLIFIED:
    case ARGSPLAT_ERR_INCONSISTENCY: return kExitConsistency;
    case ARGSPLAT_ERR_INTERNAL: return kExitInternal;
    }
    return kExitInternal;
}

void
check(argsplat_status status, const std::string &context) {
    if (status != ARGSPLAT_OK) {
        std::string msg = context + ": " + argsplat_status_string(status);
        const std::string detail = argsplat_last_error();
        if (!detail.empty()) msg += " (" + detail + ")";
        throw ApiError(status, msg);
    }
}

template <typename T, void (*Free)(T *)>
struct Deleter {
    void operator()(T *p) const { Free(p); }
};

using SetPtr      = std::unique_ptr<argsplat_set, Deleter<argsplat_set, argsplat_set_free>>;
using SequencePtr = std::unique_ptr<argsplat_sequence, Deleter<argsplat_sequence, argsplat_sequence_free>>;
using TreePtr     = std::unique_ptr<argsplat_tree, Deleter<argsplat_tree, argsplat_tree_free>>;
using SpecPtr     = std::unique_ptr<argsplat_quant_spec, Deleter<argsplat_quant_spec, argsplat_quant_spec_free>>;
using TokensPtr   = std::unique_ptr<argsplat_tokens, Deleter<argsplat_tokens, argsplat_tokens_free>>;
using MaskPtr     = std::unique_ptr<argsplat_mask, Deleter<argsplat_mask, argsplat_mask_free>>;
using ImagePtr    = std::unique_ptr<argsplat_image, Deleter<argsplat_image, argsplat_image_free>>;

// --- option bundles ------------------------------------------------------------

struct Common {
    std::string out;
    std::uint64_t seed = 0;
    std::string config;
};

struct IngestOptions {
    std::string input;
    std::uint32_t synthetic = 0;
    std::uint32_t clusters  = 8;
};

struct SimplifyOptions {
    std::string input;
    std::uint32_t target = 1;
    double beta          = 0.0;
    bool referenceScan   = false;
};

struct ExpandOptions {
    std::string roots;
    std::string sequence;
    long long steps = -1;
};

struct HierarchyOptions {
    std::string sequence;
    std::string roots;
};

struct TokenizeOptions {
    std::string sequence;
    std::string roots;
    std::string specFrom = "corpus";
    std::vector<std::string> corpus;
};

struct MasksOptions {
    std::string tokens;
    std::string sequence;
    std::string roots;
    std::string variant = "all";
};

struct RenderOptions {
    std::string input;
    std::uint32_t views = 8;
    std::string size    = "64x64";
};

struct MetricsOptions {
    std::vector<std::string> inputs;
    std::vector<double> levels{100, 75, 50, 25, 10};
    std::uint32_t views = 8;
    std::string size    = "64x64";
    double beta         = 0.0;
};

// --- helpers -------------------------------------------------------------------

std::string
outPath(const Common &c, const std::string &name) {
    return (fs::path(c.out) / name).string();
}

std::string
orDefault(const std::string &value, const Common &c, const std::string &name) {
    return value.empty() ? outPath(c, name) : value;
}

void
ensureDir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ApiError(ARGSPLAT_ERR_IO, "cannot create directory " + dir.string() + ": " + ec.message());
}

void
writeText(const std::string &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw ApiError(ARGSPLAT_ERR_IO, "cannot write " + path);
}

unsigned
workerCount() {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("ARGS_THREADS"); env && *env) {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (*end != '\0' || cap < 1) throw UsageError("ARGS_THREADS must be a positive integer");
        workers = std::min<unsigned>(workers, static_cast<unsigned>(cap));
    }
    return workers;
}

std::pair<std::uint32_t, std::uint32_t>
parseSize(const std::string &text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw UsageError("--size expects WxH, got '" + text + "'");
    try {
        std::size_t used = 0;
        const unsigned long w = std::stoul(text.substr(0, x), &used);
        if (used != x) throw std::invalid_argument(text);
        const std::string hs  = text.substr(x + 1);
        const unsigned long h = std::stoul(hs, &used);
        if (used != hs.size() || w == 0 || h == 0 || w > 16384 || h > 16384) throw std::invalid_argument(text);
        return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
    } catch (const std::logic_error &) {
        throw UsageError("--size expects WxH with positive integers, got '" + text + "'");
    }
}

SetPtr
loadSet(const std::string &path) {
    argsplat_set *raw = nullptr;
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".ply") {
        check(argsplat_set_load_ply(path.c_str(), &raw), "loading " + path);
    } else {
        check(argsplat_set_load(path.c_str(), &raw), "loading " + path);
    }
    return SetPtr(raw);
}

SequencePtr
loadSequence(const std::string &path) {
    argsplat_sequence *raw = nullptr;
    check(argsplat_sequence_load(path.c_str(), &raw), "loading " + path);
    return SequencePtr(raw);
}

TreePtr
loadTree(const std::string &sequencePath, const std::string &rootsPath) {
    SequencePtr seq = loadSequence(sequencePath);
    SetPtr roots;
    if (fs::exists(rootsPath)) roots = loadSet(rootsPath);
    argsplat_tree *raw = nullptr;
    check(argsplat_tree_build(seq.get(), roots.get(), &raw), "building hierarchy");
    return TreePtr(raw);
}

std::string
formatDouble(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string
levelLabel(double level) {
    std::ostringstream os;
    os << level;
    return os.str();
}

struct VariantName {
    const char *name;
    argsplat_mask_variant variant;
};

constexpr VariantName kVariants[] = {
    {"causal", ARGSPLAT_MASK_CAUSAL},
    {"levelwise", ARGSPLAT_MASK_LEVELWISE},
    {"tree", ARGSPLAT_MASK_TREE},
    {"tree-all-internal", ARGSPLAT_MASK_TREE_ALL_INTERNAL},
};

std::vector<argsplat_camera>
camerasFor(const argsplat_set *set, std::uint32_t views, std::uint32_t w, std::uint32_t h) {
    std::vector<argsplat_camera> cams(views);
    if (views > 0) check(argsplat_orbit_cameras(set, views, w, h, cams.data()), "placing cameras");
    return cams;
}

ImagePtr
renderView(const argsplat_set *set, const argsplat_camera &cam, unsigned workers) {
    argsplat_image *raw = nullptr;
    check(argsplat_render(set, &cam, workers, &raw), "rendering");
    return ImagePtr(raw);
}

// --- stages ----------------------------------------------------------------------

void
runIngest(const Common &c, const IngestOptions &o) {
    if (o.input.empty() == (o.synthetic == 0)) {
        throw UsageError("ingest needs exactly one of --input or --synthetic");
    }
    SetPtr set;
    if (!o.input.empty()) {
        set = loadSet(o.input);
    } else {
        argsplat_set *raw = nullptr;
        check(argsplat_set_synthesize(c.seed, o.synthetic, o.clusters, &raw), "synthesizing");
        set.reset(raw);
    }
    ensureDir(c.out);
    check(argsplat_set_save(set.get(), outPath(c, "set.argx").c_str()), "writing set");
    std::cout << "ingest: " << argsplat_set_size(set.get()) << " gaussians -> " << outPath(c, "set.argx") << "\n";
}

void
runSimplify(const Common &c, const SimplifyOptions &o) {
    SetPtr set = loadSet(orDefault(o.input, c, "set.argx"));
    argsplat_simplify_options opts{o.beta, o.referenceScan ? 1 : 0};
    argsplat_sequence *seqRaw = nullptr;
    argsplat_set *remRaw      = nullptr;
    check(argsplat_simplify(set.get(), o.target, &opts, &seqRaw, &remRaw), "simplifying");
    SequencePtr seq(seqRaw);
    SetPtr remaining(remRaw);
    ensureDir(c.out);
    check(argsplat_sequence_save(seq.get(), outPath(c, "sequence.args").c_str()), "writing sequence");
    check(argsplat_set_save(remaining.get(), outPath(c, "remaining.argx").c_str()), "writing remaining set");
    std::cout << "simplify: " << argsplat_sequence_size(seq.get()) << " merges, "
              << argsplat_set_size(remaining.get()) << " remaining\n";
}

void
runExpand(const Common &c, const ExpandOptions &o) {
    SetPtr roots    = loadSet(orDefault(o.roots, c, "remaining.argx"));
    SequencePtr seq = loadSequence(orDefault(o.sequence, c, "sequence.args"));
    const std::size_t steps = o.steps < 0 ? argsplat_sequence_size(seq.get()) : static_cast<std::size_t>(o.steps);
    argsplat_set *raw = nullptr;
    check(argsplat_expand(roots.get(), seq.get(), steps, &raw), "expanding");
    SetPtr expanded(raw);
    ensureDir(c.out);
    check(argsplat_set_save(expanded.get(), outPath(c, "expanded.argx").c_str()), "writing expanded set");
    std::cout << "expand: " << steps << " steps, " << argsplat_set_size(expanded.get()) << " gaussians\n";
}

void
runHierarchy(const Common &c, const HierarchyOptions &o) {
    TreePtr tree = loadTree(orDefault(o.sequence, c, "sequence.args"), orDefault(o.roots, c, "remaining.argx"));
    ensureDir(c.out);
    check(argsplat_tree_save_text(tree.get(), outPath(c, "tree.txt").c_str()), "writing tree");
    check(argsplat_tree_save_stats_json(tree.get(), outPath(c, "tree_stats.json").c_str()), "writing stats");
    argsplat_tree_stats st{};
    check(argsplat_tree_stats_get(tree.get(), &st), "tree stats");
    std::cout << "hierarchy: " << argsplat_tree_size(tree.get()) << " nodes, depth " << st.depth << "\n";
}

void
runTokenize(const Common &c, const TokenizeOptions &o) {
    if (o.specFrom != "corpus" && o.specFrom != "object") {
        throw UsageError("--spec-from must be 'corpus' or 'object'");
    }
    if (o.specFrom == "object" && !o.corpus.empty()) {
        throw UsageError("--corpus only applies with --spec-from corpus");
    }
    TreePtr tree = loadTree(orDefault(o.sequence, c, "sequence.args"), orDefault(o.roots, c, "remaining.argx"));
    argsplat_set *nodesRaw = nullptr;
    check(argsplat_tree_nodes(tree.get(), &nodesRaw), "collecting nodes");
    std::vector<SetPtr> owned;
    owned.emplace_back(nodesRaw);
    for (const std::string &path : o.corpus) owned.push_back(loadSet(path));
    std::vector<const argsplat_set *> sets;
    for (const SetPtr &s : owned) sets.push_back(s.get());

    argsplat_quant_spec *specRaw = nullptr;
    check(argsplat_quant_spec_fit(sets.data(), sets.size(), &specRaw), "fitting quantization ranges");
    SpecPtr spec(specRaw);
    argsplat_tokens *tokRaw = nullptr;
    check(argsplat_tokenize_tree(tree.get(), spec.get(), &tokRaw), "tokenizing");
    TokensPtr tokens(tokRaw);
    ensureDir(c.out);
    check(argsplat_tokens_save(tokens.get(), outPath(c, "tokens.argt").c_str()), "writing tokens");
    std::cout << "tokenize: " << argsplat_tokens_size(tokens.get()) << " tokens over "
              << argsplat_tokens_depth(tokens.get()) + 1 << " levels\n";
}

void
runMasks(const Common &c, const MasksOptions &o) {
    std::vector<VariantName> chosen;
    for (const VariantName &v : kVariants) {
        if (o.variant == "all" || o.variant == v.name) chosen.push_back(v);
    }
    if (chosen.empty()) throw UsageError("unknown --variant '" + o.variant + "'");

    argsplat_tokens *tokRaw = nullptr;
    check(argsplat_tokens_load(orDefault(o.tokens, c, "tokens.argt").c_str(), &tokRaw), "loading tokens");
    TokensPtr tokens(tokRaw);

    // The causal mask alone can be built without the tree; decode costs are
    // written whenever the tree is available.
    const std::string seqPath   = orDefault(o.sequence, c, "sequence.args");
    const std::string rootsPath = orDefault(o.roots, c, "remaining.argx");
    TreePtr tree;
    if (o.variant != "causal" || (std::filesystem::exists(seqPath) && std::filesystem::exists(rootsPath))) {
        tree = loadTree(seqPath, rootsPath);
    }
    ensureDir(c.out);

    std::vector<std::vector<std::size_t>> costs;
    for (const VariantName &v : chosen) {
        argsplat_mask *raw = nullptr;
        if (tree) {
            check(argsplat_mask_build(v.variant, tokens.get(), tree.get(), &raw), std::string("building ") + v.name);
        } else {
            check(argsplat_mask_causal(argsplat_tokens_size(tokens.get()), &raw), "building causal");
        }
        MaskPtr mask(raw);
        const std::string stem = std::string("mask_") + v.name;
        check(argsplat_mask_save(mask.get(), outPath(c, stem + ".argm").c_str()), "writing mask");
        check(argsplat_mask_save_text(mask.get(), outPath(c, stem + ".txt").c_str()), "writing mask grid");
        if (tree) {
            std::size_t needed = 0;
            check(argsplat_decode_cost(tree.get(), v.variant, nullptr, 0, &needed), "decode cost");
            std::vector<std::size_t> cost(needed);
            check(argsplat_decode_cost(tree.get(), v.variant, cost.data(), cost.size(), &needed), "decode cost");
            costs.push_back(std::move(cost));
        }
        std::cout << "masks: " << v.name << " " << argsplat_mask_size(mask.get()) << "x"
                  << argsplat_mask_size(mask.get()) << "\n";
    }

    if (tree) {
        std::ostringstream csv;
        csv << "level";
        for (const VariantName &v : chosen) csv << "," << v.name;
        csv << "\n";
        for (std::size_t level = 0; level < costs.front().size(); ++level) {
            csv << level;
            for (const auto &cost : costs) csv << "," << cost[level];
            csv << "\n";
        }
        const std::string name = o.variant == "all" ? "decode_cost.csv" : "decode_cost_" + o.variant + ".csv";
        writeText(outPath(c, name), csv.str());
    }
}

void
runRender(const Common &c, const RenderOptions &o) {
    const auto [w, h] = parseSize(o.size);
    if (o.views == 0) throw UsageError("--views must be positive");
    SetPtr set = loadSet(orDefault(o.input, c, "set.argx"));
    const unsigned workers = workerCount();
    const auto cams        = camerasFor(set.get(), o.views, w, h);
    const fs::path dir     = fs::path(c.out) / "render";
    ensureDir(dir);
    for (std::size_t v = 0; v < cams.size(); ++v) {
        ImagePtr img = renderView(set.get(), cams[v], workers);
        std::ostringstream stem;
        stem << "view_" << std::setw(2) << std::setfill('0') << v;
        check(argsplat_image_save_ppm(img.get(), (dir / (stem.str() + ".ppm")).string().c_str()), "writing ppm");
        check(argsplat_image_save_raw(img.get(), (dir / (stem.str() + ".argf")).string().c_str()), "writing image");
    }
    std::cout << "render: " << cams.size() << " views at " << w << "x" << h << "\n";
}

void
runMetrics(const Common &c, const MetricsOptions &o) {
    const auto [w, h] = parseSize(o.size);
    if (o.views == 0) throw UsageError("--views must be positive");
    if (o.levels.empty()) throw UsageError("--levels must list at least one percentage");
    for (double level : o.levels) {
        if (!(level > 0.0 && level <= 100.0)) throw UsageError("--levels entries must lie in (0, 100]");
    }
    std::vector<std::string> inputs = o.inputs;
    if (inputs.empty()) inputs.push_back(outPath(c, "set.argx"));

    const unsigned workers = workerCount();
    const fs::path previews = fs::path(c.out) / "previews";
    ensureDir(previews);

    std::ostringstream csv;
    csv << "object,level,count,psnr,ssim\n";
    std::map<double, std::pair<double, std::size_t>, std::greater<>> trend;
    for (const std::string &input : inputs) {
        SetPtr set           = loadSet(input);
        const std::string id = fs::path(input).stem().string();
        const std::size_t n  = argsplat_set_size(set.get());
        const auto cams      = camerasFor(set.get(), o.views, w, h);
        std::vector<ImagePtr> reference;
        for (const auto &cam : cams) reference.push_back(renderView(set.get(), cam, workers));

        for (double level : o.levels) {
            const auto target = static_cast<std::uint32_t>(
                std::max<double>(1.0, std::llround(static_cast<double>(n) * level / 100.0)));
            argsplat_simplify_options opts{o.beta, 0};
            argsplat_sequence *seqRaw = nullptr;
            argsplat_set *remRaw      = nullptr;
            check(argsplat_simplify(set.get(), target, &opts, &seqRaw, &remRaw), "simplifying " + id);
            SequencePtr seq(seqRaw);
            SetPtr reduced(remRaw);

            double psnrSum = 0.0, ssimSum = 0.0;
            for (std::size_t v = 0; v < cams.size(); ++v) {
                ImagePtr img = renderView(reduced.get(), cams[v], workers);
                double p = 0.0, s = 0.0;
                check(argsplat_psnr(reference[v].get(), img.get(), &p), "psnr");
                check(argsplat_ssim(reference[v].get(), img.get(), &s), "ssim");
                psnrSum += p;
                ssimSum += s;
                if (v == 0) {
                    const std::string name = id + "_level_" + levelLabel(level) + ".ppm";
                    check(argsplat_image_save_ppm(img.get(), (previews / name).string().c_str()), "writing preview");
                }
            }
            const double meanPsnr = psnrSum / static_cast<double>(cams.size());
            const double meanSsim = ssimSum / static_cast<double>(cams.size());
            csv << id << "," << levelLabel(level) << "," << argsplat_set_size(reduced.get()) << ","
                << formatDouble(meanPsnr) << "," << formatDouble(meanSsim) << "\n";
            trend[level].first += meanPsnr;
            trend[level].second += 1;
        }
    }
    ensureDir(c.out);
    writeText(outPath(c, "metrics.csv"), csv.str());
    std::cout << "metrics: " << inputs.size() << " object(s)";
    for (const auto &[level, acc] : trend) {
        std::cout << "  " << levelLabel(level) << "%=" << std::fixed << std::setprecision(2)
                  << acc.first / static_cast<double>(acc.second) << "dB";
    }
    std::cout.unsetf(std::ios::fixed);
    std::cout << "\n";
}

int
runVerify(const Common &c) {
    ensureDir(c.out);
    std::size_t failures = 0;
    check(argsplat_verify(c.seed, outPath(c, "verify.json").c_str(), &failures), "verification");
    std::cout << "verify: " << failures << " failing suite(s), report " << outPath(c, "verify.json") << "\n";
    return failures == 0 ? kExitOk : kExitVerifyFailed;
}

// --- config file ---------------------------------------------------------------------

std::map<std::string, std::string>
readConfig(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ApiError(ARGSPLAT_ERR_IO, "cannot read config " + path);
    std::map<std::string, std::string> values;
    std::string line;
    int lineNo = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(f, line)) {
        ++lineNo;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineNo) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

std::optional<std::string>
findConfigFlag(const std::vector<std::string> &args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

} // namespace

int
main(int argc, char **argv) {
    CLI::App app{"argsplat: hierarchical gaussian splat simplification, tokenization and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(argsplat_version()));

    Common common;
    IngestOptions ingest;
    SimplifyOptions simplify;
    ExpandOptions expand;
    HierarchyOptions hierarchy;
    TokenizeOptions tokenize;
    MasksOptions masks;
    RenderOptions render;
    MetricsOptions metrics;

    auto addCommon = [&](CLI::App *sub, bool needsOut = true) {
        auto *out = sub->add_option("--out", common.out, "Output directory");
        if (needsOut) out->required();
        sub->add_option("--seed", common.seed, "Seed for randomized fixtures");
        sub->add_option("--config", common.config, "key=value file; flags override it");
    };
    auto addIngest = [&](CLI::App *sub) {
        sub->add_option("--input", ingest.input, "Input splat (.ply or .argx)");
        sub->add_option("--synthetic", ingest.synthetic, "Generate a synthetic object with this many gaussians");
        sub->add_option("--clusters", ingest.clusters, "Cluster count for synthetic objects")->capture_default_str();
    };
    auto addSimplifyKnobs = [&](CLI::App *sub) {
        sub->add_option("--beta", simplify.beta, "Partner distance mass exponent")->capture_default_str();
        sub->add_flag("--reference-scan", simplify.referenceScan, "Use the exhaustive partner scan");
    };
    auto addRenderKnobs = [&](CLI::App *sub) {
        sub->add_option("--views", render.views, "Orbit view count")->capture_default_str();
        sub->add_option("--size", render.size, "Image size WxH")->capture_default_str();
    };

    CLI::App *cIngest = app.add_subcommand("ingest", "Load or synthesize a gaussian set");
    addCommon(cIngest);
    addIngest(cIngest);

    CLI::App *cSimplify = app.add_subcommand("simplify", "Greedy pairwise merging down to a target count");
    addCommon(cSimplify);
    cSimplify->add_option("--input", simplify.input, "Input set (default <out>/set.argx)");
    cSimplify->add_option("--target", simplify.target, "Gaussians to keep")->capture_default_str();
    addSimplifyKnobs(cSimplify);

    CLI::App *cExpand = app.add_subcommand("expand", "Undo merges from a recorded sequence");
    addCommon(cExpand);
    cExpand->add_option("--roots", expand.roots, "Simplified set (default <out>/remaining.argx)");
    cExpand->add_option("--sequence", expand.sequence, "Merge sequence (default <out>/sequence.args)");
    cExpand->add_option("--steps", expand.steps, "Merges to undo (default: all)");

    CLI::App *cHierarchy = app.add_subcommand("hierarchy", "Build the level hierarchy and write tree text and stats");
    addCommon(cHierarchy);
    cHierarchy->add_option("--sequence", hierarchy.sequence, "Merge sequence (default <out>/sequence.args)");
    cHierarchy->add_option("--roots", hierarchy.roots, "Root set (default <out>/remaining.argx)");

    CLI::App *cTokenize = app.add_subcommand("tokenize", "Quantize the hierarchy into a token stream");
    addCommon(cTokenize);
    cTokenize->add_option("--sequence", tokenize.sequence, "Merge sequence (default <out>/sequence.args)");
    cTokenize->add_option("--roots", tokenize.roots, "Root set (default <out>/remaining.argx)");
    cTokenize->add_option("--spec-from", tokenize.specFrom, "Range source: corpus or object")->capture_default_str();
    cTokenize->add_option("--corpus", tokenize.corpus, "Additional sets contributing to corpus ranges")
        ->delimiter(',');

    CLI::App *cMasks = app.add_subcommand("masks", "Build attention masks for a token stream");
    addCommon(cMasks);
    cMasks->add_option("--tokens", masks.tokens, "Token stream (default <out>/tokens.argt)");
    cMasks->add_option("--sequence", masks.sequence, "Merge sequence (default <out>/sequence.args)");
    cMasks->add_option("--roots", masks.roots, "Root set (default <out>/remaining.argx)");
    cMasks->add_option("--variant", masks.variant, "causal, levelwise, tree, tree-all-internal or all")
        ->capture_default_str();

    CLI::App *cRender = app.add_subcommand("render", "Render orbit views of a set");
    addCommon(cRender);
    cRender->add_option("--input", render.input, "Set to render (default <out>/set.argx)");
    addRenderKnobs(cRender);

    CLI::App *cMetrics = app.add_subcommand("metrics", "PSNR/SSIM of simplified sets against the original");
    addCommon(cMetrics);
    cMetrics->add_option("--input", metrics.inputs, "Objects to evaluate (default <out>/set.argx)")->delimiter(',');
    cMetrics->add_option("--levels", metrics.levels, "Retained percentages")->delimiter(',');
    cMetrics->add_option("--views", metrics.views, "Orbit view count")->capture_default_str();
    cMetrics->add_option("--size", metrics.size, "Image size WxH")->capture_default_str();
    cMetrics->add_option("--beta", metrics.beta, "Partner distance mass exponent")->capture_default_str();

    CLI::App *cPipeline = app.add_subcommand("pipeline", "Run every stage in order");
    addCommon(cPipeline);
    addIngest(cPipeline);
    addSimplifyKnobs(cPipeline);
    cPipeline->add_option("--spec-from", tokenize.specFrom, "Range source: corpus or object")->capture_default_str();
    addRenderKnobs(cPipeline);
    cPipeline->add_option("--levels", metrics.levels, "Retained percentages")->delimiter(',');

    CLI::App *cVerify = app.add_subcommand("verify", "Run the oracle equivalence suites");
    addCommon(cVerify);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // Config values become flags placed ahead of anything given explicitly,
        // for options the command line leaves unset.
        if (auto configPath = findConfigFlag(args)) {
            CLI::App *sub = nullptr;
            for (CLI::App *candidate : app.get_subcommands({})) {
                if (!args.empty() && candidate->get_name() == args.front()) sub = candidate;
            }
            if (sub) {
                const auto values = readConfig(*configPath);
                std::set<std::string> explicitKeys;
                for (const std::string &a : args) {
                    if (a.rfind("--", 0) == 0) explicitKeys.insert(a.substr(2, a.find('=') - 2));
                }
                std::vector<std::string> injected;
                for (const auto &[key, value] : values) {
                    if (key == "config") continue;
                    if (!sub->get_option_no_throw("--" + key)) {
                        throw UsageError("unknown key '" + key + "' in " + *configPath + " for " + sub->get_name());
                    }
                    if (!explicitKeys.count(key)) injected.push_back("--" + key + "=" + value);
                }
                args.insert(args.begin() + 1, injected.begin(), injected.end());
            }
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError &e) {
        std::cerr << "argsplat: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ApiError &e) {
        std::cerr << "argsplat: " << e.what() << "\n";
        return exitCodeFor(e.status);
    }

    try {
        if (cIngest->parsed()) runIngest(common, ingest);
        if (cSimplify->parsed()) runSimplify(common, simplify);
        if (cExpand->parsed()) runExpand(common, expand);
        if (cHierarchy->parsed()) runHierarchy(common, hierarchy);
        if (cTokenize->parsed()) runTokenize(common, tokenize);
        if (cMasks->parsed()) runMasks(common, masks);
        if (cRender->parsed()) runRender(common, render);
        if (cMetrics->parsed()) runMetrics(common, metrics);
        if (cPipeline->parsed()) {
            runIngest(common, ingest);
            SimplifyOptions full = simplify;
            full.target          = 1;
            runSimplify(common, full);
            runExpand(common, ExpandOptions{});
            runHierarchy(common, HierarchyOptions{});
            TokenizeOptions tok;
            tok.specFrom = tokenize.specFrom;
            runTokenize(common, tok);
            runMasks(common, MasksOptions{});
            runRender(common, render);
            MetricsOptions met;
            met.levels = metrics.levels;
            met.views  = render.views;
            met.size   = render.size;
            met.beta   = simplify.beta;
            runMetrics(common, met);
        }
        if (cVerify->parsed()) return runVerify(common);
    } catch (const UsageError &e) {
        std::cerr << "argsplat: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ApiError &e) {
        std::cerr << "argsplat: " << e.what() << "\n";
        return exitCodeFor(e.status);
    } catch (const std::exception &e) {
        std::cerr << "argsplat: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
