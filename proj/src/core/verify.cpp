// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/verify.hpp"

#include "argsplat/error.hpp"
#include "argsplat/hierarchy.hpp"
#include "argsplat/io.hpp"
#include "argsplat/masks.hpp"
#include "argsplat/render.hpp"
#include "argsplat/simplify.hpp"
#include "argsplat/synth.hpp"
#include "argsplat/tokenize.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace argsplat {

namespace {

using Check = std::function<std::size_t(std::string &detail)>;

SuiteResult
runSuite(const std::string &name, const Check &check) {
    SuiteResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::string detail;
        r.cases  = check(detail);
        r.passed = detail.empty();
        r.detail = detail;
    } catch (const std::exception &e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Frontier membership by depth: a node sits in N_l when its depth is l, or
// when it is a leaf shallower than l.
std::vector<std::set<std::uint32_t>>
depthFrontiers(const HierarchyTree &tree) {
    std::map<std::uint32_t, std::size_t> depth;
    std::size_t maxDepth = 0;
    for (const auto &[id, n] : tree.nodes) {
        std::size_t d = 0;
        for (auto p = n.parent; p; p = tree.node(*p).parent) ++d;
        depth[id] = d;
        maxDepth  = std::max(maxDepth, d);
    }
    std::vector<std::set<std::uint32_t>> out(maxDepth + 1);
    for (const auto &[id, n] : tree.nodes) {
        for (std::size_t l = depth[id]; l <= maxDepth; ++l) {
            if (l == depth[id] || n.isLeaf()) out[l].insert(id);
        }
    }
    return out;
}

std::size_t
checkMaskOracles(const HierarchyTree &tree, std::string &detail) {
    QuantSpec spec;
    spec.max.fill(1.0);
    const TokenStream tokens = tokenizeTree(tree, spec);
    const auto frontiers = depthFrontiers(tree);
    const AttentionMask lw = levelwiseMask(tokens, tree);
    const AttentionMask tr = treeMask(tokens, tree);
    const std::size_t n = tokens.tokens.size();
    for (std::size_t q = 0; q < n; ++q) {
        const TokenRecord &tq = tokens.tokens[q];
        std::set<std::uint32_t> ancestors;
        for (auto p = tree.node(tq.nodeId).parent; p; p = tree.node(*p).parent) ancestors.insert(*p);
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t key = tokens.tokens[k].nodeId;
            const bool inFrontier = tq.level > 0 && frontiers[tq.level - 1].count(key);
            const bool expectLw = q == k || inFrontier;
            const bool expectTr = expectLw || (tq.level > 0 && ancestors.count(key));
            if (lw.allowed(q, k) != expectLw || tr.allowed(q, k) != expectTr || (tr.allowed(q, k) && k > q)) {
                detail = "mask mismatch at query " + std::to_string(q) + ", key " + std::to_string(k);
                return 1;
            }
        }
    }
    return 1;
}

double
naiveSsim(const Image &a, const Image &b) {
    constexpr int kW = 11;
    double g[kW][kW];
    double sum = 0.0;
    for (int i = 0; i < kW; ++i)
        for (int j = 0; j < kW; ++j) {
            g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
            sum += g[i][j];
        }
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        std::size_t windows = 0;
        for (std::uint32_t y = 0; y + kW <= a.height; ++y) {
            for (std::uint32_t x = 0; x + kW <= a.width; ++x) {
                double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
                for (int i = 0; i < kW; ++i)
                    for (int j = 0; j < kW; ++j) {
                        const double w = g[i][j] / sum;
                        const double va = a.at(x + j, y + i, c), vb = b.at(x + j, y + i, c);
                        mx += w * va;
                        my += w * vb;
                    }
                for (int i = 0; i < kW; ++i)
                    for (int j = 0; j < kW; ++j) {
                        const double w = g[i][j] / sum;
                        const double da = a.at(x + j, y + i, c) - mx, db = b.at(x + j, y + i, c) - my;
                        sxx += w * da * da;
                        syy += w * db * db;
                        sxy += w * da * db;
                    }
                acc += ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
                ++windows;
            }
        }
        total += acc / static_cast<double>(windows);
    }
    return total / 3.0;
}

} // namespace

std::size_t
VerifyReport::failures() const {
    std::size_t n = 0;
    for (const auto &s : suites) n += s.passed ? 0 : 1;
    return n;
}

std::string
VerifyReport::toJson() const {
    auto escape = [](const std::string &s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out.push_back(c);
        }
        return out;
    };
    std::ostringstream os;
    os << "{\n  \"failures\": " << failures() << ",\n  \"suites\": [";
    for (std::size_t i = 0; i < suites.size(); ++i) {
        const auto &s = suites[i];
        os << (i ? "," : "") << "\n    {\"name\": \"" << escape(s.name) << "\", \"passed\": "
           << (s.passed ? "true" : "false") << ", \"cases\": " << s.cases << ", \"detail\": \""
           << escape(s.detail) << "\"}";
    }
    os << "\n  ]\n}\n";
    return os.str();
}

VerifyReport
runVerification(std::uint64_t seed) {
    VerifyReport report;

    report.suites.push_back(runSuite("simplify-accelerated-vs-reference", [&](std::string &detail) {
        std::size_t cases = 0;
        for (double beta : {0.0, 0.5}) {
            for (std::uint64_t k = 0; k < 3; ++k) {
                SynthOptions opts;
                opts.count = 300;
                const GaussianSet set = synthesizeObject(seed + k, opts);
                SimplifyConfig fast, slow;
                fast.beta = slow.beta = beta;
                slow.referenceScan    = true;
                if (!(simplify(set, 1, fast).sequence == simplify(set, 1, slow).sequence)) {
                    detail = "sequences differ (beta " + std::to_string(beta) + ", fixture " + std::to_string(k) + ")";
                }
                ++cases;
            }
        }
        return cases;
    }));

    report.suites.push_back(runSuite("reversibility", [&](std::string &detail) {
        std::size_t cases = 0;
        for (std::uint32_t n : {2u, 10u, 100u}) {
            SynthOptions opts;
            opts.count = n;
            const GaussianSet set = synthesizeObject(seed + n, opts);
            const SimplifyResult r = simplify(set, 1);
            if (!(expand(r.remaining, r.sequence, r.sequence.records.size()) == set.sortedById())) {
                detail = "expand(simplify(P)) != P for n = " + std::to_string(n);
            }
            ++cases;
        }
        return cases;
    }));

    report.suites.push_back(runSuite("hierarchy-leaf-identity", [&](std::string &detail) {
        SynthOptions opts;
        opts.count = 128;
        const GaussianSet set = synthesizeObject(seed, opts);
        const HierarchyTree tree = buildTree(simplify(set, 1).sequence);
        if (!(leafSet(tree) == set.sortedById())) detail = "leaf set differs from input";
        const LevelSets ls = levelSets(tree);
        for (std::size_t l = 0; l + 1 < ls.levels.size(); ++l) {
            if (!(ls.levels[l + 1].size() > ls.levels[l].size() && ls.levels[l + 1].size() <= 2 * ls.levels[l].size())) {
                detail = "level sizes not strictly increasing / at most doubling at level " + std::to_string(l);
            }
        }
        return std::size_t{1};
    }));

    report.suites.push_back(runSuite("mask-oracles", [&](std::string &detail) {
        std::size_t cases = 0;
        for (std::uint64_t k = 0; k < 20 && detail.empty(); ++k) {
            const auto leaves = static_cast<std::uint32_t>(2 + (seed + k) % 31);
            cases += checkMaskOracles(buildTree(randomMergeSequence(seed + k, leaves)), detail);
        }
        return cases;
    }));

    report.suites.push_back(runSuite("quantization-roundtrip", [&](std::string &detail) {
        SynthOptions opts;
        opts.count = 200;
        const GaussianSet set = synthesizeObject(seed, opts);
        const QuantSpec spec = fitQuantSpec(std::span<const GaussianSet>(&set, 1));
        for (const auto &g : set.gaussians) {
            const auto attrs = tokenAttributes(g);
            const auto bins = quantize(g, spec);
            for (std::size_t a = 0; a < kTokenAttributes; ++a) {
                double v = attrs[a], back = dequantizeValue(bins[a], a, spec);
                if (spec.logScale[a]) {
                    v = std::log(v);
                    back = std::log(back);
                }
                if (std::abs(back - v) > 0.5 * spec.binWidth(a) * (1.0 + 1e-9)) {
                    detail = "roundtrip error above half a bin on attribute " + std::to_string(a);
                }
            }
        }
        return set.size();
    }));

    report.suites.push_back(runSuite("ssim-reference", [&](std::string &detail) {
        Rng rng(seed);
        for (int k = 0; k < 3; ++k) {
            Image a(24, 20), b(24, 20);
            for (auto &v : a.data) v = static_cast<float>(rng.uniform());
            for (auto &v : b.data) v = static_cast<float>(rng.uniform());
            if (std::abs(ssim(a, b) - naiveSsim(a, b)) > 1e-6) detail = "ssim differs from the sliding-window reference";
        }
        return std::size_t{3};
    }));

    report.suites.push_back(runSuite("format-roundtrips", [&](std::string &detail) {
        SynthOptions opts;
        opts.count = 64;
        const GaussianSet set = synthesizeObject(seed, opts);
        const SimplifyResult r = simplify(set, 1);
        const HierarchyTree tree = buildTree(r.sequence);
        const TokenStream tokens = tokenizeTree(tree, fitQuantSpec(std::span<const GaussianSet>(&set, 1)));
        const AttentionMask mask = treeMask(tokens, tree);
        if (!(io::decodeSequence(io::encodeSequence(r.sequence)) == r.sequence)) detail = "ARGS roundtrip";
        if (!(io::decodeTokens(io::encodeTokens(tokens)) == tokens)) detail = "ARGT roundtrip";
        if (!(io::decodeMask(io::encodeMask(mask)) == mask)) detail = "ARGM roundtrip";
        if (!(io::decodeSet(io::encodeSet(set)) == set)) detail = "ARGX roundtrip";
        return std::size_t{4};
    }));

    return report;
}

} // namespace argsplat
