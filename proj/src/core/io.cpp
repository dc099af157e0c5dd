// Copyright Contributors to the argsplat Project
// SPDX-License-Identifier: Apache-2.0
//
#include "argsplat/io.hpp"

#include "argsplat/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace argsplat::io {

namespace {

class Writer {
  public:
    void bytes(std::string_view s) { mOut.append(s); }
    void u8(std::uint8_t v) { mOut.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v), 4); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

    std::string take() { return std::move(mOut); }

  private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            mOut.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
        }
    }
    std::string mOut;
};

class Reader {
  public:
    Reader(std::string_view data, const char *what) : mData(data), mWhat(what) {}

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = mData.substr(mPos, n);
        mPos += n;
        return s;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(le(4))); }
    double f64() { return std::bit_cast<double>(le(8)); }

    std::size_t remaining() const { return mData.size() - mPos; }

    void magic(std::string_view expected) {
        if (mData.size() < expected.size() || mData.substr(0, expected.size()) != expected) {
            fail(ErrorCode::BadMagic, std::string(mWhat) + ": expected magic \"" + std::string(expected) + "\"");
        }
        mPos += expected.size();
    }

    void version(std::uint16_t supported) {
        const std::uint16_t v = u16();
        if (v != supported) {
            fail(ErrorCode::BadVersion, std::string(mWhat) + ": unsupported format version " + std::to_string(v) +
                                            " (expected " + std::to_string(supported) + ")");
        }
    }

    void end() {
        if (mPos != mData.size()) {
            fail(ErrorCode::Format, std::string(mWhat) + ": " + std::to_string(remaining()) + " trailing bytes");
        }
    }

  private:
    void need(std::size_t n) {
        if (mData.size() - mPos < n) {
            fail(ErrorCode::Truncated, std::string(mWhat) + ": unexpected end of data");
        }
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(mData[mPos + i])) << (8 * i);
        }
        mPos += static_cast<std::size_t>(n);
        return v;
    }

    std::string_view mData;
    const char *mWhat;
    std::size_t mPos = 0;
};

void
writePayload(Writer &w, const Gaussian3D &g) {
    for (int i = 0; i < 3; ++i) w.f64(g.center[i]);
    w.f64(g.opacity);
    for (int i = 0; i < 3; ++i) w.f64(g.scale[i]);
    for (double q : g.rotation) w.f64(q);
    for (double c : g.dc) w.f64(c);
    if (g.shRest.size() > std::numeric_limits<std::uint16_t>::max()) {
        fail(ErrorCode::InvalidParameter, "too many SH coefficients to serialize");
    }
    w.u16(static_cast<std::uint16_t>(g.shRest.size()));
    for (double c : g.shRest) w.f64(c);
}

Gaussian3D
readPayload(Reader &r) {
    Gaussian3D g;
    for (int i = 0; i < 3; ++i) g.center[i] = r.f64();
    g.opacity = r.f64();
    for (int i = 0; i < 3; ++i) g.scale[i] = r.f64();
    for (double &q : g.rotation) q = r.f64();
    for (double &c : g.dc) c = r.f64();
    g.shRest.resize(r.u16());
    for (double &c : g.shRest) c = r.f64();
    try {
        validate(g);
    } catch (const Error &e) {
        fail(ErrorCode::Format, std::string("invalid gaussian payload: ") + e.what());
    }
    return g;
}

// --- PLY -------------------------------------------------------------------

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

std::optional<PlyType>
plyType(std::string_view name) {
    static const std::map<std::string_view, PlyType> table = {
        {"char", PlyType::I8},     {"int8", PlyType::I8},     {"uchar", PlyType::U8},   {"uint8", PlyType::U8},
        {"short", PlyType::I16},   {"int16", PlyType::I16},   {"ushort", PlyType::U16}, {"uint16", PlyType::U16},
        {"int", PlyType::I32},     {"int32", PlyType::I32},   {"uint", PlyType::U32},   {"uint32", PlyType::U32},
        {"float", PlyType::F32},   {"float32", PlyType::F32}, {"double", PlyType::F64}, {"float64", PlyType::F64},
    };
    const auto it = table.find(name);
    return it == table.end() ? std::nullopt : std::optional<PlyType>(it->second);
}

std::size_t
plySize(PlyType t) {
    switch (t) {
    case PlyType::I8: case PlyType::U8: return 1;
    case PlyType::I16: case PlyType::U16: return 2;
    case PlyType::I32: case PlyType::U32: case PlyType::F32: return 4;
    case PlyType::F64: return 8;
    }
    return 0;
}

double
readPlyValue(Reader &r, PlyType t) {
    switch (t) {
    case PlyType::I8: return static_cast<std::int8_t>(r.u8());
    case PlyType::U8: return r.u8();
    case PlyType::I16: return static_cast<std::int16_t>(r.u16());
    case PlyType::U16: return r.u16();
    case PlyType::I32: return static_cast<std::int32_t>(r.u32());
    case PlyType::U32: return r.u32();
    case PlyType::F32: return r.f32();
    case PlyType::F64: return r.f64();
    }
    return 0.0;
}

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<std::pair<std::string, PlyType>> properties;
    bool hasList = false;
};

double
sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

} // namespace

std::string
readFile(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void
writeFile(const std::filesystem::path &path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::Io, "cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorCode::Io, "write failed for " + path.string());
    }
}

GaussianSet
decodePly(std::string_view bytes) {
    const std::string_view endHeader = "end_header\n";
    if (bytes.substr(0, 4) != "ply\n") {
        fail(ErrorCode::BadMagic, "ply: missing 'ply' signature");
    }
    const auto headerEnd = bytes.find(endHeader);
    if (headerEnd == std::string_view::npos) {
        fail(ErrorCode::Format, "ply: header has no end_header line");
    }
    std::istringstream header{std::string(bytes.substr(0, headerEnd))};
    std::string line;
    std::vector<PlyElement> elements;
    bool formatSeen = false;
    while (std::getline(header, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") {
                fail(ErrorCode::Unsupported, "ply: unsupported format '" + fmt + "', only binary_little_endian is read");
            }
            formatSeen = true;
        } else if (key == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            if (!ls) fail(ErrorCode::Format, "ply: malformed element line '" + line + "'");
            elements.push_back(std::move(e));
        } else if (key == "property") {
            if (elements.empty()) fail(ErrorCode::Format, "ply: property before any element");
            std::string type, name;
            ls >> type;
            if (type == "list") {
                elements.back().hasList = true;
                continue;
            }
            ls >> name;
            const auto t = plyType(type);
            if (!t || name.empty()) fail(ErrorCode::Format, "ply: malformed property line '" + line + "'");
            elements.back().properties.emplace_back(name, *t);
        }
    }
    if (!formatSeen) {
        fail(ErrorCode::Format, "ply: missing format line");
    }

    Reader r(bytes.substr(headerEnd + endHeader.size()), "ply");
    for (const PlyElement &e : elements) {
        if (e.name != "vertex") {
            if (e.hasList) fail(ErrorCode::Unsupported, "ply: list properties ahead of the vertex element");
            std::size_t stride = 0;
            for (const auto &p : e.properties) stride += plySize(p.second);
            r.bytes(stride * e.count);
            continue;
        }
        if (e.hasList) fail(ErrorCode::Unsupported, "ply: list properties in the vertex element");

        std::map<std::string, std::size_t> column;
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
            column.emplace(e.properties[i].first, i);
        }
        auto require = [&](const std::string &name) {
            const auto it = column.find(name);
            if (it == column.end()) fail(ErrorCode::Format, "ply: missing required vertex property '" + name + "'");
            return it->second;
        };
        const std::size_t cx = require("x"), cy = require("y"), cz = require("z");
        std::size_t cdc[3], cs[3], cr[4];
        for (int i = 0; i < 3; ++i) cdc[i] = require("f_dc_" + std::to_string(i));
        const std::size_t co = require("opacity");
        for (int i = 0; i < 3; ++i) cs[i] = require("scale_" + std::to_string(i));
        for (int i = 0; i < 4; ++i) cr[i] = require("rot_" + std::to_string(i));
        std::vector<std::size_t> crest;
        while (true) {
            const auto it = column.find("f_rest_" + std::to_string(crest.size()));
            if (it == column.end()) break;
            crest.push_back(it->second);
        }

        std::size_t stride = 0;
        for (const auto &p : e.properties) stride += plySize(p.second);
        if (stride != 0 && e.count > r.remaining() / stride) {
            fail(ErrorCode::Truncated, "ply: vertex payload shorter than the header declares");
        }
        GaussianSet set;
        set.ids.reserve(e.count);
        set.gaussians.reserve(e.count);
        std::vector<double> row(e.properties.size());
        for (std::size_t v = 0; v < e.count; ++v) {
            for (std::size_t i = 0; i < e.properties.size(); ++i) {
                row[i] = readPlyValue(r, e.properties[i].second);
            }
            Gaussian3D g;
            g.center = Vec3(row[cx], row[cy], row[cz]);
            for (int i = 0; i < 3; ++i) g.dc[i] = row[cdc[i]];
            g.shRest.resize(crest.size());
            for (std::size_t i = 0; i < crest.size(); ++i) g.shRest[i] = row[crest[i]];
            g.opacity = std::clamp(sigmoid(row[co]), std::numeric_limits<double>::min(), 1.0);
            for (int i = 0; i < 3; ++i) g.scale[i] = std::max(std::exp(row[cs[i]]), kMinScale);
            const Quat stored = {row[cr[0]], row[cr[1]], row[cr[2]], row[cr[3]]};
            const double qn   = std::sqrt(stored[0] * stored[0] + stored[1] * stored[1] + stored[2] * stored[2] +
                                          stored[3] * stored[3]);
            // Already unit to float precision: keep the stored values so a
            // load followed by a save reproduces the file.
            g.rotation = std::abs(qn - 1.0) <= 1e-6 && stored[0] >= 0.0 ? stored : normalizedQuat(stored);
            validate(g);
            set.add(static_cast<std::uint32_t>(v), std::move(g));
        }
        return set;
    }
    fail(ErrorCode::Format, "ply: no vertex element");
}

std::string
encodePly(const GaussianSet &set) {
    std::size_t rest = 0;
    for (const auto &g : set.gaussians) rest = std::max(rest, g.shRest.size());

    std::ostringstream h;
    h << "ply\nformat binary_little_endian 1.0\nelement vertex " << set.size() << "\n";
    for (const char *p : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
        h << "property float " << p << "\n";
    }
    for (std::size_t i = 0; i < rest; ++i) h << "property float f_rest_" << i << "\n";
    h << "property float opacity\n";
    for (int i = 0; i < 3; ++i) h << "property float scale_" << i << "\n";
    for (int i = 0; i < 4; ++i) h << "property float rot_" << i << "\n";
    h << "end_header\n";

    Writer w;
    w.bytes(h.str());
    for (const auto &g : set.gaussians) {
        for (int i = 0; i < 3; ++i) w.f32(static_cast<float>(g.center[i]));
        for (int i = 0; i < 3; ++i) w.f32(0.0f);
        for (double c : g.dc) w.f32(static_cast<float>(c));
        for (std::size_t i = 0; i < rest; ++i) w.f32(static_cast<float>(i < g.shRest.size() ? g.shRest[i] : 0.0));
        const double logit = std::log(g.opacity / (1.0 - g.opacity));
        w.f32(static_cast<float>(std::clamp(logit, -80.0, 80.0)));
        for (int i = 0; i < 3; ++i) w.f32(static_cast<float>(std::log(g.scale[i])));
        for (double q : g.rotation) w.f32(static_cast<float>(q));
    }
    return w.take();
}

GaussianSet
loadPly(const std::filesystem::path &path) {
    return decodePly(readFile(path));
}

void
savePly(const GaussianSet &set, const std::filesystem::path &path) {
    writeFile(path, encodePly(set));
}

std::string
encodeSet(const GaussianSet &set) {
    Writer w;
    w.bytes("ARGX");
    w.u16(kSetVersion);
    w.u32(static_cast<std::uint32_t>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        w.u32(set.ids[i]);
        writePayload(w, set.gaussians[i]);
    }
    return w.take();
}

GaussianSet
decodeSet(std::string_view bytes) {
    Reader r(bytes, "gaussian set");
    r.magic("ARGX");
    r.version(kSetVersion);
    const std::uint32_t n = r.u32();
    GaussianSet set;
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t id = r.u32();
        if (!seen.insert(id).second) {
            fail(ErrorCode::Format, "gaussian set: duplicate id " + std::to_string(id));
        }
        set.add(id, readPayload(r));
    }
    r.end();
    return set;
}

std::string
encodeSequence(const MergeSequence &seq) {
    Writer w;
    w.bytes("ARGS");
    w.u16(kSequenceVersion);
    w.u32(seq.sourceCount);
    w.u32(static_cast<std::uint32_t>(seq.records.size()));
    for (const MergeRecord &rec : seq.records) {
        w.u32(rec.step);
        w.u32(rec.parentId);
        w.u32(rec.child1Id);
        w.u32(rec.child2Id);
        writePayload(w, rec.child1);
        writePayload(w, rec.child2);
        writePayload(w, rec.parent);
    }
    return w.take();
}

MergeSequence
decodeSequence(std::string_view bytes) {
    Reader r(bytes, "merge sequence");
    r.magic("ARGS");
    r.version(kSequenceVersion);
    MergeSequence seq;
    seq.sourceCount = r.u32();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        MergeRecord rec;
        rec.step     = r.u32();
        rec.parentId = r.u32();
        rec.child1Id = r.u32();
        rec.child2Id = r.u32();
        rec.child1   = readPayload(r);
        rec.child2   = readPayload(r);
        rec.parent   = readPayload(r);
        seq.records.push_back(std::move(rec));
    }
    r.end();
    return seq;
}

std::string
encodeTokens(const TokenStream &tokens) {
    Writer w;
    w.bytes("ARGT");
    w.u16(kTokenVersion);
    w.u32(static_cast<std::uint32_t>(tokens.tokens.size()));
    if (tokens.depth > std::numeric_limits<std::uint16_t>::max()) {
        fail(ErrorCode::InvalidParameter, "token tree too deep to serialize");
    }
    w.u16(static_cast<std::uint16_t>(tokens.depth));
    std::uint32_t flags = kTokenFlagSelectedChildFirst;
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        w.f64(tokens.spec.min[a]);
        w.f64(tokens.spec.max[a]);
        flags |= (tokens.spec.logScale[a] ? 1u : 0u) << a;
        flags |= (tokens.spec.widened[a] ? 1u : 0u) << (16 + a);
    }
    w.u32(flags);
    for (const TokenRecord &t : tokens.tokens) {
        w.u32(t.nodeId);
        w.u32(t.parentId);
        if (t.level > std::numeric_limits<std::uint16_t>::max()) {
            fail(ErrorCode::InvalidParameter, "token level too large to serialize");
        }
        w.u16(static_cast<std::uint16_t>(t.level));
        w.u8(t.splittable ? 1 : 0);
        for (std::uint8_t b : t.bins) w.u8(b);
    }
    return w.take();
}

TokenStream
decodeTokens(std::string_view bytes) {
    Reader r(bytes, "token stream");
    r.magic("ARGT");
    r.version(kTokenVersion);
    TokenStream out;
    const std::uint32_t n = r.u32();
    out.depth = r.u16();
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        out.spec.min[a] = r.f64();
        out.spec.max[a] = r.f64();
    }
    const std::uint32_t flags = r.u32();
    for (std::size_t a = 0; a < kTokenAttributes; ++a) {
        out.spec.logScale[a] = (flags >> a) & 1u;
        out.spec.widened[a]  = (flags >> (16 + a)) & 1u;
    }
    constexpr std::size_t kTokenBytes = 4 + 4 + 2 + 1 + kTokenAttributes;
    if (n > r.remaining() / kTokenBytes) {
        fail(ErrorCode::Truncated, "token stream: fewer bytes than the declared token count");
    }
    out.tokens.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        TokenRecord t;
        t.nodeId   = r.u32();
        t.parentId = r.u32();
        t.level    = r.u16();
        const std::uint8_t split = r.u8();
        if (split > 1) fail(ErrorCode::Format, "token stream: splittable flag must be 0 or 1");
        t.splittable = split == 1;
        for (std::uint8_t &b : t.bins) b = r.u8();
        out.tokens.push_back(t);
    }
    r.end();
    return out;
}

std::string
encodeMask(const AttentionMask &mask) {
    Writer w;
    w.bytes("ARGM");
    w.u16(kMaskVersion);
    w.u32(static_cast<std::uint32_t>(mask.size()));
    w.u8(static_cast<std::uint8_t>(mask.variant()));
    const std::size_t n = mask.size();
    std::vector<std::uint8_t> packed((n * n + 7) / 8, 0);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < n; ++k) {
            if (mask.allowed(q, k)) {
                const std::size_t bit = q * n + k;
                packed[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
            }
        }
    }
    for (std::uint8_t b : packed) w.u8(b);
    return w.take();
}

AttentionMask
decodeMask(std::string_view bytes) {
    Reader r(bytes, "mask");
    r.magic("ARGM");
    r.version(kMaskVersion);
    const std::size_t n = r.u32();
    const std::uint8_t variant = r.u8();
    if (variant > static_cast<std::uint8_t>(MaskVariant::TreeAllInternal)) {
        fail(ErrorCode::Format, "mask: unknown variant " + std::to_string(variant));
    }
    const auto packed = r.bytes((n * n + 7) / 8);
    r.end();
    AttentionMask m(n, static_cast<MaskVariant>(variant));
    for (std::size_t bit = 0; bit < n * n; ++bit) {
        if ((static_cast<unsigned char>(packed[bit / 8]) >> (bit % 8)) & 1u) {
            m.set(bit / n, bit % n);
        }
    }
    return m;
}

std::string
encodePpm(const Image &img) {
    Writer w;
    w.bytes("P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n");
    for (float v : img.data) {
        w.u8(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
    }
    return w.take();
}

Image
decodePpm(std::string_view bytes) {
    if (bytes.substr(0, 2) != "P6") {
        fail(ErrorCode::BadMagic, "ppm: expected P6");
    }
    // Header: magic, width, height, maxval separated by whitespace, then one byte.
    std::size_t pos = 2;
    auto token = [&]() -> std::uint32_t {
        while (pos < bytes.size() && (std::isspace(static_cast<unsigned char>(bytes[pos])) || bytes[pos] == '#')) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                ++pos;
            }
        }
        std::uint64_t v = 0;
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
            if (v > std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::Format, "ppm: header value too large");
            ++pos;
        }
        if (pos == start) fail(ErrorCode::Format, "ppm: malformed header");
        return static_cast<std::uint32_t>(v);
    };
    const std::uint32_t w = token(), h = token(), maxval = token();
    if (maxval != 255) fail(ErrorCode::Unsupported, "ppm: only 8-bit images are supported");
    ++pos;
    Reader r(bytes.substr(std::min(pos, bytes.size())), "ppm");
    if (std::uint64_t(w) * h * 3 > r.remaining()) {
        fail(ErrorCode::Truncated, "ppm: pixel data shorter than the header declares");
    }
    Image img(w, h);
    for (float &v : img.data) v = static_cast<float>(r.u8()) / 255.0f;
    r.end();
    return img;
}

std::string
encodeRaw(const Image &img) {
    Writer w;
    w.bytes("ARGF");
    w.u32(img.width);
    w.u32(img.height);
    w.u32(3);
    for (float v : img.data) w.f32(v);
    return w.take();
}

Image
decodeRaw(std::string_view bytes) {
    Reader r(bytes, "float image");
    r.magic("ARGF");
    const std::uint32_t w = r.u32(), h = r.u32(), c = r.u32();
    if (c != 3) fail(ErrorCode::Unsupported, "float image: only 3 channels are supported");
    if (std::uint64_t(w) * h * 3 > r.remaining() / 4) {
        fail(ErrorCode::Truncated, "float image: pixel data shorter than the header declares");
    }
    Image img(w, h);
    for (float &v : img.data) v = r.f32();
    r.end();
    return img;
}

} // namespace argsplat::io
