#include "m2sdf/noisegen/phantom.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/imagecore/image_io.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"
#include "m2sdf/util/json_file.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace m2sdf::noisegen {

namespace {

constexpr int kMaxAttempts = 100;
constexpr float kGradientX = 0.04f;
constexpr float kGradientY = 0.02f;
constexpr float kObjectContrast = 0.33f;  // over the nominal level; covers the gradient
constexpr float kShadowDepth = 0.23f;

struct Placement {
    bool ellipse = true;
    int cx = 0, cy = 0, rx = 0, ry = 0;
    int shadow_len = 0;
    float intensity = 0.0f;
    float shadow_intensity = 0.0f;

    // Footprint including the trailing shadow.
    int left() const { return cx - rx; }
    int right() const { return cx + rx + shadow_len; }
    int top() const { return cy - ry; }
    int bottom() const { return cy + ry; }

    // Half-width of the object on row offset dy; -1 when the row misses it.
    int half_width(int dy) const {
        if (std::abs(dy) > ry) return -1;
        if (!ellipse) return rx;
        const double t = static_cast<double>(dy) / (ry + 0.5);
        return static_cast<int>(std::floor((rx + 0.5) * std::sqrt(std::max(0.0, 1.0 - t * t))));
    }
};

bool overlaps(const Placement& a, const Placement& b) {
    return !(a.right() + 1 < b.left() || b.right() + 1 < a.left() || a.bottom() + 1 < b.top() ||
             b.bottom() + 1 < a.top());
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
    if (spec.height < 8 || spec.width < 8) throw ArgumentError("phantom must be at least 8x8");
    if (spec.object_count < 0) throw ArgumentError("object_count must be >= 0");
    if (!(spec.background_level >= 0.0f && spec.background_level <= 1.0f)) {
        throw ArgumentError("background_level must lie in [0,1]");
    }
    const float level = spec.background_level;
    if (spec.object_count > 0 && level + kObjectContrast > 1.0f) {
        throw GenerationError("background_level too bright for the required object contrast");
    }

    const int h = spec.height;
    const int w = spec.width;
    std::vector<float> px(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float gx = kGradientX * (static_cast<float>(x) / (w - 1) - 0.5f);
            const float gy = kGradientY * (static_cast<float>(y) / (h - 1) - 0.5f);
            px[static_cast<std::size_t>(y) * w + x] = std::clamp(level + gx + gy, 0.0f, 1.0f);
        }
    }

    const CounterRng rng(spec.seed, Domain::Phantom);
    const int min_dim = std::min(h, w);
    const int r_lo = std::max(2, min_dim / 32);
    const int r_hi = std::max(r_lo, min_dim / 10);

    std::vector<Placement> placed;
    for (int obj = 0; obj < spec.object_count; ++obj) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            const std::uint64_t base = static_cast<std::uint64_t>(attempt) * 4;
            const auto u0 = rng.uniform_pair(obj, base);
            const auto u1 = rng.uniform_pair(obj, base + 1);
            const auto u2 = rng.uniform_pair(obj, base + 2);

            Placement p;
            p.ellipse = u0[0] < 0.5;
            p.rx = r_lo + static_cast<int>(u0[1] * (r_hi - r_lo + 1));
            p.ry = r_lo + static_cast<int>(u1[0] * (r_hi - r_lo + 1));
            p.shadow_len = spec.shadow ? 2 * p.rx : 0;
            const int span_x = w - (2 * p.rx + 1 + p.shadow_len);
            const int span_y = h - (2 * p.ry + 1);
            if (span_x < 1 || span_y < 1) continue;
            p.cx = p.rx + static_cast<int>(u1[1] * span_x);
            p.cy = p.ry + static_cast<int>(u2[0] * span_y);
            p.intensity = std::min(1.0f, level + kObjectContrast +
                                             static_cast<float>(u2[1]) * std::min(0.15f, 1.0f - level - kObjectContrast));
            p.shadow_intensity = std::max(0.0f, level - kShadowDepth - 0.05f * static_cast<float>(u2[1]));
            if (std::none_of(placed.begin(), placed.end(), [&](const Placement& q) { return overlaps(p, q); })) {
                placed.push_back(p);
                ok = true;
            }
        }
        if (!ok) throw GenerationError("could not place object " + std::to_string(obj) + " after 100 attempts");
    }

    Phantom out;
    for (const Placement& p : placed) {
        for (int dy = -p.ry; dy <= p.ry; ++dy) {
            const int hw = p.half_width(dy);
            if (hw < 0) continue;
            const std::size_t row = static_cast<std::size_t>(p.cy + dy) * w;
            for (int x = p.cx + hw + 1; x <= p.cx + hw + p.shadow_len; ++x) px[row + x] = p.shadow_intensity;
            for (int x = p.cx - hw; x <= p.cx + hw; ++x) px[row + x] = p.intensity;
        }
        out.boxes.push_back({p.cx - p.rx, p.cy - p.ry, 2 * p.rx + 1, 2 * p.ry + 1});
    }
    out.clean = imagecore::Image(h, w, std::move(px));
    return out;
}

namespace {

nlohmann::ordered_json spec_to_json(const PhantomSpec& s) {
    nlohmann::ordered_json j;
    j["height"] = s.height;
    j["width"] = s.width;
    j["object_count"] = s.object_count;
    j["shadow"] = s.shadow;
    j["background_level"] = s.background_level;
    j["seed"] = s.seed;
    return j;
}

PhantomSpec spec_from_json(const nlohmann::ordered_json& j) {
    PhantomSpec s;
    s.height = j.at("height").get<int>();
    s.width = j.at("width").get<int>();
    s.object_count = j.at("object_count").get<int>();
    s.shadow = j.at("shadow").get<bool>();
    s.background_level = j.at("background_level").get<float>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

CorpusManifest make_corpus(int count, const PhantomSpec& spec, const std::filesystem::path& out_dir) {
    if (count < 1) throw ArgumentError("corpus count must be >= 1");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    CorpusManifest manifest;
    manifest.spec = spec;
    nlohmann::ordered_json images = nlohmann::ordered_json::array();
    for (int i = 0; i < count; ++i) {
        PhantomSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(i);
        const Phantom ph = make_phantom(s);
        char name[32];
        std::snprintf(name, sizeof name, "phantom_%04d.png", i);
        imagecore::save_image(ph.clean, out_dir / name);

        CorpusEntry entry{name, s.seed, ph.boxes};
        nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
        for (const Box& b : entry.boxes) boxes.push_back({b.x, b.y, b.w, b.h});
        images.push_back({{"file", entry.file}, {"seed", entry.seed}, {"boxes", boxes}});
        manifest.images.push_back(std::move(entry));
    }

    nlohmann::ordered_json j;
    j["version"] = manifest.version;
    j["spec"] = spec_to_json(spec);
    j["images"] = std::move(images);
    util::write_json_atomic(out_dir / kCorpusManifestName, j);
    return manifest;
}

CorpusManifest read_corpus_manifest(const std::filesystem::path& dir) {
    const auto j = util::read_json(dir / kCorpusManifestName);
    CorpusManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != 1) throw FormatError("unsupported corpus manifest version " + std::to_string(m.version));
        m.spec = spec_from_json(j.at("spec"));
        for (const auto& e : j.at("images")) {
            CorpusEntry entry;
            entry.file = e.at("file").get<std::string>();
            entry.seed = e.at("seed").get<std::uint64_t>();
            for (const auto& b : e.at("boxes")) entry.boxes.push_back({b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()});
            m.images.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError("malformed corpus manifest in '" + dir.string() + "': " + ex.what());
    }
    return m;
}

std::vector<imagecore::Image> load_corpus(const std::filesystem::path& dir) {
    const CorpusManifest m = read_corpus_manifest(dir);
    std::vector<imagecore::Image> out;
    out.reserve(m.images.size());
    for (const auto& e : m.images) out.push_back(imagecore::load_image(dir / e.file));
    return out;
}

}  // namespace m2sdf::noisegen
