#pragma once

#include "m2sdf/imagecore/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace m2sdf::noisegen {

/// Parameters for one synthetic sonar-like scene.
struct PhantomSpec {
    int height = 128;
    int width = 128;
    int object_count = 3;
    bool shadow = true;
    float background_level = 0.25f;
    std::uint64_t seed = 0;
};

/// Axis-aligned bounding box in pixels.
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Box&, const Box&) = default;
};

struct Phantom {
    imagecore::Image clean;
    std::vector<Box> boxes;
};

/// Background with a mild linear gradient, `object_count` bright ellipses or
/// rectangles (at least background + 0.3) and, when requested, a dark
/// acoustic shadow trailing each object towards +x (at most background - 0.2,
/// floored at 0). Throws GenerationError when an object cannot be placed
/// without overlap in 100 attempts.
Phantom make_phantom(const PhantomSpec& spec);

struct CorpusEntry {
    std::string file;
    std::uint64_t seed = 0;
    std::vector<Box> boxes;
};

struct CorpusManifest {
    int version = 1;
    PhantomSpec spec;
    std::vector<CorpusEntry> images;
};

inline constexpr const char* kCorpusManifestName = "manifest.json";

/// Writes `count` phantoms (seed = spec.seed + index) as 8-bit PNGs plus
/// manifest.json into `out_dir` (created if missing).
CorpusManifest make_corpus(int count, const PhantomSpec& spec, const std::filesystem::path& out_dir);

CorpusManifest read_corpus_manifest(const std::filesystem::path& dir);

/// Loads every image listed in the manifest of `dir`, in manifest order.
std::vector<imagecore::Image> load_corpus(const std::filesystem::path& dir);

}  // namespace m2sdf::noisegen
