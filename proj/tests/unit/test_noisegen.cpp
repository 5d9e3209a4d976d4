#include "doctest.h"

#include "m2sdf/error.hpp"
#include "m2sdf/imagecore/image_io.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"
#include "m2sdf/noisegen/noise.hpp"
#include "m2sdf/noisegen/phantom.hpp"
#include "m2sdf/util/sha256.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

using namespace m2sdf;
using namespace m2sdf::noisegen;
using imagecore::Image;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

template <typename Range>
Moments moments(const Range& values) {
    double s = 0.0, ss = 0.0;
    std::size_t n = 0;
    for (double v : values) {
        s += v;
        ss += v * v;
        ++n;
    }
    const double mean = s / n;
    return {mean, (ss - n * mean * mean) / (n - 1)};
}

std::filesystem::path scratch(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "m2sdf_test_noisegen" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter rng: domains and indices give independent streams") {
    const CounterRng a(7, Domain::NoisePixels, 0);
    const CounterRng b(7, Domain::NoisePixels, 1);
    const CounterRng c(7, Domain::Phantom, 0);
    CHECK(a.uniform(3) != b.uniform(3));
    CHECK(a.uniform(3) != c.uniform(3));
    CHECK(a.uniform(3) == CounterRng(7, Domain::NoisePixels, 0).uniform(3));
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double u = a.uniform(i);
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(a.below(12, i) < 12u);
    }
}

TEST_CASE("noise spec validation and labels") {
    CHECK_NOTHROW(NoiseSpec::gaussian(25).validate());
    CHECK_THROWS_AS(NoiseSpec::gaussian(0).validate(), ArgumentError);
    CHECK_THROWS_AS(NoiseSpec::gaussian_range(50, 5).validate(), ArgumentError);
    CHECK_THROWS_AS((NoiseSpec{NoiseKind::PoissonFixed, 30.0, 40.0, 0}).validate(), ArgumentError);
    CHECK_THROWS_AS(NoiseSpec::speckle(-1).validate(), ArgumentError);

    for (const char* label : {"g25", "g5-50", "p30", "p5-50", "speckle"}) CHECK(noise_label(parse_noise_label(label)) == label);
    try {
        parse_noise_label("g99");
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("g5-50") != std::string::npos);
    }
}

TEST_CASE("add_gaussian") {
    const Image x(64, 64, 0.4f);
    SUBCASE("vanishing sigma is the identity") {
        const Image y = add_gaussian(x, NoiseSpec::gaussian(1e-9, 3));
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.pixels()[i] - x.pixels()[i]) < 1e-6);
    }
    SUBCASE("deterministic given seed, different across seeds") {
        CHECK(add_gaussian(x, NoiseSpec::gaussian(25, 11)) == add_gaussian(x, NoiseSpec::gaussian(25, 11)));
        CHECK_FALSE(add_gaussian(x, NoiseSpec::gaussian(25, 11)) == add_gaussian(x, NoiseSpec::gaussian(25, 12)));
    }
    SUBCASE("wrong kind") { CHECK_THROWS_AS(add_gaussian(x, NoiseSpec::poisson(30)), ArgumentError); }
}

TEST_CASE("add_gaussian sigma=25 sample std on a mid-gray image") {
    const Image x(1000, 1000, 0.5f);
    const Image y = add_gaussian(x, NoiseSpec::gaussian(25, 42));
    std::vector<double> d(y.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = double(y.pixels()[i]) - x.pixels()[i];
    const double sd = std::sqrt(moments(d).var);
    CHECK(sd >= 24.8 / 255.0);
    CHECK(sd <= 25.2 / 255.0);
}

TEST_CASE("property: pre-clamp gaussian moments within 4-sigma bounds") {
    const Image x(1000, 1000, 0.5f);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto raw = noisy_unclamped(x, NoiseSpec::gaussian(25, seed));
        std::vector<double> d(raw.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = raw[i] - 0.5;
        const auto m = moments(d);
        const double sigma = 25.0 / 255.0;
        const double n = static_cast<double>(d.size());
        CHECK(std::abs(m.mean) <= 4.0 * sigma / std::sqrt(n));
        CHECK(std::sqrt(m.var) >= sigma * (1.0 - 4.0 / std::sqrt(2.0 * n)));
        CHECK(std::sqrt(m.var) <= sigma * (1.0 + 4.0 / std::sqrt(2.0 * n)));
    }
}

TEST_CASE("add_poisson") {
    CHECK(add_poisson(Image(32, 32, 0.0f), NoiseSpec::poisson(30, 1)) == Image(32, 32, 0.0f));
    CHECK_THROWS_AS(add_poisson(Image(4, 4), NoiseSpec::gaussian(25)), ArgumentError);

    SUBCASE("huge lambda concentrates on the clean value") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            std::vector<float> v(128 * 128);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>((i * 37 % 101) / 100.0);
            const Image x(128, 128, std::move(v));
            const Image y = add_poisson(x, NoiseSpec::poisson(1e6, seed));
            double worst = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(double(y.pixels()[i]) - x.pixels()[i]));
            CHECK(worst < 0.01);
        }
    }
    SUBCASE("lambda=30 variance at x=0.5") {
        const Image y = add_poisson(Image(1000, 1000, 0.5f), NoiseSpec::poisson(30, 9));
        const auto m = moments(y.pixels());
        CHECK(m.var == doctest::Approx(0.5 / 30.0).epsilon(0.05));
    }
}

TEST_CASE("property: poisson dispersion ratio of lambda*y is 1") {
    for (double level : {0.25, 0.5, 0.75}) {
        const auto raw = noisy_unclamped(Image(700, 700, static_cast<float>(level)), NoiseSpec::poisson(30, 77));
        std::vector<double> counts(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) counts[i] = raw[i] * 30.0;
        const auto m = moments(counts);
        CHECK(m.var / m.mean == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("sample_poisson small and large mean branches match Poisson moments") {
    const CounterRng rng(5, Domain::Sampling);
    for (double mean : {0.7, 4.0, 15.0, 250.0}) {
        std::vector<double> ks(200000);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            UniformSequence seq(rng, i + static_cast<std::uint64_t>(mean * 1e6));
            ks[i] = static_cast<double>(sample_poisson(mean, [&] { return seq.next(); }));
        }
        const auto m = moments(ks);
        CHECK(m.mean == doctest::Approx(mean).epsilon(0.02));
        CHECK(m.var == doctest::Approx(mean).epsilon(0.03));
    }
}

TEST_CASE("add_speckle") {
    CHECK(add_speckle(Image(16, 16, 0.0f), NoiseSpec::unit_speckle(4)) == Image(16, 16, 0.0f));
    CHECK_THROWS_AS(add_speckle(Image(4, 4), NoiseSpec::gaussian(25)), ArgumentError);

    const Image y = add_speckle(Image(1000, 1000, 0.3f), NoiseSpec::unit_speckle(8));
    const double mean = moments(y.pixels()).mean;
    CHECK(mean >= 0.29);
    CHECK(mean <= 0.31);

    // Rayleigh moments of the multiplier itself (x = 1, pre-clamp).
    const auto r = noisy_unclamped(Image(1000, 1000, 1.0f), NoiseSpec::unit_speckle(8));
    const auto m = moments(r);
    CHECK(m.mean == doctest::Approx(1.0).epsilon(0.005));
    CHECK(std::sqrt(m.var) == doctest::Approx(std::sqrt((4.0 - std::numbers::pi) / std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("apply_noise dispatches to the matching generator") {
    const Image x(24, 24, 0.6f);
    CHECK(apply_noise(x, NoiseSpec::gaussian(25, 1)) == add_gaussian(x, NoiseSpec::gaussian(25, 1)));
    CHECK(apply_noise(x, NoiseSpec::poisson(30, 1)) == add_poisson(x, NoiseSpec::poisson(30, 1)));
    CHECK(apply_noise(x, NoiseSpec::unit_speckle(1)) == add_speckle(x, NoiseSpec::unit_speckle(1)));
    CHECK(apply_noise(x, NoiseSpec::gaussian_range(5, 50, 1), 3) == add_gaussian(x, NoiseSpec::gaussian_range(5, 50, 1), 3));
}

TEST_CASE("property: all noise outputs stay in [0,1]") {
    const Image x(64, 64, 0.95f);
    for (auto spec : {NoiseSpec::gaussian(50, 1), NoiseSpec::poisson(5, 1), NoiseSpec::unit_speckle(1),
                      NoiseSpec::gaussian_range(5, 50, 1), NoiseSpec::poisson_range(5, 50, 1)}) {
        const Image y = apply_noise(x, spec);
        for (float v : y.pixels()) CHECK((v >= 0.0f && v <= 1.0f));
    }
}

TEST_CASE("property: range parameter depends only on (seed, image index)") {
    for (auto spec : {NoiseSpec::gaussian_range(5, 50, 17), NoiseSpec::poisson_range(5, 50, 17)}) {
        std::set<double> seen;
        for (std::uint64_t k = 0; k < 50; ++k) {
            const double p = effective_parameter(spec, k);
            CHECK(p >= 5.0);
            CHECK(p <= 50.0);
            CHECK(p == effective_parameter(spec, k));
            seen.insert(p);
        }
        CHECK(seen.size() == 50);
    }
    // One draw per image, not per pixel: the noise field scales linearly with that sigma.
    const Image x(32, 32, 0.5f);
    const auto spec = NoiseSpec::gaussian_range(5, 50, 3);
    const double sigma = effective_parameter(spec, 2);
    const auto ranged = noisy_unclamped(x, spec, 2);
    const auto fixed = noisy_unclamped(x, NoiseSpec::gaussian(sigma, 3), 2);
    for (std::size_t i = 0; i < ranged.size(); ++i) CHECK(ranged[i] == doctest::Approx(fixed[i]).epsilon(1e-12));
}

TEST_CASE("make_phantom") {
    SUBCASE("no objects: pure gradient") {
        const Phantom p = make_phantom({64, 80, 0, false, 0.3f, 1});
        CHECK(p.boxes.empty());
        CHECK(p.clean.at(0, 0) < p.clean.at(0, 79));
        CHECK(p.clean.at(0, 0) < p.clean.at(63, 0));
        for (float v : p.clean.pixels()) CHECK(std::abs(v - 0.3f) <= 0.031f);
    }
    SUBCASE("three objects with shadows, inside canvas, contrast honoured") {
        const PhantomSpec spec{128, 128, 3, true, 0.3f, 5};
        const Phantom p = make_phantom(spec);
        REQUIRE(p.boxes.size() == 3);
        for (const Box& b : p.boxes) {
            CHECK(b.x >= 0);
            CHECK(b.y >= 0);
            CHECK(b.x + b.w <= 128);
            CHECK(b.y + b.h <= 128);
            const int cy = b.y + b.h / 2;
            const int cx = b.x + b.w / 2;
            CHECK(p.clean.at(cy, cx) >= 0.3f + 0.03f + 0.3f - 1e-6f);
            // shadow trails right of the object on the centre row
            CHECK(p.clean.at(cy, b.x + b.w + 1) <= std::max(0.0f, 0.3f - 0.03f - 0.2f) + 1e-6f);
        }
    }
    SUBCASE("deterministic") {
        const PhantomSpec spec{96, 96, 4, true, 0.2f, 9};
        CHECK(make_phantom(spec).clean == make_phantom(spec).clean);
        CHECK(make_phantom(spec).boxes == make_phantom(spec).boxes);
    }
    SUBCASE("overcrowded canvas fails") {
        CHECK_THROWS_AS(make_phantom({16, 16, 40, true, 0.2f, 1}), GenerationError);
    }
}

TEST_CASE("make_corpus") {
    SUBCASE("single image") {
        const auto dir = scratch("one");
        const auto m = make_corpus(1, {32, 32, 1, true, 0.25f, 3}, dir);
        REQUIRE(m.images.size() == 1);
        CHECK(std::filesystem::exists(dir / m.images[0].file));
        CHECK(read_corpus_manifest(dir).images.size() == 1);
        CHECK(read_corpus_manifest(dir).images[0].boxes == m.images[0].boxes);
        CHECK_THROWS_AS(make_corpus(0, {}, dir), ArgumentError);
    }
    SUBCASE("64 distinct images and byte-identical reruns") {
        const auto a = scratch("a");
        const auto b = scratch("b");
        const PhantomSpec spec{64, 64, 2, true, 0.25f, 100};
        const auto ma = make_corpus(64, spec, a);
        make_corpus(64, spec, b);
        std::set<std::string> hashes;
        for (const auto& e : ma.images) {
            const auto h = util::sha256_file(a / e.file);
            hashes.insert(h);
            CHECK(h == util::sha256_file(b / e.file));
        }
        CHECK(hashes.size() == 64);
        CHECK(util::sha256_file(a / kCorpusManifestName) == util::sha256_file(b / kCorpusManifestName));
        CHECK(load_corpus(a).size() == 64);
    }
}

TEST_CASE("noise cycle: single regimes and the mixed alternation") {
    const Image clean(16, 16, 0.5f);
    const auto g = NoiseCycle::parse("g25", 4);
    CHECK(g.label() == "g25");
    CHECK(noise_label(g.spec_for(3)) == "g25");
    CHECK(g.observe(clean, 2) == apply_noise(clean, g.specs[0].with_seed(6), 2));
    CHECK(!(g.observe(clean, 0) == g.observe(clean, 1)));

    const auto mixed = NoiseCycle::parse("mixed", 4);
    CHECK(mixed.label() == "g25+speckle");
    CHECK(noise_label(mixed.spec_for(0)) == "g25");
    CHECK(noise_label(mixed.spec_for(1)) == "speckle");
    CHECK(noise_label(mixed.spec_for(10)) == "g25");
    CHECK(mixed.observe(clean, 3) == apply_noise(clean, mixed.specs[1].with_seed(7), 3));

    CHECK_THROWS_AS(NoiseCycle::parse("g26"), ArgumentError);
    try {
        NoiseCycle::parse("bogus");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("mixed") != std::string::npos);
    }
}
