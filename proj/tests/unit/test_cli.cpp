#include "doctest.h"

#include "cli.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using m2sdf::cli::run;

namespace {

const fs::path kFixtures = M2SDF_DATA_DIR "/fixtures";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("m2sdf_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("synth writes the corpus and a manifest; reruns are byte-identical") {
    const auto d = scratch("synth");
    const auto a = invoke({"synth", "--count", "3", "--size", "48", "--seed", "7", "--out", (d / "a").string()});
    REQUIRE(a.code == 0);
    CHECK(a.err.empty());
    const auto ma = read(d / "a" / "synth.manifest.json");
    CHECK(ma["command"] == "synth");
    CHECK(ma["config"]["seed"] == 7);
    CHECK(ma["outputs"].size() == 4);
    CHECK(fs::exists(d / "a" / "phantom_0002.png"));
    CHECK(read(d / "a" / "manifest.json")["images"].size() == 3);
    CHECK(fs::exists(d / "a" / "synth.timing.json"));

    const auto first = slurp(d / "a" / "synth.manifest.json");
    const auto png = slurp(d / "a" / "phantom_0001.png");
    REQUIRE(invoke({"synth", "--count", "3", "--size", "48", "--seed", "7", "--out", (d / "a").string()}).code == 0);
    CHECK(slurp(d / "a" / "synth.manifest.json") == first);
    CHECK(slurp(d / "a" / "phantom_0001.png") == png);

    // the token covers the seed
    REQUIRE(invoke({"synth", "--count", "3", "--size", "48", "--seed", "8", "--out", (d / "b").string()}).code == 0);
    CHECK(read(d / "b" / "synth.manifest.json")["determinism_token"] != ma["determinism_token"]);
}

TEST_CASE("usage errors exit with 2 and report on stderr only") {
    const auto d = scratch("usage");
    auto r = invoke({"synth", "--count", "0", "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("--count") != std::string::npos);

    r = invoke({"synth", "--count", "two", "--out", d.string()});
    CHECK(r.code == 2);
    r = invoke({"synth", "--no-such-flag"});
    CHECK(r.code == 2);
    r = invoke({});
    CHECK(r.code == 2);
    r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("fuse-train") != std::string::npos);

    r = invoke({"train-denoiser", "--method", "n2n", "--noise", "g99", "--corpus", d.string(), "--out", d.string()});
    CHECK(r.code == 2);
    for (const char* label : {"g25", "g5-50", "p30", "p5-50"}) CHECK(r.err.find(label) != std::string::npos);

    r = invoke({"train-denoiser", "--method", "n2n", "--noise", "g25", "--corpus", (d / "missing").string(), "--out",
               d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("corpus not found") != std::string::npos);

    r = invoke({"train-denoiser", "--method", "dncnn", "--noise", "g25", "--corpus", d.string()});
    CHECK(r.code == 2);
    r = invoke({"train-denoiser", "--noise", "g25", "--corpus", d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--method") != std::string::npos);

    r = invoke({"synth", "--precision", "float64", "--out", d.string()});
    CHECK(r.code == 2);
    r = invoke({"synth", "--format", "xml", "--out", d.string()});
    CHECK(r.code == 2);
}

TEST_CASE("config files: unknown keys rejected, flags win over file values") {
    const auto d = scratch("config");
    {
        std::ofstream(d / "bad.json") << R"({"count": 2, "colour": "blue"})";
        std::ofstream(d / "typed.json") << R"({"count": "two"})";
        std::ofstream(d / "good.json") << R"({"count": 2, "size": 32, "seed": 3, "out_dir": ")"
                                       << (d / "from_file").generic_string() << R"("})";
    }
    auto r = invoke({"synth", "--config", (d / "bad.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("colour") != std::string::npos);
    CHECK(invoke({"synth", "--config", (d / "typed.json").string()}).code == 2);
    CHECK(invoke({"synth", "--config", (d / "missing.json").string()}).code == 2);

    r = invoke({"synth", "--config", (d / "good.json").string(), "--count", "1"});
    REQUIRE(r.code == 0);
    const auto m = read(d / "from_file" / "synth.manifest.json");
    CHECK(m["config"]["count"] == 1);
    CHECK(m["config"]["size"] == 32);
    CHECK(m["config"]["seed"] == 3);
    CHECK(m["config"]["shadow"] == true);
    CHECK(!fs::exists(d / "from_file" / "phantom_0001.png"));

    REQUIRE(invoke({"synth", "--count", "1", "--size", "32", "--no-shadow", "--out", (d / "ns").string()}).code == 0);
    CHECK(read(d / "ns" / "synth.manifest.json")["config"]["shadow"] == false);
}

TEST_CASE("evaluate on fixtures prints the selected names") {
    const auto d = scratch("fixtures");
    auto r = invoke({"evaluate", "--fixtures", (kFixtures / "sctd_yolox.json").string(), "--select", "4", "--out",
                    d.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == std::vector<std::string>{"b2ub-g25", "b2ub-p30", "nei-g25", "nei-g5-50", "nei-p30"});
    CHECK(fs::exists(d / "evaluate.csv"));
    CHECK(read(d / "evaluate.manifest.json")["selection"]["selected"].size() == 5);

    r = invoke({"evaluate", "--fixtures", (kFixtures / "sctd_faster_rcnn.json").string(), "--select",
               "min_improved=4", "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == std::vector<std::string>{"nei-g25", "nei-g5-50", "nei-p30", "nei-p5-50"});

    r = invoke({"evaluate", "--fixtures", (kFixtures / "sctd_yolox.json").string(), "--select", "0", "--out",
               d.string()});
    CHECK(r.code == 2);

    // a table without the baseline row is a usage error with an explanation
    auto fx = read(kFixtures / "sctd_yolox.json");
    auto& rows = fx["rows"];
    rows.erase(std::remove_if(rows.begin(), rows.end(), [](const auto& row) { return row["subject"] == "noisy"; }),
               rows.end());
    std::ofstream(d / "nobase.json") << fx.dump();
    r = invoke({"evaluate", "--fixtures", (d / "nobase.json").string(), "--select", "1", "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("noisy") != std::string::npos);
}

TEST_CASE("report formats carry the same rows") {
    const auto d = scratch("formats");
    const auto fx = (kFixtures / "sctd_ssd300.json").string();
    REQUIRE(invoke({"evaluate", "--fixtures", fx, "--format", "json", "--out", (d / "j").string()}).code == 0);
    REQUIRE(invoke({"evaluate", "--fixtures", fx, "--format", "csv", "--out", (d / "c").string()}).code == 0);
    REQUIRE(invoke({"report", "--inputs", (d / "j" / "evaluate.json").string(), "--out", (d / "r").string()}).code == 0);
    CHECK(slurp(d / "r" / "report.csv") == slurp(d / "c" / "evaluate.csv"));
    CHECK(invoke({"report", "--inputs", (d / "c" / "evaluate.csv").string(), "--out", (d / "r").string()}).code == 1);
    CHECK(invoke({"report", "--out", (d / "r").string()}).code == 2);
}

TEST_CASE("train, fuse and evaluate through the command line") {
    const auto d = scratch("pipeline");
    const auto corpus = (d / "corpus").string();
    const auto models = (d / "models").string();
    REQUIRE(invoke({"synth", "--count", "4", "--size", "48", "--out", corpus}).code == 0);

    auto r = invoke({"train-denoiser", "--method", "n2n", "--noise", "g25", "--corpus", corpus, "--steps", "20",
                    "--batch-size", "2", "--patch-size", "32", "--out", models});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("trained n2n-g25") != std::string::npos);
    CHECK(fs::exists(d / "models" / "n2n-g25.m2sd"));
    CHECK(read(d / "models" / "n2n-g25.manifest.json")["inputs"].size() == 5);

    r = invoke({"fuse-train", "--denoisers", "n2n-g25", "--models-dir", models, "--corpus", corpus, "--out",
               (d / "f").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("at least 2 frames") != std::string::npos);
    r = invoke({"fuse-train", "--denoisers", "n2n-g99", "--models-dir", models, "--corpus", corpus, "--include-noisy",
               "--out", (d / "f").string()});
    CHECK(r.code == 2);

    const std::vector<std::string> train{"fuse-train", "--denoisers", "median3,n2n-g25", "--include-noisy",
                                         "--models-dir", models, "--corpus", corpus, "--steps", "10",
                                         "--batch-size", "2", "--patch-size", "32", "--out", (d / "f").string()};
    REQUIRE(invoke(train).code == 0);
    const auto m = read(d / "f" / "fuse-train.manifest.json");
    CHECK(m["frame_names"] == nlohmann::json::array({"noisy", "median3", "n2n-g25"}));
    const auto ckpt = slurp(d / "f" / "m2sdf.m2sd");
    const auto manifest = slurp(d / "f" / "fuse-train.manifest.json");
    REQUIRE(invoke(train).code == 0);
    CHECK(slurp(d / "f" / "m2sdf.m2sd") == ckpt);
    CHECK(slurp(d / "f" / "fuse-train.manifest.json") == manifest);

    r = invoke({"fuse-apply", "--model", (d / "f" / "m2sdf.m2sd").string(), "--models-dir", models, "--corpus", corpus,
               "--format", "json", "--out", (d / "a").string()});
    REQUIRE(r.code == 0);
    const auto rep = read(d / "a" / "fuse-apply.json");
    REQUIRE(rep.size() == 3);
    CHECK(rep[0]["subject"] == "noisy");
    CHECK(rep[1]["subject"] == "frame-average");
    CHECK(rep[2]["subject"] == "M2SDF-3");
    CHECK(fs::exists(d / "a" / "fused" / "fused_0003.png"));

    r = invoke({"evaluate", "--denoisers", "n2n-g25", "--noise", "g25", "--models-dir", models, "--corpus", corpus,
               "--out", (d / "e").string()});
    REQUIRE(r.code == 0);
    const auto csv = lines(slurp(d / "e" / "evaluate.csv"));
    REQUIRE(csv.size() == 3);
    CHECK(csv[0] == "subject,context,psnr,ssim,source");
    CHECK(csv[1].rfind("noisy,g25,", 0) == 0);
    CHECK(csv[2].rfind("n2n-g25,g25,", 0) == 0);
}
