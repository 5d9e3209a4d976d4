#include "cli.hpp"
#include "manifest.hpp"
#include "run_config.hpp"

#include "m2sdf/denoisers/blindspot.hpp"
#include "m2sdf/denoisers/neighbor.hpp"
#include "m2sdf/denoisers/trained.hpp"
#include "m2sdf/error.hpp"
#include "m2sdf/evalkit/evalkit.hpp"
#include "m2sdf/fusion/fusion.hpp"
#include "m2sdf/imagecore/image_io.hpp"
#include "m2sdf/noisegen/phantom.hpp"
#include "m2sdf/util/json_file.hpp"
#include "m2sdf/util/parallel.hpp"

#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>

namespace m2sdf::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using imagecore::Image;

namespace {

const std::vector<std::string> kPaperMetrics{"mAP", "mAP@0.5", "mAP@0.75", "AR"};

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path out = cfg.text("out_dir");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
    return out;
}

constexpr int kDefaultEvalImages = 16;

// Same pixels `synth` would write for these seeds, without touching disk.
std::vector<Image> in_memory_corpus(std::uint64_t seed) {
    std::vector<Image> out;
    for (int i = 0; i < kDefaultEvalImages; ++i) {
        noisegen::PhantomSpec spec;
        spec.seed = seed + static_cast<std::uint64_t>(i);
        const Image img = noisegen::make_phantom(spec).clean;
        std::vector<float> q;
        for (const float v : img.pixels()) q.push_back(static_cast<float>(imagecore::quantize_8bit(v)) / 255.0f);
        out.emplace_back(img.height(), img.width(), std::move(q));
    }
    return out;
}

std::vector<Image> load_clean(const RunConfig& cfg, RunManifest& manifest) {
    const fs::path dir = cfg.text("corpus");
    if (!fs::exists(dir / noisegen::kCorpusManifestName)) {
        throw UsageError("corpus not found: '" + dir.string() + "' has no " + noisegen::kCorpusManifestName +
                         " (create one with `m2sdf synth`)");
    }
    const auto cm = noisegen::read_corpus_manifest(dir);
    manifest.add_input(dir / noisegen::kCorpusManifestName);
    for (const auto& e : cm.images) manifest.add_input(dir / e.file);
    return noisegen::load_corpus(dir);
}

noisegen::NoiseCycle noise_cycle(const RunConfig& cfg) {
    try {
        return noisegen::NoiseCycle::parse(cfg.text("noise"), static_cast<std::uint64_t>(cfg.integer("seed")));
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
}

std::string strip_log(std::string name) {
    while (name.rfind("log:", 0) == 0) name = name.substr(4);
    return name;
}

denoisers::DenoiserHandle resolve(const std::string& name, const fs::path& models_dir, RunManifest& manifest) {
    denoisers::DenoiserHandle h;
    try {
        h = denoisers::resolve_handle(name, models_dir);
    } catch (const NotFoundError& e) {
        throw UsageError(e.what());
    }
    const std::string base = strip_log(name);
    if (!models_dir.empty() && fs::exists(models_dir / (base + ".json"))) {
        manifest.add_input(models_dir / (base + ".json"));
        manifest.add_input(models_dir / (base + ".m2sd"));
    }
    return h;
}

nnmodel::OptimizerConfig optimizer_config(const RunConfig& cfg) {
    nnmodel::OptimizerConfig o;
    o.learning_rate = cfg.number("learning_rate");
    o.kind = nnmodel::parse_optimizer_kind(cfg.text("optimizer"));
    o.batch_size = static_cast<int>(cfg.integer("batch_size"));
    o.steps = cfg.integer("steps");
    o.validate();
    return o;
}

std::vector<Key> training_keys(std::int64_t steps) {
    return {{"steps", KeyType::Int, steps, "Optimizer steps", ""},
            {"batch_size", KeyType::Int, 8, "Patches per step", ""},
            {"learning_rate", KeyType::Double, 1e-3, "Learning rate", ""},
            {"optimizer", KeyType::String, "adam", "adam or sgd", ""},
            {"patch_size", KeyType::Int, 64, "Square training patch size", ""},
            {"hidden", KeyType::Int, 16, "Hidden channels", ""},
            {"depth", KeyType::Int, 4, "Convolution layers", ""}};
}

std::function<void(std::int64_t, double)> progress(std::ostream& out, std::int64_t steps) {
    const std::int64_t every = std::max<std::int64_t>(1, steps / 10);
    return [&out, every, steps](std::int64_t s, double loss) {
        if ((s + 1) % every == 0 || s + 1 == steps) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "step %lld/%lld loss %.6g\n", static_cast<long long>(s + 1),
                          static_cast<long long>(steps), loss);
            out << buf << std::flush;
        }
    };
}

fs::path write_report(const std::vector<evalkit::MetricRow>& rows, const fs::path& out, const std::string& stem,
                      const RunConfig& cfg, RunManifest& manifest) {
    const std::string fmt = cfg.text("format");
    const fs::path path = out / (stem + "." + fmt);
    evalkit::emit_report(rows, path, evalkit::parse_report_format(fmt));
    manifest.add_output(path);
    return path;
}

// "4" or "min_improved=4"
int parse_select(const std::string& s) {
    std::string v = s;
    if (v.rfind("min_improved=", 0) == 0) v = v.substr(13);
    try {
        std::size_t used = 0;
        const int k = std::stoi(v, &used);
        if (used == v.size() && k >= 1) return k;
    } catch (const std::exception&) {
    }
    throw UsageError("--select expects a positive integer or min_improved=<k>, got '" + s + "'");
}

// ---------------------------------------------------------------------------

struct Command {
    std::string name;
    std::string help;
    RunConfig config;
    std::function<void(const RunConfig&, std::ostream&)> body;
};

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    const auto count = cfg.integer("count");
    if (count < 1) throw UsageError("--count must be >= 1");
    noisegen::PhantomSpec spec;
    spec.height = spec.width = static_cast<int>(cfg.integer("size"));
    spec.object_count = static_cast<int>(cfg.integer("objects"));
    spec.shadow = cfg.flag("shadow");
    spec.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    if (spec.height < 16) throw UsageError("--size must be >= 16");
    if (spec.object_count < 0) throw UsageError("--objects must be >= 0");

    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    const auto cm = noisegen::make_corpus(static_cast<int>(count), spec, dir);
    for (const auto& e : cm.images) manifest.add_output(dir / e.file);
    manifest.add_output(dir / noisegen::kCorpusManifestName);
    manifest.write("synth");
    out << "wrote " << cm.images.size() << " phantoms to " << dir.string() << "\n";
}

void cmd_train_denoiser(const RunConfig& cfg, std::ostream& out) {
    const std::string method = cfg.text("method");
    if (method != "n2n" && method != "b2u") throw UsageError("--method must be n2n or b2u, got '" + method + "'");
    const std::string label = cfg.text("noise");
    if (label == "mixed") throw UsageError("train-denoiser needs a single regime: g25, g5-50, p30 or p5-50");
    const auto noise = noise_cycle(cfg);
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));

    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    const auto clean = load_clean(cfg, manifest);
    std::vector<Image> noisy;
    for (std::size_t i = 0; i < clean.size(); ++i) noisy.push_back(noise.observe(clean[i], i));

    denoisers::TrainerOptions o;
    o.model.hidden_channels = static_cast<int>(cfg.integer("hidden"));
    o.model.depth = static_cast<int>(cfg.integer("depth"));
    o.opt = optimizer_config(cfg);
    o.patches = {static_cast<int>(cfg.integer("patch_size")), static_cast<int>(cfg.integer("patch_size"))};
    o.seed = seed;
    o.on_step = progress(out, o.opt.steps);
    const auto td = method == "n2n" ? denoisers::train_n2n(noisy, noise.specs.front(), cfg.number("gamma"), o)
                                    : denoisers::train_b2u(noisy, noise.specs.front(), cfg.number("lambda_vis"), o);
    denoisers::save_trained(td, dir);
    const std::string name = td.name();
    util::write_json_atomic(dir / (name + ".losses.json"), td.losses);
    manifest.add_output(dir / (name + ".m2sd"));
    manifest.add_output(dir / (name + ".json"));
    manifest.add_output(dir / (name + ".losses.json"));
    manifest.set("handle", name);
    manifest.write(name);
    out << "trained " << name << "\n";
}

std::vector<fusion::FusionSequence> build_sequences(const std::vector<Image>& clean, const noisegen::NoiseCycle& noise,
                                                    const std::vector<denoisers::DenoiserHandle>& handles,
                                                    bool include_noisy) {
    std::vector<fusion::FusionSequence> seqs(clean.size());
    util::parallel_for(clean.size(), [&](std::size_t i) {
        seqs[i] = fusion::build_sequence(noise.observe(clean[i], i), handles, include_noisy, i);
    });
    return seqs;
}

void cmd_fuse_train(const RunConfig& cfg, std::ostream& out) {
    const auto names = cfg.list("denoisers");
    const bool include_noisy = cfg.flag("include_noisy");
    const int M = static_cast<int>(names.size()) + (include_noisy ? 1 : 0);
    if (M < 2) throw UsageError("fusion needs at least 2 frames; got " + std::to_string(M) + " (add denoisers or --include-noisy)");
    const auto noise = noise_cycle(cfg);
    const fs::path models = cfg.text("models_dir");

    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    std::vector<denoisers::DenoiserHandle> handles;
    for (const auto& n : names) handles.push_back(resolve(n, models, manifest));
    const auto clean = load_clean(cfg, manifest);
    const auto seqs = build_sequences(clean, noise, handles, include_noisy);

    auto fc = fusion::FusionConfig::for_frames(M, static_cast<int>(cfg.integer("k_target")));
    fc.model.hidden_channels = static_cast<int>(cfg.integer("hidden"));
    fc.model.depth = static_cast<int>(cfg.integer("depth"));
    fc.opt = optimizer_config(cfg);
    fc.patches = {static_cast<int>(cfg.integer("patch_size")), static_cast<int>(cfg.integer("patch_size"))};
    fc.shuffle_seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    fc.validate();

    fusion::TrainHooks hooks;
    hooks.on_step = progress(out, fc.opt.steps);
    const auto fm = fusion::train_m2sdf(seqs, fc, hooks);
    fusion::save_fusion(fm, dir / "m2sdf.m2sd");
    util::write_json_atomic(dir / "m2sdf.losses.json", fm.losses);
    manifest.add_output(dir / "m2sdf.m2sd");
    manifest.add_output(dir / "m2sdf.losses.json");
    if (cfg.flag("save_sequences")) {
        for (const auto& s : seqs) {
            char sub[32];
            std::snprintf(sub, sizeof sub, "sequences/%04zu", s.source_id);
            fusion::save_sequence(s, dir / sub);
            manifest.add_output(dir / sub / "index.json");
        }
    }
    manifest.set("frame_names", fm.frame_names);
    manifest.set("fusion_config", fusion::to_json(fc));
    manifest.write("fuse-train");
    out << "trained M2SDF-" << M << " over frames:";
    for (const auto& n : fm.frame_names) out << " " << n;
    out << "\n";
}

void cmd_fuse_apply(const RunConfig& cfg, std::ostream& out) {
    const fs::path model_path = cfg.text("model");
    if (!fs::exists(model_path)) throw UsageError("fusion checkpoint not found: '" + model_path.string() + "'");
    const auto noise = noise_cycle(cfg);
    const fs::path models = cfg.text("models_dir");

    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    manifest.add_input(model_path);
    const auto fm = fusion::load_fusion(model_path);
    bool include_noisy = false;
    std::vector<denoisers::DenoiserHandle> handles;
    for (const auto& n : fm.frame_names) {
        if (n == fusion::kNoisyFrameName) include_noisy = true;
        else handles.push_back(resolve(n, models, manifest));
    }
    const auto clean = load_clean(cfg, manifest);
    const auto seqs = build_sequences(clean, noise, handles, include_noisy);
    if (seqs.front().names != fm.frame_names) throw DataError("rebuilt frame order does not match the checkpoint");

    std::vector<Image> noisy, avg, fused(seqs.size());
    util::parallel_for(seqs.size(), [&](std::size_t i) { fused[i] = fusion::fuse(fm.model, seqs[i], fm.k_target); });
    fs::create_directories(dir / "fused");
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        noisy.push_back(noise.observe(clean[i], i));
        avg.push_back(fusion::frame_average(seqs[i]));
        char file[32];
        std::snprintf(file, sizeof file, "fused/fused_%04zu.png", i);
        imagecore::save_image(fused[i], dir / file);
        manifest.add_output(dir / file);
    }
    const std::string ctx = noise.label();
    const std::string subject = "M2SDF-" + std::to_string(fm.frame_names.size());
    const std::vector<evalkit::MetricRow> rows{evalkit::score_outputs(evalkit::kBaselineSubject, ctx, clean, noisy),
                                               evalkit::score_outputs("frame-average", ctx, clean, avg),
                                               evalkit::score_outputs(subject, ctx, clean, fused)};
    write_report(rows, dir, "fuse-apply", cfg, manifest);
    manifest.write("fuse-apply");
    for (const auto& r : rows) out << r.subject << " psnr " << evalkit::format_metric(*r.value("psnr")) << "\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const std::string fixtures = cfg.text("fixtures");
    const std::string select = cfg.text("select");
    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    std::vector<evalkit::MetricRow> rows;
    std::vector<std::string> default_metrics{"psnr", "ssim"};

    if (!fixtures.empty()) {
        if (!fs::exists(fixtures)) throw UsageError("fixture file not found: '" + fixtures + "'");
        manifest.add_input(fixtures);
        try {
            rows = evalkit::load_fixture(fixtures);
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
        default_metrics.clear();
        const auto& first = rows.empty() ? evalkit::MetricRow{} : rows.front();
        const bool paper = std::all_of(kPaperMetrics.begin(), kPaperMetrics.end(),
                                       [&](const auto& m) { return first.value(m).has_value(); });
        if (paper) default_metrics = kPaperMetrics;
        else for (const auto& [m, _] : first.metrics) default_metrics.push_back(m);
    } else {
        const auto names = cfg.list("denoisers");
        if (names.empty()) throw UsageError("evaluate needs --fixtures or --denoisers");
        const auto noise = noise_cycle(cfg);
        const fs::path models = cfg.text("models_dir");
        std::vector<denoisers::DenoiserHandle> handles;
        for (const auto& n : names) handles.push_back(resolve(n, models, manifest));
        const auto clean = cfg.text("corpus").empty()
                               ? in_memory_corpus(static_cast<std::uint64_t>(cfg.integer("seed")))
                               : load_clean(cfg, manifest);
        for (const auto& h : handles) {
            const auto ev = evalkit::evaluate_denoiser(h, clean, noise);
            if (rows.empty()) rows.push_back(ev.noisy);
            rows.push_back(ev.denoised);
        }
    }
    if (rows.empty()) throw UsageError("nothing to evaluate");
    write_report(rows, dir, "evaluate", cfg, manifest);

    if (!select.empty()) {
        evalkit::SelectionRule rule{parse_select(select), cfg.list("metrics")};
        if (rule.metric_set.empty()) rule.metric_set = default_metrics;
        std::vector<std::string> picked;
        try {
            picked = evalkit::select_denoisers(rows, rule);
        } catch (const ArgumentError& e) {
            throw UsageError(std::string("cannot apply the selection rule: ") + e.what());
        }
        manifest.set("selection", {{"min_improved", rule.min_improved}, {"metrics", rule.metric_set}, {"selected", picked}});
        for (const auto& p : picked) out << p << "\n";
    } else {
        for (const auto& r : rows) {
            out << r.subject;
            for (const auto& [m, v] : r.metrics) out << " " << m << "=" << evalkit::format_metric(v);
            out << "\n";
        }
    }
    manifest.write("evaluate");
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    const auto inputs = cfg.list("inputs");
    if (inputs.empty()) throw UsageError("report needs --inputs <report.json,...>");
    const fs::path dir = prepare_out(cfg);
    RunManifest manifest(cfg, dir);
    std::vector<evalkit::MetricRow> rows;
    for (const auto& in : inputs) {
        if (!fs::exists(in)) throw UsageError("report input not found: '" + in + "'");
        manifest.add_input(in);
        for (auto& r : evalkit::read_report_json(in)) rows.push_back(std::move(r));
    }
    const auto path = write_report(rows, dir, "report", cfg, manifest);
    manifest.write("report");
    out << "wrote " << rows.size() << " rows to " << path.string() << "\n";
}

std::vector<Command> make_commands() {
    std::vector<Command> c;
    c.push_back({"synth", "Generate a synthetic phantom corpus",
                 RunConfig("synth", {{"count", KeyType::Int, 64, "Number of phantoms", ""},
                                     {"size", KeyType::Int, 128, "Image side length", ""},
                                     {"objects", KeyType::Int, 3, "Objects per phantom", ""},
                                     {"shadow", KeyType::Bool, true, "Draw acoustic shadows", ""}}),
                 cmd_synth});
    auto td_keys = training_keys(1000);
    td_keys.insert(td_keys.begin(), {{"method", KeyType::String, nullptr, "n2n or b2u", ""},
                                     {"noise", KeyType::String, nullptr, "g25, g5-50, p30 or p5-50", ""},
                                     {"corpus", KeyType::String, nullptr, "Clean corpus directory", ""},
                                     {"gamma", KeyType::Double, 2.0, "n2n regulariser weight", ""},
                                     {"lambda_vis", KeyType::Double, 1.0, "b2u visible-term weight", ""}});
    c.push_back({"train-denoiser", "Train a self-supervised single-frame denoiser",
                 RunConfig("train-denoiser", td_keys), cmd_train_denoiser});
    auto ft_keys = training_keys(1000);
    ft_keys.insert(ft_keys.begin(), {{"denoisers", KeyType::StringList, ordered_json::array(), "Frame denoisers", ""},
                                     {"include_noisy", KeyType::Bool, false, "Add the raw frame to each sequence", ""},
                                     {"corpus", KeyType::String, nullptr, "Clean corpus directory", ""},
                                     {"noise", KeyType::String, "g25", "Noise label or mixed", ""},
                                     {"models_dir", KeyType::String, "", "Directory of trained denoisers", ""},
                                     {"k_target", KeyType::Int, 1, "Target frames per step", ""},
                                     {"save_sequences", KeyType::Bool, false, "Write sequences to disk", ""}});
    c.push_back({"fuse-train", "Train an M2SDF fusion model", RunConfig("fuse-train", ft_keys), cmd_fuse_train});
    c.push_back({"fuse-apply", "Fuse a corpus with a trained M2SDF model",
                 RunConfig("fuse-apply", {{"model", KeyType::String, nullptr, "Fusion checkpoint", ""},
                                          {"corpus", KeyType::String, nullptr, "Clean corpus directory", ""},
                                          {"noise", KeyType::String, "g25", "Noise label or mixed", ""},
                                          {"models_dir", KeyType::String, "", "Directory of trained denoisers", ""}}),
                 cmd_fuse_apply});
    c.push_back({"evaluate", "Score denoisers or run the selection policy on fixtures",
                 RunConfig("evaluate", {{"fixtures", KeyType::String, "", "Fixture table (JSON)", ""},
                                        {"select", KeyType::String, "", "k or min_improved=k", ""},
                                        {"metrics", KeyType::StringList, ordered_json::array(), "Metrics for selection", ""},
                                        {"denoisers", KeyType::StringList, ordered_json::array(), "Handles to score", ""},
                                        {"corpus", KeyType::String, "", "Clean corpus directory (default: 16 phantoms in memory)", ""},
                                        {"noise", KeyType::String, "g25", "Noise label or mixed", ""},
                                        {"models_dir", KeyType::String, "", "Directory of trained denoisers", ""}}),
                 cmd_evaluate});
    c.push_back({"report", "Merge JSON reports into one CSV or JSON report",
                 RunConfig("report", {{"inputs", KeyType::StringList, nullptr, "JSON reports", ""}}), cmd_report});
    return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"M2SDF: multi-source denoising fusion experiments", "m2sdf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());
    auto commands = make_commands();
    std::vector<std::pair<CLI::App*, std::string>> config_paths;
    config_paths.reserve(commands.size());
    for (auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        config_paths.emplace_back(sub, std::string{});
        sub->add_option("--config", config_paths.back().second, "JSON config file (flags win)");
        c.config.attach(*sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto* sub = config_paths[i].first;
        if (!sub->parsed()) continue;
        auto& c = commands[i];
        const std::string& cfg_path = config_paths[i].second;
        try {
            c.config.resolve(cfg_path.empty() ? std::nullopt : std::optional<fs::path>(cfg_path));
            c.body(c.config, out);
            return 0;
        } catch (const UsageError& e) {
            err << "m2sdf " << c.name << ": usage error: " << e.what() << "\n";
            return 2;
        } catch (const ArgumentError& e) {
            err << "m2sdf " << c.name << ": invalid configuration: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            err << "m2sdf " << c.name << ": error: " << e.what() << "\n";
            return 1;
        }
    }
    err << "m2sdf: no command given\n";
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"m2sdf"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace m2sdf::cli
