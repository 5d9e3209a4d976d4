#include "m2sdf/denoisers/trained.hpp"

#include "m2sdf/denoisers/classical.hpp"
#include "m2sdf/denoisers/log_wrap.hpp"
#include "m2sdf/error.hpp"
#include "m2sdf/nnmodel/batching.hpp"
#include "m2sdf/nnmodel/checkpoint.hpp"
#include "m2sdf/util/json_file.hpp"
#include "train_loop.hpp"

#include <algorithm>

namespace m2sdf::denoisers {

std::string TrainedDenoiser::name() const { return method + "-" + noisegen::noise_label(noise); }

DenoiserHandle model_handle(std::string name, std::shared_ptr<const nnmodel::Model<float>> model,
                            nlohmann::ordered_json provenance) {
    if (!model || model->config().in_channels != 1) throw ArgumentError("denoiser model must take one channel");
    DenoiserHandle h;
    h.name = std::move(name);
    h.kind = HandleKind::Trained;
    h.provenance = std::move(provenance);
    h.fn = [model](const Image& x) { return nnmodel::predict(*model, nnmodel::from_image(x)); };
    return h;
}

DenoiserHandle TrainedDenoiser::handle() const {
    return model_handle(name(), model,
                        {{"method", method}, {"noise_spec", noise_spec_to_json(noise)}, {"seed", seed},
                         {"steps", optimizer.steps_taken()}});
}

nlohmann::ordered_json noise_spec_to_json(const noisegen::NoiseSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = noisegen::kind_name(spec.kind);
    j["param1"] = spec.param1;
    j["param2"] = spec.param2 ? nlohmann::ordered_json(*spec.param2) : nlohmann::ordered_json(nullptr);
    j["seed"] = spec.seed;
    return j;
}

noisegen::NoiseSpec noise_spec_from_json(const nlohmann::ordered_json& j) {
    try {
        noisegen::NoiseSpec s;
        s.kind = noisegen::parse_kind_name(j.at("kind").get<std::string>());
        s.param1 = j.at("param1").get<double>();
        if (j.contains("param2") && !j.at("param2").is_null()) s.param2 = j.at("param2").get<double>();
        s.seed = j.value("seed", std::uint64_t{0});
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad noise spec: ") + e.what());
    }
}

void save_trained(const TrainedDenoiser& trained, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const std::string name = trained.name();
    nnmodel::save_checkpoint(dir / (name + ".m2sd"), *trained.model, trained.optimizer,
                             {{"name", name}, {"method", trained.method}});
    nlohmann::ordered_json side;
    side["name"] = name;
    side["kind"] = kind_name(HandleKind::Trained);
    side["method"] = trained.method;
    side["noise_spec"] = noise_spec_to_json(trained.noise);
    side["seed"] = trained.seed;
    side["checkpoint"] = name + ".m2sd";
    util::write_json_atomic(dir / (name + ".json"), side);
}

DenoiserHandle load_trained_handle(const std::filesystem::path& dir, const std::string& name) {
    const auto sidecar = dir / (name + ".json");
    if (dir.empty() || !std::filesystem::exists(sidecar)) {
        throw NotFoundError("no trained denoiser '" + name + "' in '" + dir.string() + "'");
    }
    const auto side = util::read_json(sidecar);
    std::string checkpoint;
    try {
        checkpoint = side.at("checkpoint").get<std::string>();
        if (side.at("name").get<std::string>() != name) throw FormatError("sidecar '" + sidecar.string() + "' names a different handle");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar '" + sidecar.string() + "': " + e.what());
    }
    auto loaded = nnmodel::load_checkpoint(dir / checkpoint);
    auto model = std::make_shared<const nnmodel::Model<float>>(std::move(loaded.model));
    nlohmann::ordered_json prov = side;
    prov["rng_state"] = loaded.rng_state;
    return model_handle(name, std::move(model), std::move(prov));
}

DenoiserHandle resolve_handle(const std::string& name, const std::filesystem::path& models_dir) {
    static const std::string prefix = "log:";
    if (name.rfind(prefix, 0) == 0) return log_domain_wrap(resolve_handle(name.substr(prefix.size()), models_dir));
    const Registry builtins = builtin_registry();
    if (builtins.contains(name)) return builtins.get(name);
    if (!models_dir.empty() && std::filesystem::exists(models_dir / (name + ".json"))) {
        return load_trained_handle(models_dir, name);
    }
    std::string known;
    for (const auto& n : builtins.list_names()) known += n + ", ";
    throw NotFoundError("unknown denoiser '" + name + "' (built-ins: " + known + "or a trained handle in the models directory)");
}

std::vector<Image> training_patches(const std::vector<Image>& corpus, const imagecore::PatchSpec& spec) {
    std::vector<Image> out;
    for (const Image& img : corpus) {
        const int limit = std::min(img.height(), img.width());
        if (limit >= spec.size) {
            auto p = imagecore::to_patches(img, spec);
            std::move(p.begin(), p.end(), std::back_inserter(out));
        } else {
            const int h = img.height() & ~1, w = img.width() & ~1;
            if (h < 2 || w < 2) throw ArgumentError("training image too small");
            out.push_back(imagecore::crop(img, 0, 0, h, w));
        }
    }
    if (out.empty()) throw ArgumentError("training corpus is empty");
    return out;
}

namespace detail {

TrainedDenoiser train_loop(const std::string& method, const std::vector<Image>& noisy_corpus,
                           const noisegen::NoiseSpec& noise, const TrainerOptions& options,
                           const PatchObjective& objective) {
    if (noisy_corpus.empty()) throw ArgumentError("training corpus is empty");
    if (options.model.in_channels != 1) throw ArgumentError("single-frame denoisers take one input channel");
    noise.validate();
    const std::vector<Image> patches = training_patches(noisy_corpus, options.patches);

    auto model = std::make_shared<nnmodel::Model<float>>(options.model, options.seed);
    TrainedDenoiser out{method, noise, options.seed, model, nnmodel::Optimizer(options.opt), {}};
    const nnmodel::BatchSampler sampler(patches.size(), static_cast<std::size_t>(options.opt.batch_size), options.seed);
    std::vector<float> grads(model->parameter_count());
    for (std::int64_t step = 0; step < options.opt.steps; ++step) {
        const auto batch = sampler.batch(step);
        const double scale = 1.0 / static_cast<double>(batch.size());
        const double loss =
            nnmodel::accumulate_batch(*model, batch.size(), [&](std::size_t b, std::span<float> g) {
                return objective(*model, patches[batch[b]], step, b, g, scale);
            }, grads) * scale;
        nnmodel::apply_update(*model, out.optimizer, loss, grads);
        out.losses.push_back(loss);
        if (options.on_step) options.on_step(step, loss);
    }
    return out;
}

}  // namespace detail

}  // namespace m2sdf::denoisers
