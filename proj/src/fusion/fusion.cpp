#include "m2sdf/fusion/fusion.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/imagecore/image_io.hpp"
#include "m2sdf/nnmodel/batching.hpp"
#include "m2sdf/nnmodel/checkpoint.hpp"
#include "m2sdf/nnmodel/volume.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"
#include "m2sdf/util/json_file.hpp"

#include <algorithm>
#include <set>

namespace m2sdf::fusion {

using nnmodel::Stack;

void FusionSequence::validate() const {
    if (frames.empty()) throw ArgumentError("fusion sequence has no frames");
    if (names.size() != frames.size()) throw ArgumentError("fusion sequence needs one name per frame");
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front())) throw ArgumentError("fusion sequence frames differ in size");
    }
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
        throw ArgumentError("fusion sequence frame names must be unique");
    }
}

FusionSequence build_sequence(const Image& noisy, std::vector<denoisers::DenoiserHandle> handles, bool include_noisy,
                              std::size_t source_id) {
    if (handles.empty()) throw ArgumentError("build_sequence needs at least one denoiser");
    std::sort(handles.begin(), handles.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    FusionSequence seq;
    seq.source_id = source_id;
    seq.include_noisy = include_noisy;
    if (include_noisy) {
        seq.names.push_back(kNoisyFrameName);
        seq.frames.push_back(noisy);
    }
    for (const auto& h : handles) {
        try {
            seq.frames.push_back(h.apply(noisy));
        } catch (const std::exception& e) {
            throw DataError("frame '" + h.name + "': " + e.what());
        }
        seq.names.push_back(h.name);
    }
    seq.validate();
    return seq;
}

Partition shuffle_partition(int M, int k_target, std::uint64_t seed, std::int64_t step, std::uint64_t sequence_id) {
    if (M < 2 || k_target < 1 || k_target > M - 1) {
        throw ArgumentError("k_target must lie in [1, M-1] (M=" + std::to_string(M) + ", k_target=" +
                            std::to_string(k_target) + ")");
    }
    if (step < 0) throw ArgumentError("step must be >= 0");
    const noisegen::CounterRng rng(seed, noisegen::Domain::Partition, sequence_id);
    const auto perm = noisegen::permutation(static_cast<std::size_t>(M), rng, static_cast<std::uint64_t>(step));
    Partition p;
    const auto split = perm.begin() + (M - k_target);
    p.inputs.assign(perm.begin(), split);
    p.targets.assign(split, perm.end());
    std::sort(p.inputs.begin(), p.inputs.end());
    std::sort(p.targets.begin(), p.targets.end());
    return p;
}

bool partition_valid(const Partition& p, int M, int k_target) {
    if (static_cast<int>(p.inputs.size()) != M - k_target || static_cast<int>(p.targets.size()) != k_target) return false;
    if (p.inputs.empty() || p.targets.empty()) return false;
    std::vector<int> seen(static_cast<std::size_t>(M), 0);
    for (const auto* part : {&p.inputs, &p.targets}) {
        for (int i : *part) {
            if (i < 0 || i >= M || seen[i]++) return false;
        }
    }
    return true;
}

double mutual_loss(const Image& prediction, const std::vector<Image>& targets) {
    if (targets.empty()) throw ArgumentError("mutual_loss needs at least one target");
    const auto p = prediction.pixels();
    double total = 0.0;
    for (const auto& t : targets) {
        if (!t.same_shape(prediction)) throw ArgumentError("target size does not match the prediction");
        const auto tv = t.pixels();
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = static_cast<double>(p[i]) - tv[i];
            s += d * d;
        }
        total += s / static_cast<double>(p.size());
    }
    return total / static_cast<double>(targets.size());
}

FusionConfig FusionConfig::for_frames(int M, int k_target) {
    FusionConfig c;
    c.M = M;
    c.k_target = k_target;
    c.model.in_channels = M - k_target;
    return c;
}

void FusionConfig::validate() const {
    if (M < 2) throw ArgumentError("fusion needs at least 2 frames (M=" + std::to_string(M) + ")");
    if (k_target < 1 || k_target > M - 1) throw ArgumentError("k_target must lie in [1, M-1]");
    model.validate();
    opt.validate();
    if (model.in_channels != M - k_target) {
        throw ArgumentError("model in_channels must equal M - k_target = " + std::to_string(M - k_target));
    }
    if (patches.size < 1 || patches.stride < 1 || patches.stride > patches.size) throw ArgumentError("bad patch spec");
}

nlohmann::ordered_json to_json(const FusionConfig& c) {
    return {{"M", c.M},
            {"k_target", c.k_target},
            {"model", nnmodel::to_json(c.model)},
            {"opt", nnmodel::to_json(c.opt)},
            {"patch_size", c.patches.size},
            {"patch_stride", c.patches.stride},
            {"shuffle_seed", c.shuffle_seed}};
}

FusionConfig fusion_config_from_json(const nlohmann::ordered_json& j, FusionConfig c) {
    if (!j.is_object()) throw ArgumentError("fusion config must be a JSON object");
    static const std::set<std::string> known{"M", "k_target", "model", "opt", "patch_size", "patch_stride", "shuffle_seed"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ArgumentError("unknown fusion config key '" + key + "'");
    }
    try {
        c.M = j.value("M", c.M);
        c.k_target = j.value("k_target", c.k_target);
        c.patches.size = j.value("patch_size", c.patches.size);
        c.patches.stride = j.value("patch_stride", c.patches.stride);
        c.shuffle_seed = j.value("shuffle_seed", c.shuffle_seed);
    } catch (const nlohmann::json::exception&) {
        throw ArgumentError("bad value in fusion config");
    }
    const bool explicit_channels = j.contains("model") && j.at("model").is_object() && j.at("model").contains("in_channels");
    if (j.contains("model")) c.model = nnmodel::model_config_from_json(j.at("model"), c.model);
    if (!explicit_channels) c.model.in_channels = c.M - c.k_target;
    if (j.contains("opt")) c.opt = nnmodel::optimizer_config_from_json(j.at("opt"), c.opt);
    c.validate();
    return c;
}

namespace {

Stack pick(const Stack& all, const std::vector<int>& idx) {
    Stack out(static_cast<int>(idx.size()), all.height, all.width);
    for (std::size_t c = 0; c < idx.size(); ++c) {
        std::copy_n(all.channel(idx[c]), all.plane(), out.channel(static_cast<int>(c)));
    }
    return out;
}

// Aligned patches across all frames of every sequence, as M-channel stacks.
std::vector<Stack> aligned_patches(const std::vector<FusionSequence>& corpus, const imagecore::PatchSpec& spec) {
    std::vector<Stack> out;
    for (const auto& seq : corpus) {
        const Image& f0 = seq.frames.front();
        if (f0.height() < spec.size || f0.width() < spec.size) {
            out.push_back(nnmodel::stack_images(seq.frames));
            continue;
        }
        std::vector<std::vector<Image>> per_frame;
        for (const auto& f : seq.frames) per_frame.push_back(imagecore::to_patches(f, spec));
        for (std::size_t p = 0; p < per_frame.front().size(); ++p) {
            std::vector<const Image*> ptrs;
            for (const auto& pf : per_frame) ptrs.push_back(&pf[p]);
            out.push_back(nnmodel::stack_images(std::span<const Image* const>(ptrs)));
        }
    }
    return out;
}

}  // namespace

FusionModel train_m2sdf(const std::vector<FusionSequence>& corpus, const FusionConfig& config, const TrainHooks& hooks) {
    config.validate();
    if (corpus.empty()) throw ArgumentError("fusion corpus is empty");
    for (const auto& seq : corpus) {
        seq.validate();
        if (seq.size() != config.M) {
            throw ArgumentError("sequence " + std::to_string(seq.source_id) + " has " + std::to_string(seq.size()) +
                                " frames, config expects M=" + std::to_string(config.M));
        }
        if (seq.names != corpus.front().names) throw ArgumentError("sequences disagree on frame names");
    }
    const auto items = aligned_patches(corpus, config.patches);

    FusionModel fm{nnmodel::Model<float>(config.model, config.shuffle_seed), nnmodel::Optimizer(config.opt),
                   corpus.front().names, config.k_target, {}};
    const nnmodel::BatchSampler sampler(items.size(), static_cast<std::size_t>(config.opt.batch_size), config.shuffle_seed);
    std::vector<float> grads(fm.model.parameter_count());
    std::vector<Stack> inputs, targets;
    for (std::int64_t step = 0; step < config.opt.steps; ++step) {
        const auto batch = sampler.batch(step);
        inputs.clear();
        targets.clear();
        for (std::size_t item : batch) {
            const Partition p = shuffle_partition(config.M, config.k_target, config.shuffle_seed, step, item);
            if (!partition_valid(p, config.M, config.k_target)) throw std::logic_error("invalid partition drawn");
            if (hooks.on_partition) hooks.on_partition(step, item, p);
            inputs.push_back(pick(items[item], p.inputs));
            targets.push_back(pick(items[item], p.targets));
        }
        const double loss = nnmodel::loss_and_gradient(fm.model, inputs, targets, grads);
        nnmodel::apply_update(fm.model, fm.optimizer, loss, grads);
        fm.losses.push_back(loss);
        if (hooks.on_step) hooks.on_step(step, loss);
    }
    return fm;
}

Image fuse(const nnmodel::Model<float>& model, const FusionSequence& sequence, int k_target) {
    sequence.validate();
    const int M = sequence.size();
    if (k_target < 0 || k_target > M - 1) throw ArgumentError("k_target must lie in [0, M-1]");
    const int n = M - k_target;
    if (model.config().in_channels != n) {
        throw ArgumentError("channel mismatch: model expects " + std::to_string(model.config().in_channels) +
                            " frames, sequence provides " + std::to_string(n) + " (M=" + std::to_string(M) +
                            ", k_target=" + std::to_string(k_target) + ")");
    }
    const Stack all = nnmodel::stack_images(sequence.frames);
    std::vector<double> acc(all.plane(), 0.0);
    for (int r = 0; r <= k_target; ++r) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i) idx.push_back((r + i) % M);
        std::sort(idx.begin(), idx.end());
        const Stack out = model.forward(pick(all, idx));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += out.data[i];
    }
    std::vector<float> px(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) px[i] = static_cast<float>(std::clamp(acc[i] / (k_target + 1), 0.0, 1.0));
    return Image(all.height, all.width, std::move(px));
}

Image frame_average(const FusionSequence& sequence) {
    sequence.validate();
    std::vector<double> acc(sequence.frames.front().size(), 0.0);
    for (const auto& f : sequence.frames) {
        const auto p = f.pixels();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
    }
    std::vector<float> px(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) px[i] = static_cast<float>(acc[i] / sequence.size());
    return Image(sequence.frames.front().height(), sequence.frames.front().width(), std::move(px));
}

void save_fusion(const FusionModel& fm, const std::filesystem::path& path) {
    nlohmann::ordered_json extra;
    extra["kind"] = "m2sdf";
    extra["frame_names"] = fm.frame_names;
    extra["k_target"] = fm.k_target;
    extra["M"] = fm.frame_names.size();
    nnmodel::save_checkpoint(path, fm.model, fm.optimizer, extra);
}

FusionModel load_fusion(const std::filesystem::path& path) {
    auto ck = nnmodel::load_checkpoint(path);
    try {
        if (ck.extra.value("kind", std::string{}) != "m2sdf") {
            throw FormatError("'" + path.string() + "' is not a fusion checkpoint");
        }
        auto names = ck.extra.at("frame_names").get<std::vector<std::string>>();
        const int k = ck.extra.at("k_target").get<int>();
        if (ck.model.config().in_channels != static_cast<int>(names.size()) - k) {
            throw FormatError("fusion checkpoint frame count disagrees with the model");
        }
        return FusionModel{std::move(ck.model), std::move(ck.optimizer), std::move(names), k, {}};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad fusion checkpoint metadata: ") + e.what());
    }
}

void save_sequence(const FusionSequence& sequence, const std::filesystem::path& dir) {
    sequence.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    nlohmann::ordered_json index;
    index["source_id"] = sequence.source_id;
    index["frames"] = nlohmann::ordered_json::array();
    for (int j = 0; j < sequence.size(); ++j) {
        const std::string file = "frame" + std::to_string(j) + ".png";
        imagecore::save_image(sequence.frames[j], dir / file);
        index["frames"].push_back({{"name", sequence.names[j]}, {"file", file}});
    }
    index["include_noisy"] = sequence.include_noisy;
    util::write_json_atomic(dir / "index.json", index);
}

FusionSequence load_sequence(const std::filesystem::path& dir) {
    const auto index = util::read_json(dir / "index.json");
    FusionSequence seq;
    try {
        seq.source_id = index.at("source_id").get<std::size_t>();
        seq.include_noisy = index.at("include_noisy").get<bool>();
        for (const auto& f : index.at("frames")) {
            seq.names.push_back(f.at("name").get<std::string>());
            seq.frames.push_back(imagecore::load_image(dir / f.at("file").get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sequence index in '" + dir.string() + "': " + e.what());
    }
    seq.validate();
    return seq;
}

}  // namespace m2sdf::fusion
