#include "m2sdf/nnmodel/checkpoint.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/util/json_file.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <map>

namespace m2sdf::nnmodel {

namespace {

constexpr char kMagic[4] = {'M', '2', 'S', 'D'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_ += s;
    }
    void tensor(const std::string& name, const std::vector<std::uint32_t>& dims, std::span<const float> values) {
        str(name);
        u32(static_cast<std::uint32_t>(dims.size()));
        for (auto d : dims) u32(d);
        for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
    }
    const std::string& data() const { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw CheckpointFormatError("checkpoint truncated");
    }
    std::string data_;
    std::size_t pos_ = 0;
};

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
};

std::string hex_u64_le(std::uint64_t a, std::uint64_t b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::uint64_t v : {a, b}) {
        for (int i = 0; i < 8; ++i) {
            const unsigned byte = static_cast<unsigned>((v >> (8 * i)) & 0xFF);
            out += digits[byte >> 4];
            out += digits[byte & 0xF];
        }
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model, const Optimizer& optimizer,
                     const nlohmann::ordered_json& extra) {
    const auto step = static_cast<std::uint64_t>(optimizer.steps_taken());
    nlohmann::ordered_json meta;
    meta["config"] = to_json(model.config());
    meta["seed"] = model.seed();
    meta["step"] = step;
    meta["optimizer"] = to_json(optimizer.config());
    meta["rng_state"] = hex_u64_le(model.seed(), step);
    meta["extra"] = extra.is_null() ? nlohmann::ordered_json::object() : extra;

    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.str(meta.dump());

    const bool adam = !optimizer.first_moment().empty();
    const int k = model.config().kernel;
    w.u32(static_cast<std::uint32_t>(2 * model.layer_count() + (adam ? 2 : 0)));
    for (int l = 0; l < model.layer_count(); ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        w.tensor(prefix + ".weight",
                 {static_cast<std::uint32_t>(model.layer_out(l)), static_cast<std::uint32_t>(model.layer_in(l)),
                  static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k)},
                 model.weight(l));
        w.tensor(prefix + ".bias", {static_cast<std::uint32_t>(model.layer_out(l))}, model.bias(l));
    }
    if (adam) {
        const auto n = static_cast<std::uint32_t>(optimizer.first_moment().size());
        w.tensor("adam.m", {n}, optimizer.first_moment());
        w.tensor("adam.v", {n}, optimizer.second_moment());
    }
    util::write_text_atomic(path, w.data());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    Reader r{std::string(std::istreambuf_iterator<char>(in), {})};

    if (r.str(4) != std::string(kMagic, 4)) throw CheckpointFormatError("not a checkpoint: bad magic in '" + path.string() + "'");
    const std::uint32_t version = r.u32();
    if (version > kCheckpointVersion) {
        throw CheckpointVersionError("checkpoint version " + std::to_string(version) + " is newer than supported (" +
                                     std::to_string(kCheckpointVersion) + ")");
    }
    if (version == 0) throw CheckpointFormatError("checkpoint version 0 is invalid");

    nlohmann::ordered_json meta;
    try {
        meta = nlohmann::ordered_json::parse(r.str(r.u32()));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointFormatError(std::string("bad checkpoint metadata: ") + e.what());
    }

    std::map<std::string, Tensor> tensors;
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.str(r.u32());
        Tensor t;
        const std::uint32_t rank = r.u32();
        if (rank > 8) throw CheckpointFormatError("implausible tensor rank");
        std::uint64_t n = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            t.dims.push_back(r.u32());
            n *= t.dims.back();
            if (n > r.remaining()) throw CheckpointFormatError("checkpoint truncated");
        }
        if (n > r.remaining() / 4) throw CheckpointFormatError("checkpoint truncated");
        t.values.resize(n);
        for (auto& v : t.values) v = std::bit_cast<float>(r.u32());
        tensors.emplace(std::move(name), std::move(t));
    }
    if (!r.at_end()) throw CheckpointFormatError("trailing bytes after tensors");

    try {
        const ModelConfig config = model_config_from_json(meta.at("config"));
        const OptimizerConfig opt_config = optimizer_config_from_json(meta.at("optimizer"));
        LoadedCheckpoint out{Model<float>(config, meta.at("seed").get<std::uint64_t>()), Optimizer(opt_config),
                             meta.at("rng_state").get<std::string>(), meta.value("extra", nlohmann::ordered_json::object())};
        Model<float>& m = out.model;
        const int k = config.kernel;
        auto take = [&](const std::string& name, const std::vector<std::uint32_t>& dims, std::span<float> dst) {
            const auto it = tensors.find(name);
            if (it == tensors.end()) throw CheckpointFormatError("missing tensor '" + name + "'");
            if (it->second.dims != dims) throw CheckpointFormatError("tensor '" + name + "' has the wrong shape");
            std::copy(it->second.values.begin(), it->second.values.end(), dst.begin());
        };
        for (int l = 0; l < m.layer_count(); ++l) {
            const std::string prefix = "layer" + std::to_string(l);
            take(prefix + ".weight",
                 {static_cast<std::uint32_t>(m.layer_out(l)), static_cast<std::uint32_t>(m.layer_in(l)),
                  static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k)},
                 m.weight(l));
            take(prefix + ".bias", {static_cast<std::uint32_t>(m.layer_out(l))}, m.bias(l));
        }
        std::vector<float> adam_m, adam_v;
        if (tensors.count("adam.m")) {
            const std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(m.parameter_count())};
            adam_m.resize(m.parameter_count());
            adam_v.resize(m.parameter_count());
            take("adam.m", dims, adam_m);
            take("adam.v", dims, adam_v);
        }
        out.optimizer.restore(meta.at("step").get<std::int64_t>(), std::move(adam_m), std::move(adam_v));
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointFormatError(std::string("bad checkpoint metadata: ") + e.what());
    } catch (const ArgumentError& e) {
        throw CheckpointFormatError(std::string("bad checkpoint metadata: ") + e.what());
    }
}

}  // namespace m2sdf::nnmodel
