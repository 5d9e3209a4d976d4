#include "m2sdf/nnmodel/batching.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"

namespace m2sdf::nnmodel {

BatchSampler::BatchSampler(std::size_t item_count, std::size_t batch_size, std::uint64_t seed)
    : items_(item_count), batch_(batch_size), seed_(seed) {
    if (items_ == 0) throw ArgumentError("cannot sample batches from zero items");
    if (batch_ == 0) throw ArgumentError("batch size must be >= 1");
}

std::vector<std::size_t> BatchSampler::batch(std::int64_t step) const {
    const noisegen::CounterRng rng(seed_, noisegen::Domain::BatchOrder);
    std::vector<std::size_t> out;
    out.reserve(batch_);
    std::uint64_t pos = static_cast<std::uint64_t>(step) * batch_;
    std::uint64_t cached_epoch = ~0ull;
    std::vector<std::size_t> perm;
    for (std::size_t i = 0; i < batch_; ++i, ++pos) {
        const std::uint64_t epoch = pos / items_;
        if (epoch != cached_epoch) {
            perm = noisegen::permutation(items_, rng, epoch);
            cached_epoch = epoch;
        }
        out.push_back(perm[pos % items_]);
    }
    return out;
}

}  // namespace m2sdf::nnmodel
