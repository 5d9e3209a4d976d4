#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace m2sdf::nnmodel {

/// Deterministic minibatch order: each epoch is a fresh permutation keyed by
/// (seed, epoch); step s takes positions [s*B, s*B + B) of the concatenated
/// epoch sequence.
class BatchSampler {
public:
    BatchSampler(std::size_t item_count, std::size_t batch_size, std::uint64_t seed);

    std::vector<std::size_t> batch(std::int64_t step) const;

private:
    std::size_t items_;
    std::size_t batch_;
    std::uint64_t seed_;
};

}  // namespace m2sdf::nnmodel
