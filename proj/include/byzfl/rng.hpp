#pragma once

#include <cstdint>
#include <vector>

#include "byzfl/types.hpp"

namespace byzfl {

/// Roles that own an independent random stream.
enum class StreamRole : std::uint32_t {
    Device = 1,
    Channel = 2,
    Noise = 3,
    Partition = 4,
    Synthetic = 5,
};

/// Keyed split of the master seed: the derived seed only depends on
/// (master, role, index), never on how many other streams exist.
std::uint64_t derive_seed(std::uint64_t master, StreamRole role, std::uint64_t index = 0);

Rng make_stream(std::uint64_t master, StreamRole role, std::uint64_t index = 0);

struct Streams {
    std::vector<Rng> devices; // batch sampling, one per device
    Rng channel;
    Rng noise;
    std::uint64_t partition_seed = 0;
    std::uint64_t synthetic_seed = 0;
};

Streams seed_streams(std::uint64_t master, std::size_t num_devices);

} // namespace byzfl
