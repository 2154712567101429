#include "byzfl/rng.hpp"

#include <random>

namespace byzfl {

namespace {

std::seed_seq keyed_sequence(std::uint64_t master, StreamRole role, std::uint64_t index) {
    const auto tag = static_cast<std::uint32_t>(role);
    return std::seed_seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                         tag,
                         static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, StreamRole role, std::uint64_t index) {
    auto seq = keyed_sequence(master, role, index);
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

Rng make_stream(std::uint64_t master, StreamRole role, std::uint64_t index) {
    auto seq = keyed_sequence(master, role, index);
    return Rng(seq);
}

Streams seed_streams(std::uint64_t master, std::size_t num_devices) {
    Streams s{
        .devices = {},
        .channel = make_stream(master, StreamRole::Channel),
        .noise = make_stream(master, StreamRole::Noise),
        .partition_seed = derive_seed(master, StreamRole::Partition),
        .synthetic_seed = derive_seed(master, StreamRole::Synthetic),
    };
    s.devices.reserve(num_devices);
    for (std::size_t k = 0; k < num_devices; ++k)
        s.devices.push_back(make_stream(master, StreamRole::Device, k));
    return s;
}

} // namespace byzfl
