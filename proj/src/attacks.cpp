#include "byzfl/attacks.hpp"

#include <algorithm>
#include <stdexcept>

namespace byzfl::attack {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::None: return "none";
        case AttackKind::ClassFlip: return "classflip";
        case AttackKind::WeightFlip: return "weightflip";
    }
    return "none";
}

AttackKind parse_attack(std::string_view name) {
    if (name == "none") return AttackKind::None;
    if (name == "classflip") return AttackKind::ClassFlip;
    if (name == "weightflip") return AttackKind::WeightFlip;
    throw std::invalid_argument("unknown attack '" + std::string(name) + "'");
}

data::Shard class_flip(data::Shard shard, int num_classes) {
    for (int& y : shard.data.labels) y = (num_classes - 1) - y;
    return shard;
}

std::vector<ModelParams> weight_flip(std::span<const ModelParams> honest, std::span<const std::size_t> byzantine) {
    const std::size_t num_devices = honest.size();
    const std::size_t num_byz = byzantine.size();
    if (num_byz == 0) throw std::invalid_argument("weight_flip: empty Byzantine set");
    if (num_byz >= num_devices) throw std::invalid_argument("weight_flip: needs at least one normal device (B < K)");

    std::vector<bool> is_byz(num_devices, false);
    for (std::size_t l : byzantine) {
        if (l >= num_devices || is_byz[l]) throw std::invalid_argument("weight_flip: bad Byzantine index");
        is_byz[l] = true;
    }

    const std::size_t d = honest.front().size();
    ModelParams normal_sum(d, 0.0);
    for (std::size_t k = 0; k < num_devices; ++k) {
        if (is_byz[k]) continue;
        for (std::size_t i = 0; i < d; ++i) normal_sum[i] += honest[k][i];
    }
    const double factor = 2.0 / static_cast<double>(num_devices - num_byz);

    std::vector<ModelParams> out(honest.begin(), honest.end());
    for (std::size_t l : byzantine)
        for (std::size_t i = 0; i < d; ++i) out[l][i] = -honest[l][i] - factor * normal_sum[i];
    return out;
}

} // namespace byzfl::attack
