#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "byzfl/data.hpp"
#include "byzfl/types.hpp"

namespace byzfl::attack {

enum class AttackKind { None, ClassFlip, WeightFlip };

std::string_view to_string(AttackKind kind);

/// Accepts "none", "classflip", "weightflip"; throws std::invalid_argument.
AttackKind parse_attack(std::string_view name);

/// Data poisoning: label i becomes (L - 1) - i. An involution.
data::Shard class_flip(data::Shard shard, int num_classes);

/// Model poisoning by colluding devices. Every l in the Byzantine set is
/// replaced by -w_l - 2 / (K - B) * sum_{k not Byzantine} w_k; the other
/// entries are returned untouched.
std::vector<ModelParams> weight_flip(std::span<const ModelParams> honest, std::span<const std::size_t> byzantine);

} // namespace byzfl::attack
