#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace byzfl::data {

/// Labeled samples: row-major n x p features in [0, 1] and labels in [0, L).
struct Dataset {
    std::size_t num_features = 0;
    int num_classes = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * num_features, num_features};
    }

    /// Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;

    /// Copy of the selected rows, in the given order.
    Dataset select(std::span<const std::size_t> indices) const;

    bool operator==(const Dataset&) const = default;
};

/// One device's partition of the training set.
struct Shard {
    std::size_t owner = 0;
    Dataset data;

    bool operator==(const Shard&) const = default;
};

class IdxError : public std::runtime_error {
public:
    enum class Kind { Open, BadMagic, Truncated, CountMismatch, BadLabel };

    IdxError(Kind kind, std::filesystem::path path, std::uint64_t offset, const std::string& what);

    Kind kind() const { return kind_; }
    const std::filesystem::path& path() const { return path_; }
    std::uint64_t offset() const { return offset_; }

private:
    Kind kind_;
    std::filesystem::path path_;
    std::uint64_t offset_;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads an IDX image/label file pair (big-endian headers, unsigned bytes).
/// Pixels are scaled by 1/255, images are flattened row by row.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

/// Gaussian class clusters with unit variance around means drawn from
/// N(0, mean_scale^2 I), labels assigned round-robin (sample i has label
/// i mod L), every entry mapped into [0, 1] by one global affine map.
Dataset gen_synthetic(std::size_t n, std::size_t p, int num_classes, std::uint64_t seed,
                      double mean_scale = 1.0);

/// Seeded uniform permutation split into K contiguous blocks of floor(n/K)
/// samples; the remainder is dropped.
std::vector<Shard> partition_iid(const Dataset& ds, std::size_t num_devices, std::uint64_t seed);

/// Index blocks behind partition_iid, exposed so callers can check the
/// disjointness property without comparing feature rows.
std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, std::size_t num_devices,
                                                        std::uint64_t seed);

/// Concatenation of shards in order; used to rebuild the pooled training set.
Dataset concat(std::span<const Shard> shards);

} // namespace byzfl::data
