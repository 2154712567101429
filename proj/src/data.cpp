#include "byzfl/data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "byzfl/types.hpp"

namespace byzfl::data {

void Dataset::validate() const {
    if (num_classes < 1) throw std::invalid_argument("dataset: class count must be positive");
    if (features.size() != labels.size() * num_features)
        throw std::invalid_argument("dataset: feature rows do not match label count");
    for (int y : labels)
        if (y < 0 || y >= num_classes) throw std::invalid_argument("dataset: label out of range");
    for (double v : features)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("dataset: feature outside [0, 1]");
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
    Dataset out{num_features, num_classes, {}, {}};
    out.features.reserve(indices.size() * num_features);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

IdxError::IdxError(Kind kind, std::filesystem::path path, std::uint64_t offset, const std::string& what)
    : std::runtime_error(path.string() + " at offset " + std::to_string(offset) + ": " + what),
      kind_(kind), path_(std::move(path)), offset_(offset) {}

namespace {

class IdxReader {
public:
    explicit IdxReader(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IdxError(IdxError::Kind::Open, path, 0, "cannot open file");
        bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::uint32_t read_u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
        return v;
    }

    std::span<const char> read_bytes(std::size_t count) {
        require(count);
        std::span<const char> out(bytes_.data() + pos_, count);
        pos_ += count;
        return out;
    }

    std::uint64_t offset() const { return pos_; }
    const std::filesystem::path& path() const { return path_; }

private:
    void require(std::size_t count) const {
        if (bytes_.size() - pos_ < count) {
            std::ostringstream msg;
            msg << "truncated: need " << count << " bytes, " << bytes_.size() - pos_ << " left";
            throw IdxError(IdxError::Kind::Truncated, path_, pos_, msg.str());
        }
    }

    std::filesystem::path path_;
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

void expect_magic(IdxReader& r, std::uint32_t expected) {
    const auto at = r.offset();
    const auto magic = r.read_u32();
    if (magic != expected) {
        std::ostringstream msg;
        msg << std::hex << "bad magic 0x" << magic << ", expected 0x" << expected;
        throw IdxError(IdxError::Kind::BadMagic, r.path(), at, msg.str());
    }
}

} // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
    IdxReader images(images_path);
    expect_magic(images, kIdxImagesMagic);
    const auto n_images = images.read_u32();
    const auto rows = images.read_u32();
    const auto cols = images.read_u32();

    IdxReader labels(labels_path);
    expect_magic(labels, kIdxLabelsMagic);
    const auto count_offset = labels.offset();
    const auto n_labels = labels.read_u32();
    if (n_labels != n_images) {
        throw IdxError(IdxError::Kind::CountMismatch, labels_path, count_offset,
                       "label count " + std::to_string(n_labels) + " does not match image count " +
                           std::to_string(n_images));
    }

    Dataset ds;
    ds.num_features = static_cast<std::size_t>(rows) * cols;
    ds.num_classes = 10;
    const auto pixels = images.read_bytes(static_cast<std::size_t>(n_images) * ds.num_features);
    ds.features.resize(pixels.size());
    std::transform(pixels.begin(), pixels.end(), ds.features.begin(),
                   [](char c) { return static_cast<unsigned char>(c) / 255.0; });

    const auto label_offset = labels.offset();
    const auto raw = labels.read_bytes(n_labels);
    ds.labels.resize(n_labels);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const int y = static_cast<unsigned char>(raw[i]);
        if (y > 9)
            throw IdxError(IdxError::Kind::BadLabel, labels_path, label_offset + i,
                           "label " + std::to_string(y) + " outside 0..9");
        ds.labels[i] = y;
    }
    return ds;
}

Dataset gen_synthetic(std::size_t n, std::size_t p, int num_classes, std::uint64_t seed, double mean_scale) {
    if (num_classes < 1 || n < static_cast<std::size_t>(num_classes) || p < 1)
        throw std::invalid_argument("gen_synthetic: need n >= L >= 1 and p >= 1");

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> means(static_cast<std::size_t>(num_classes) * p);
    for (double& m : means) m = mean_scale * gauss(rng);

    Dataset ds{p, num_classes, std::vector<double>(n * p), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % static_cast<std::size_t>(num_classes));
        ds.labels[i] = y;
        for (std::size_t j = 0; j < p; ++j)
            ds.features[i * p + j] = means[static_cast<std::size_t>(y) * p + j] + gauss(rng);
    }

    const auto [lo_it, hi_it] = std::minmax_element(ds.features.begin(), ds.features.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    for (double& v : ds.features) v = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.0;
    return ds;
}

std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, std::size_t num_devices,
                                                        std::uint64_t seed) {
    if (num_devices < 1) throw std::invalid_argument("partition_iid: K must be at least 1");
    if (num_devices > n)
        throw std::invalid_argument("partition_iid: K = " + std::to_string(num_devices) +
                                    " exceeds sample count " + std::to_string(n));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const std::size_t block = n / num_devices;
    std::vector<std::vector<std::size_t>> out(num_devices);
    for (std::size_t k = 0; k < num_devices; ++k)
        out[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(k * block),
                      perm.begin() + static_cast<std::ptrdiff_t>((k + 1) * block));
    return out;
}

std::vector<Shard> partition_iid(const Dataset& ds, std::size_t num_devices, std::uint64_t seed) {
    const auto blocks = partition_indices(ds.size(), num_devices, seed);
    std::vector<Shard> shards;
    shards.reserve(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) shards.push_back({k, ds.select(blocks[k])});
    return shards;
}

Dataset concat(std::span<const Shard> shards) {
    Dataset out;
    if (shards.empty()) return out;
    out.num_features = shards.front().data.num_features;
    out.num_classes = shards.front().data.num_classes;
    for (const auto& s : shards) {
        out.features.insert(out.features.end(), s.data.features.begin(), s.data.features.end());
        out.labels.insert(out.labels.end(), s.data.labels.begin(), s.data.labels.end());
    }
    return out;
}

} // namespace byzfl::data
