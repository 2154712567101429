#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "byzfl/federation.hpp"

// Flat "key = value" experiment files. '#' starts a comment, blank lines are
// ignored, unknown keys are rejected. Keys:
//
//   K B attack mode rounds batch lr nu max_iter tol power sigma2 cmult b_floor
//   znorm_floor dataset mnist_dir synthetic_train synthetic_test synthetic_features
//   synthetic_classes synthetic_scale weights seed audit_every
namespace byzfl::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what);
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

using Override = std::pair<std::string, std::string>;

/// Applies one key/value pair; throws ConfigError for unknown keys or
/// unparsable values.
void apply_setting(fed::ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses config text on top of the defaults, then applies overrides in
/// order, then validates.
fed::ExperimentConfig parse_config_text(std::string_view text, const std::vector<Override>& overrides = {});

/// Reads path (empty path = defaults only) and delegates to parse_config_text.
fed::ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

/// Every key with its resolved value, round-trip exact.
std::string format_config(const fed::ExperimentConfig& config);

struct RunManifest {
    fed::ExperimentConfig config;
    std::string version;
    std::string started_at;
    std::filesystem::path metrics_path;
};

/// Metadata as comments followed by format_config, so the manifest itself
/// is a valid config file.
std::string write_manifest(const RunManifest& manifest);

} // namespace byzfl::cli
