#include "byzfl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace byzfl::cli {

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t parse_count(std::string_view key, std::string_view value) {
    std::size_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(value) + "'");
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const std::string text(value);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && !std::isnan(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(key), "expected a real number, got '" + text + "'");
}

template <typename Parse>
auto parse_enum(std::string_view key, std::string_view value, Parse parse) {
    try {
        return parse(value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(key), e.what());
    }
}

std::string real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void apply_setting(fed::ExperimentConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "K") c.num_devices = parse_count(key, value);
    else if (key == "B") c.num_byzantine = parse_count(key, value);
    else if (key == "attack") c.attack = parse_enum(key, value, attack::parse_attack);
    else if (key == "mode") c.mode = parse_enum(key, value, fed::parse_mode);
    else if (key == "rounds") c.rounds = parse_count(key, value);
    else if (key == "batch") c.batch_size = parse_count(key, value);
    else if (key == "lr") c.learning_rate = parse_real(key, value);
    else if (key == "nu") c.nu = parse_real(key, value);
    else if (key == "max_iter") c.max_iter = parse_count(key, value);
    else if (key == "tol") c.tol = parse_real(key, value);
    else if (key == "power") c.air.power = parse_real(key, value);
    else if (key == "sigma2") c.air.noise_var = parse_real(key, value);
    else if (key == "cmult") c.air.threshold_mult = parse_real(key, value);
    else if (key == "b_floor") c.air.b_floor = parse_real(key, value);
    else if (key == "znorm_floor") c.air.norm_floor = parse_real(key, value);
    else if (key == "dataset") c.dataset = parse_enum(key, value, fed::parse_dataset);
    else if (key == "mnist_dir") c.mnist_dir = std::string(value);
    else if (key == "synthetic_train") c.synthetic.train_size = parse_count(key, value);
    else if (key == "synthetic_test") c.synthetic.test_size = parse_count(key, value);
    else if (key == "synthetic_features") c.synthetic.num_features = parse_count(key, value);
    else if (key == "synthetic_classes") c.synthetic.num_classes = static_cast<int>(parse_count(key, value));
    else if (key == "synthetic_scale") c.synthetic.mean_scale = parse_real(key, value);
    else if (key == "weights") c.weight_rule = parse_enum(key, value, fed::parse_weight_rule);
    else if (key == "seed") c.seed = parse_count(key, value);
    else if (key == "audit_every") c.audit_every = parse_count(key, value);
    else throw ConfigError(std::string(key), "unknown key");
}

fed::ExperimentConfig parse_config_text(std::string_view text, const std::vector<Override>& overrides) {
    fed::ExperimentConfig config;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    for (const auto& [key, value] : overrides) apply_setting(config, key, value);

    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        const auto colon = what.find(':');
        throw ConfigError(what.substr(0, colon), colon == std::string::npos ? what : what.substr(colon + 2));
    }
    return config;
}

fed::ExperimentConfig parse_config(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    if (path.empty()) return parse_config_text("", overrides);
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), overrides);
}

std::string format_config(const fed::ExperimentConfig& c) {
    std::ostringstream out;
    out << "K = " << c.num_devices << '\n'
        << "B = " << c.num_byzantine << '\n'
        << "attack = " << attack::to_string(c.attack) << '\n'
        << "mode = " << fed::to_string(c.mode) << '\n'
        << "rounds = " << c.rounds << '\n'
        << "batch = " << c.batch_size << '\n'
        << "lr = " << real(c.learning_rate) << '\n'
        << "nu = " << real(c.nu) << '\n'
        << "max_iter = " << c.max_iter << '\n'
        << "tol = " << real(c.tol) << '\n'
        << "power = " << real(c.air.power) << '\n'
        << "sigma2 = " << real(c.air.noise_var) << '\n'
        << "cmult = " << real(c.air.threshold_mult) << '\n'
        << "b_floor = " << real(c.air.b_floor) << '\n'
        << "znorm_floor = " << real(c.air.norm_floor) << '\n'
        << "dataset = " << fed::to_string(c.dataset) << '\n'
        << "mnist_dir = " << c.mnist_dir << '\n'
        << "synthetic_train = " << c.synthetic.train_size << '\n'
        << "synthetic_test = " << c.synthetic.test_size << '\n'
        << "synthetic_features = " << c.synthetic.num_features << '\n'
        << "synthetic_classes = " << c.synthetic.num_classes << '\n'
        << "synthetic_scale = " << real(c.synthetic.mean_scale) << '\n'
        << "weights = " << fed::to_string(c.weight_rule) << '\n'
        << "seed = " << c.seed << '\n'
        << "audit_every = " << c.audit_every << '\n';
    return out.str();
}

std::string write_manifest(const RunManifest& m) {
    std::ostringstream out;
    out << "# byzfl run manifest\n"
        << "# version: " << m.version << '\n'
        << "# started: " << m.started_at << '\n'
        << "# metrics: " << m.metrics_path.string() << '\n'
        << format_config(m.config);
    return out.str();
}

} // namespace byzfl::cli
