#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "byzfl/federation.hpp"

namespace byzfl::cli {

inline constexpr std::string_view kMetricsHeader =
    "round,train_loss,test_accuracy,weiszfeld_iters,distorted_devices,decode_failures";

/// One CSV line (no newline), reals with 9 significant digits.
std::string format_metrics_row(const fed::RoundMetrics& m);

/// Writes the header on open and flushes after every row.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void write(const fed::RoundMetrics& m);

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct RunSummary {
    std::string name;
    std::size_t rounds = 0;
    double final_accuracy = 0.0;
    double best_accuracy = 0.0;
    std::optional<std::size_t> rounds_to_threshold; // first round reaching it
};

/// Reads a metrics CSV; throws std::runtime_error on a header mismatch or a
/// malformed row.
RunSummary summarize_run(const std::filesystem::path& path, double threshold);

/// Plain-text table, one line per run.
void compare_runs(std::span<const std::filesystem::path> paths, double threshold, std::ostream& out);

} // namespace byzfl::cli
