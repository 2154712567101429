#include "byzfl/metrics_io.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace byzfl::cli {

namespace {

std::string sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

} // namespace

std::string format_metrics_row(const fed::RoundMetrics& m) {
    std::string row = std::to_string(m.round);
    row += ',' + sig9(m.train_loss);
    row += ',' + sig9(m.test_accuracy);
    row += ',' + std::to_string(m.weiszfeld_iters);
    row += ',' + std::to_string(m.distorted_devices);
    row += ',' + std::to_string(m.decode_failures);
    return row;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsWriter::write(const fed::RoundMetrics& m) {
    out_ << format_metrics_row(m) << '\n' << std::flush;
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

RunSummary summarize_run(const std::filesystem::path& path, double threshold) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw std::runtime_error(path.string() + ": header mismatch");

    RunSummary s;
    s.name = path.string();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        const auto round = static_cast<std::size_t>(std::stoull(cells[0]));
        const double acc = std::stod(cells[2]);
        s.final_accuracy = acc;
        s.best_accuracy = s.rounds == 0 ? acc : std::max(s.best_accuracy, acc);
        if (!s.rounds_to_threshold && acc >= threshold) s.rounds_to_threshold = round;
        ++s.rounds;
    }
    return s;
}

void compare_runs(std::span<const std::filesystem::path> paths, double threshold, std::ostream& out) {
    std::vector<RunSummary> rows;
    for (const auto& p : paths) rows.push_back(summarize_run(p, threshold));

    std::size_t width = 3;
    for (const auto& r : rows) width = std::max(width, r.name.size());

    std::ostringstream head;
    head << "reach>=" << sig9(threshold);
    out << std::left << std::setw(static_cast<int>(width)) << "run" << "  " << std::right << std::setw(6) << "rounds"
        << "  " << std::setw(10) << "final_acc" << "  " << std::setw(10) << "best_acc" << "  " << std::setw(12)
        << head.str() << '\n';
    for (const auto& r : rows) {
        // the dash is three bytes but one column wide
        const std::string reach = r.rounds_to_threshold ? std::to_string(*r.rounds_to_threshold) : "—";
        out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::right << std::setw(6)
            << r.rounds << "  " << std::setw(10) << sig9(r.final_accuracy) << "  " << std::setw(10)
            << sig9(r.best_accuracy) << "  " << std::setw(r.rounds_to_threshold ? 12 : 14) << reach << '\n';
    }
}

} // namespace byzfl::cli
