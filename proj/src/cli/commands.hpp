#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "cli/config.hpp"

namespace gldp::cli {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides config output_dir
    unsigned workers = 0;                          // 0: all cores
};

/// Runs one experiment and writes its artifacts plus manifest.json.
/// Throws gldp::Error on configuration or numerical failure.
void run(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log);

/// Full command-line entry: parses argv, runs, maps errors to exit codes
/// (1 configuration, 2 numerical).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gldp::cli
