#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gldp/coeffs.hpp"
#include "gldp/convex.hpp"
#include "gldp/gcore.hpp"
#include "gldp/ldp.hpp"
#include "gldp/vi.hpp"

namespace gldp::cli {

enum class Command {
    simulate_forward,
    solve_limit,
    solve_vi,
    verify_convergence,
    rate_function,
    ldp_check,
};

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

/// One experiment, parsed from a single JSON document.
struct ExperimentConfig {
    Command command = Command::solve_limit;
    std::string preset = "tanh-drift";
    CoefficientSet coeffs;
    ConvexPenalty penalty = ConvexPenalty::zero();
    VolBounds bounds{1.0, 4.0};
    double x0 = 0.5;
    double s = 0.0;
    double T = 1.0;
    int n_steps = 1000;
    std::vector<double> eps_ladder{0.4, 0.2, 0.1, 0.05};
    double eps = 0.1;
    int n_random_scenarios = 5;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    bool psi_hat_b_only = false;
    std::optional<SpatialWindow> window;
    std::string target_file;
    std::string rate = "lambda";  // "lambda" | "lambda_prime"
    int u0_nx = 41;
    EventSpec event;
    int candidate_family_size = 64;

    nlohmann::ordered_json echo;  // the document as read
};

/// Validates and resolves a config document. `command` (from the command
/// line) must agree with a "command" key when both are present. Errors are
/// Error(invalid_argument) naming the offending field.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc, std::optional<Command> command);

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<Command> command);

}  // namespace gldp::cli
