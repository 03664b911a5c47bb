#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "gldp/error.hpp"

namespace gldp::cli {

using nlohmann::ordered_json;

namespace {

const std::pair<const char*, Command> kCommands[] = {
    {"simulate-forward", Command::simulate_forward},
    {"solve-limit", Command::solve_limit},
    {"solve-vi", Command::solve_vi},
    {"verify-convergence", Command::verify_convergence},
    {"rate-function", Command::rate_function},
    {"ldp-check", Command::ldp_check},
};

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    fail_argument("config field '" + field + "': " + what);
}

double get_number(const ordered_json& j, const std::string& field) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

double finite_number(const ordered_json& doc, const std::string& key, double fallback,
                     const std::string& prefix = "") {
    if (!doc.contains(key)) return fallback;
    const double v = get_number(doc.at(key), prefix + key);
    if (!std::isfinite(v)) bad(prefix + key, "must be finite");
    return v;
}

long long integer(const ordered_json& doc, const std::string& key, long long fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& j = doc.at(key);
    if (!j.is_number_integer() && !j.is_number_unsigned()) bad(key, "expected an integer");
    return j.get<long long>();
}

ScalarFn scalar_fn(const ordered_json& spec, const std::string& field) {
    if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string()) {
        bad(field, "expected an object with a string 'kind'");
    }
    const auto kind = spec.at("kind").get<std::string>();
    const double scale = finite_number(spec, "scale", 1.0, field + ".");
    const double value = finite_number(spec, "value", 0.0, field + ".");
    if (kind == "zero") return [](double) { return 0.0; };
    if (kind == "const") return [value](double) { return value; };
    if (kind == "linear") return [scale](double x) { return scale * x; };
    if (kind == "tanh") return [scale](double x) { return scale * std::tanh(x); };
    if (kind == "sin") return [scale](double x) { return scale * std::sin(x); };
    if (kind == "cos") return [scale](double x) { return scale * std::cos(x); };
    if (kind == "arctan") return [scale](double x) { return scale * std::atan(x); };
    if (kind == "one_plus_cos2") {
        return [scale](double x) {
            const double c = std::cos(x);
            return 1.0 + scale * c * c;
        };
    }
    bad(field + ".kind", "unknown function kind '" + kind + "'");
}

DriverFn driver_fn(const ordered_json& spec, const std::string& field) {
    if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string()) {
        bad(field, "expected an object with a string 'kind'");
    }
    const auto kind = spec.at("kind").get<std::string>();
    const double scale = finite_number(spec, "scale", 1.0, field + ".");
    const double value = finite_number(spec, "value", 0.0, field + ".");
    if (kind == "zero") return [](double, double, double, double) { return 0.0; };
    if (kind == "const") return [value](double, double, double, double) { return value; };
    if (kind == "linear_y") return [scale](double, double, double y, double) { return scale * y; };
    if (kind == "cos_y") return [scale](double, double, double y, double) { return scale * std::cos(y); };
    if (kind == "neg_y_plus_sin_x") {
        return [](double, double x, double y, double) { return -y + std::sin(x); };
    }
    bad(field + ".kind", "unknown driver kind '" + kind + "'");
}

ConvexPenalty parse_penalty(const ordered_json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        bad("penalty", "expected an object with a string 'kind'");
    }
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "zero") return ConvexPenalty::zero();
        if (kind == "indicator_interval") {
            const double lo = j.contains("lo") ? get_number(j.at("lo"), "penalty.lo") : -INFINITY;
            const double hi = j.contains("hi") ? get_number(j.at("hi"), "penalty.hi") : INFINITY;
            return ConvexPenalty::indicator_interval(lo, hi);
        }
        if (kind == "abs_scaled") return ConvexPenalty::abs_scaled(finite_number(j, "kappa", 1.0, "penalty."));
        if (kind == "quadratic") return ConvexPenalty::quadratic(finite_number(j, "kappa", 1.0, "penalty."));
    } catch (const Error& e) {
        bad("penalty", e.what());
    }
    bad("penalty.kind", "unknown penalty kind '" + kind + "'");
}

EventSpec parse_event(const ordered_json& j) {
    if (!j.is_object()) bad("event", "expected an object");
    EventSpec ev;
    const auto kind = j.value("kind", std::string("exit_ball"));
    if (kind == "exit_ball") ev.kind = EventSpec::Kind::exit_ball;
    else if (kind == "terminal_above") ev.kind = EventSpec::Kind::terminal_above;
    else bad("event.kind", "unknown event kind '" + kind + "'");
    ev.param = finite_number(j, "param", 1.0, "event.");
    const auto target = j.value("applied_to", std::string("forward_minus_x"));
    if (target == "forward_minus_x") ev.applied_to = EventSpec::AppliedTo::forward_minus_x;
    else if (target == "backward_y") ev.applied_to = EventSpec::AppliedTo::backward_y;
    else bad("event.applied_to", "unknown target '" + target + "'");
    if (ev.kind == EventSpec::Kind::exit_ball && !(ev.param > 0.0)) bad("event.param", "radius must be > 0");
    return ev;
}

const std::set<std::string> kKnownKeys = {
    "command", "preset", "coefficients", "penalty", "bounds", "x0", "s", "T", "n_steps",
    "eps_ladder", "eps", "n_random_scenarios", "family_size", "n_paths", "seed", "output_dir",
    "psi_hat_b_only", "window", "target_file", "rate", "u0_nx", "event", "candidate_family_size"};

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
    for (const auto& [n, c] : kCommands) {
        if (name == n) return c;
    }
    return std::nullopt;
}

std::string command_name(Command c) {
    for (const auto& [n, cmd] : kCommands) {
        if (cmd == c) return n;
    }
    return "?";
}

ExperimentConfig parse_config(const ordered_json& doc, std::optional<Command> command) {
    if (!doc.is_object()) fail_argument("config: top level must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!kKnownKeys.count(key)) bad(key, "unknown key");
    }
    ExperimentConfig cfg;
    cfg.echo = doc;

    std::optional<Command> from_doc;
    if (doc.contains("command")) {
        if (!doc.at("command").is_string()) bad("command", "expected a string");
        from_doc = parse_command(doc.at("command").get<std::string>());
        if (!from_doc) bad("command", "unknown command '" + doc.at("command").get<std::string>() + "'");
    }
    if (command && from_doc && *command != *from_doc) {
        bad("command", "config says '" + command_name(*from_doc) + "' but '" + command_name(*command) +
                           "' was requested");
    }
    if (!command && !from_doc) bad("command", "no command given");
    cfg.command = command ? *command : *from_doc;

    if (doc.contains("preset")) {
        if (!doc.at("preset").is_string()) bad("preset", "expected a string");
        cfg.preset = doc.at("preset").get<std::string>();
    }
    Preset preset;
    try {
        preset = find_preset(cfg.preset);
    } catch (const Error& e) {
        bad("preset", e.what());
    }
    cfg.coeffs = preset.coeffs;

    if (doc.contains("coefficients")) {
        const auto& co = doc.at("coefficients");
        if (!co.is_object()) bad("coefficients", "expected an object");
        for (const auto& [key, val] : co.items()) {
            const std::string field = "coefficients." + key;
            if (key == "b") cfg.coeffs.b = scalar_fn(val, field);
            else if (key == "h") cfg.coeffs.h = scalar_fn(val, field);
            else if (key == "sigma") cfg.coeffs.sigma = scalar_fn(val, field);
            else if (key == "Phi") cfg.coeffs.Phi = scalar_fn(val, field);
            else if (key == "f") cfg.coeffs.f = driver_fn(val, field);
            else if (key == "g") cfg.coeffs.g = driver_fn(val, field);
            else if (key == "lipschitz_L") cfg.coeffs.lipschitz_L = finite_number(co, key, 1.0, "coefficients.");
            else if (key == "bound_L") cfg.coeffs.bound_L = finite_number(co, key, 1.0, "coefficients.");
            else if (key == "sigma_min") cfg.coeffs.sigma_min = finite_number(co, key, 1.0, "coefficients.");
            else bad(field, "unknown coefficient");
        }
        cfg.coeffs.name = cfg.preset + "+overrides";
    }

    if (doc.contains("penalty")) cfg.penalty = parse_penalty(doc.at("penalty"));

    if (doc.contains("bounds")) {
        const auto& b = doc.at("bounds");
        if (!b.is_object()) bad("bounds", "expected an object");
        const double lo = finite_number(b, "sigma_lo_sq", 1.0, "bounds.");
        const double hi = finite_number(b, "sigma_hi_sq", 4.0, "bounds.");
        if (!(lo > 0.0)) bad("bounds.sigma_lo_sq", "must be > 0");
        if (lo > hi) bad("bounds.sigma_lo_sq", "must not exceed bounds.sigma_hi_sq");
        cfg.bounds = VolBounds{lo, hi};
        if (preset.bounds && (lo != preset.bounds->sigma_lo_sq || hi != preset.bounds->sigma_hi_sq)) {
            bad("bounds", "preset '" + cfg.preset + "' requires sigma_lo_sq = sigma_hi_sq = " +
                              std::to_string(preset.bounds->sigma_lo_sq));
        }
    } else if (preset.bounds) {
        cfg.bounds = *preset.bounds;
    }

    cfg.x0 = finite_number(doc, "x0", cfg.x0);
    cfg.s = finite_number(doc, "s", cfg.s);
    cfg.T = finite_number(doc, "T", cfg.T);
    if (cfg.s < 0.0) bad("s", "must be >= 0");
    if (!(cfg.s < cfg.T)) bad("T", "must be > s");
    const auto n_steps = integer(doc, "n_steps", cfg.n_steps);
    if (n_steps < 1 || n_steps > 10'000'000) bad("n_steps", "must lie in [1, 1e7]");
    cfg.n_steps = static_cast<int>(n_steps);

    if (doc.contains("eps_ladder")) {
        const auto& l = doc.at("eps_ladder");
        if (!l.is_array()) bad("eps_ladder", "expected an array");
        cfg.eps_ladder.clear();
        for (const auto& v : l) cfg.eps_ladder.push_back(get_number(v, "eps_ladder"));
    }
    for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
        if (!(cfg.eps_ladder[i] > 0.0 && cfg.eps_ladder[i] <= 1.0)) bad("eps_ladder", "entries must lie in (0, 1]");
        if (i > 0 && !(cfg.eps_ladder[i] < cfg.eps_ladder[i - 1])) bad("eps_ladder", "must be strictly decreasing");
    }
    const bool needs_ladder = cfg.command == Command::verify_convergence || cfg.command == Command::ldp_check;
    if (needs_ladder && cfg.eps_ladder.size() < 3) bad("eps_ladder", "needs at least 3 entries");

    cfg.eps = finite_number(doc, "eps", cfg.eps);
    if (!(cfg.eps >= 0.0 && cfg.eps <= 1.0)) bad("eps", "must lie in [0, 1]");

    // family_size counts all scenarios (3 fixed + random ones)
    if (doc.contains("family_size") && doc.contains("n_random_scenarios")) {
        bad("family_size", "give either family_size or n_random_scenarios, not both");
    }
    if (doc.contains("family_size")) {
        const auto fs = integer(doc, "family_size", 8);
        if (fs < 3) bad("family_size", "must be >= 3");
        cfg.n_random_scenarios = static_cast<int>(fs - 3);
    }
    const auto n_random = integer(doc, "n_random_scenarios", cfg.n_random_scenarios);
    if (n_random < 0 || n_random > 10000) bad("n_random_scenarios", "must lie in [0, 10000]");
    cfg.n_random_scenarios = static_cast<int>(n_random);

    const auto n_paths = integer(doc, "n_paths", static_cast<long long>(cfg.n_paths));
    if (n_paths < 1) bad("n_paths", "must be >= 1");
    cfg.n_paths = static_cast<std::size_t>(n_paths);
    if (cfg.command == Command::ldp_check && cfg.n_paths < 1000) bad("n_paths", "ldp-check needs >= 1000 paths");

    const auto seed = integer(doc, "seed", 1);
    if (seed < 0) bad("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) bad("output_dir", "expected a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("psi_hat_b_only")) {
        if (!doc.at("psi_hat_b_only").is_boolean()) bad("psi_hat_b_only", "expected a boolean");
        cfg.psi_hat_b_only = doc.at("psi_hat_b_only").get<bool>();
    }
    if (doc.contains("window")) {
        const auto& w = doc.at("window");
        if (!w.is_object()) bad("window", "expected an object");
        SpatialWindow sw;
        sw.x_lo = finite_number(w, "x_lo", cfg.x0 - 1.0, "window.");
        sw.x_hi = finite_number(w, "x_hi", cfg.x0 + 1.0, "window.");
        const auto nx = integer(w, "nx", 201);
        if (!(sw.x_lo < sw.x_hi)) bad("window.x_hi", "must exceed window.x_lo");
        if (nx < 8 || nx > 100000) bad("window.nx", "must lie in [8, 100000]");
        sw.nx = static_cast<int>(nx);
        cfg.window = sw;
    }
    if (doc.contains("target_file")) {
        if (!doc.at("target_file").is_string()) bad("target_file", "expected a string");
        cfg.target_file = doc.at("target_file").get<std::string>();
    }
    if (cfg.command == Command::rate_function && cfg.target_file.empty()) {
        bad("target_file", "rate-function needs a target path file");
    }
    if (doc.contains("rate")) {
        if (!doc.at("rate").is_string()) bad("rate", "expected a string");
        cfg.rate = doc.at("rate").get<std::string>();
        if (cfg.rate != "lambda" && cfg.rate != "lambda_prime") bad("rate", "must be 'lambda' or 'lambda_prime'");
    }
    const auto u0_nx = integer(doc, "u0_nx", cfg.u0_nx);
    if (u0_nx < 8 || u0_nx > 100000) bad("u0_nx", "must lie in [8, 100000]");
    cfg.u0_nx = static_cast<int>(u0_nx);
    if (doc.contains("event")) cfg.event = parse_event(doc.at("event"));
    const auto cfs = integer(doc, "candidate_family_size", cfg.candidate_family_size);
    if (cfs < 1 || cfs > 1'000'000) bad("candidate_family_size", "must lie in [1, 1e6]");
    cfg.candidate_family_size = static_cast<int>(cfs);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<Command> command) {
    std::ifstream in(file);
    if (!in) fail_argument("cannot open config file '" + file.string() + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail_argument("config file '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, command);
}

}  // namespace gldp::cli
