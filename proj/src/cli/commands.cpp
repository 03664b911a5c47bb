#include "cli/commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/output.hpp"
#include "cli/svg.hpp"
#include "gldp/error.hpp"
#include "gldp/format.hpp"
#include "gldp/forward.hpp"
#include "gldp/limitbw.hpp"
#include "gldp/numeric.hpp"
#include "gldp/ratefn.hpp"
#include "gldp/version.hpp"

namespace gldp::cli {

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) { return format_double(v); }

struct Context {
    const ExperimentConfig& cfg;
    unsigned workers;
    ArtifactSet& out;
    std::ostream& log;
    ordered_json summary = ordered_json::object();
    std::string extra_inputs;  // contents of referenced input files, for the digest
};

TimeGrid grid_of(const ExperimentConfig& cfg) { return make_time_grid(cfg.s, cfg.T, cfg.n_steps); }

ordered_json to_json_number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

void simulate_forward(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto family = scenario_family(cfg.bounds, grid, cfg.n_random_scenarios, cfg.seed);
    const auto phi = solve_limit_ode(cfg.coeffs, cfg.x0, grid);
    const std::size_t n_nodes = static_cast<std::size_t>(grid.n_steps) + 1;

    std::vector<std::string> header{"t", "phi"};
    for (const auto& sc : family) {
        const auto id = std::to_string(sc.id);
        header.insert(header.end(), {"mean_s" + id, "min_s" + id, "max_s" + id});
    }
    std::vector<std::vector<double>> columns;  // 3 per scenario
    ScenarioSamples errors;
    for (const auto& sc : family) {
        std::vector<double> xs(cfg.n_paths * n_nodes);
        std::vector<double> sup_sq(cfg.n_paths);
        parallel_for(cfg.n_paths, ctx.workers, [&](std::size_t p) {
            const auto path = build_g_path(sc, grid, cfg.seed, p);
            const auto fx = solve_forward(cfg.coeffs, cfg.eps, cfg.x0, path, sc, grid, p);
            double worst = 0.0;
            for (std::size_t k = 0; k < n_nodes; ++k) {
                xs[p * n_nodes + k] = fx.x[k];
                worst = std::max(worst, std::abs(fx.x[k] - phi.phi[k]));
            }
            sup_sq[p] = worst * worst;
        });
        std::vector<double> mean(n_nodes), lo(n_nodes), hi(n_nodes);
        std::vector<double> column(cfg.n_paths);
        for (std::size_t k = 0; k < n_nodes; ++k) {
            for (std::size_t p = 0; p < cfg.n_paths; ++p) column[p] = xs[p * n_nodes + k];
            mean[k] = compensated_mean(column);
            lo[k] = *std::min_element(column.begin(), column.end());
            hi[k] = *std::max_element(column.begin(), column.end());
        }
        columns.push_back(std::move(mean));
        columns.push_back(std::move(lo));
        columns.push_back(std::move(hi));
        errors.push_back({sc.id, std::move(sup_sq)});
    }

    CsvWriter paths(header);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        std::vector<std::string> row{fmt(grid.node(static_cast<int>(k))), fmt(phi.phi[k])};
        for (const auto& col : columns) row.push_back(fmt(col[k]));
        paths.add_row(std::move(row));
    }
    ctx.out.write("forward_paths.csv", paths.str(), "csv");

    const auto est = sublinear_estimate(errors);
    CsvWriter err({"scenario_id", "mean_sup_sq_error", "standard_error"});
    for (std::size_t i = 0; i < family.size(); ++i) {
        err.add_row({std::to_string(family[i].id), fmt(est.means[i]), fmt(est.standard_errors[i])});
    }
    ctx.out.write("forward_error.csv", err.str(), "csv");
    ctx.summary["forward_error_p2"] = est.value;
    ctx.summary["argmax_scenario_id"] = est.argmax_id;
    ctx.summary["family_size"] = est.family_size;

    const auto t = grid.nodes();
    std::vector<Series> series{{"phi", t, phi.phi}};
    for (std::size_t i = 0; i < family.size() && i < 3; ++i) {
        series.push_back({"mean s" + std::to_string(family[i].id), t, columns[3 * i]});
    }
    ctx.out.write("forward.svg",
                  svg_line_plot({"Forward paths, eps = " + fmt(cfg.eps), "t", "x"}, series), "svg");
    ctx.log << "forward error (p=2): " << fmt(est.value) << " (scenario " << est.argmax_id << " of "
            << est.family_size << ")\n";
}

void solve_limit(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto phi = solve_limit_ode(cfg.coeffs, cfg.x0, grid);
    const auto psi = solve_limit_backward(cfg.coeffs, cfg.penalty, cfg.bounds, phi, grid);
    const auto n_nodes = static_cast<std::size_t>(grid.n_steps) + 1;

    CsvWriter lim({"t", "phi", "psi", "u_sel"});
    for (std::size_t k = 0; k < n_nodes; ++k) {
        lim.add_row({fmt(grid.node(static_cast<int>(k))), fmt(phi.phi[k]), fmt(psi.psi[k]),
                     k < psi.u_sel.size() ? fmt(psi.u_sel[k]) : std::string()});
    }
    ctx.out.write("limit.csv", lim.str(), "csv");

    const auto family = scenario_family(cfg.bounds, grid, cfg.n_random_scenarios, cfg.seed);
    std::vector<std::string> header{"t"};
    std::vector<LimitMartingale> ms;
    for (const auto& sc : family) {
        header.push_back("M_s" + std::to_string(sc.id));
        const auto path = build_g_path(sc, grid, cfg.seed, 0);
        ms.push_back(build_limit_martingale(cfg.coeffs, cfg.bounds, phi, psi, path, grid, sc.id));
    }
    CsvWriter mcsv(header);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        std::vector<std::string> row{fmt(grid.node(static_cast<int>(k)))};
        for (const auto& m : ms) row.push_back(fmt(m.m[k]));
        mcsv.add_row(std::move(row));
    }
    ctx.out.write("martingale.csv", mcsv.str(), "csv");

    const auto t = grid.nodes();
    ctx.out.write("limit.svg",
                  svg_line_plot({"Limit system", "t", "value"}, {{"phi", t, phi.phi}, {"psi", t, psi.psi}}), "svg");
    ctx.summary["psi_s"] = psi.psi.front();
    ctx.summary["penalty_integral"] = to_json_number(penalty_integral(cfg.penalty, psi, grid));
    ctx.log << "psi(s) = " << fmt(psi.psi.front()) << "\n";
}

SpatialWindow window_for(const ExperimentConfig& cfg, double eps, const TimeGrid& grid) {
    return cfg.window ? *cfg.window : default_window(cfg.coeffs, cfg.bounds, cfg.x0, eps, grid);
}

void solve_vi_cmd(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto window = window_for(cfg, cfg.eps, grid);
    const auto field = solve_vi(cfg.coeffs, cfg.penalty, cfg.bounds, cfg.eps, window, grid);
    std::ostringstream csv;
    write_field_csv(field, csv);
    ctx.out.write("field.csv", csv.str(), "csv");
    ctx.out.write("field.svg", svg_heat_map("u(t, x), eps = " + fmt(cfg.eps), field.u, field.t_nodes, field.x_nodes),
                  "svg");
    ctx.summary["u_at_x0"] = field.value(0, cfg.x0);
    ctx.summary["window"] = {{"x_lo", window.x_lo}, {"x_hi", window.x_hi}, {"nx", window.nx}};
    ctx.log << "u(s, x0) = " << fmt(field.value(0, cfg.x0)) << " on [" << fmt(window.x_lo) << ", "
            << fmt(window.x_hi) << "], nx = " << window.nx << "\n";
}

void verify_convergence(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto family = scenario_family(cfg.bounds, grid, cfg.n_random_scenarios, cfg.seed);
    ConvergenceOptions opts;
    opts.workers = ctx.workers;
    opts.seed = cfg.seed;
    opts.window = cfg.window;
    const auto rep = convergence_experiment(cfg.coeffs, cfg.penalty, cfg.bounds, cfg.x0, cfg.eps_ladder, family,
                                            cfg.n_paths, grid, opts);
    CsvWriter rows({"eps", "e_X", "e_Y", "e_Z", "e_K", "argmax_X", "argmax_Y", "argmax_Z", "argmax_K", "nx", "x_lo",
                    "x_hi"});
    for (const auto& r : rep.rows) {
        rows.add_row({fmt(r.eps), fmt(r.e_X), fmt(r.e_Y), fmt(r.e_Z), fmt(r.e_K), std::to_string(r.argmax_X),
                      std::to_string(r.argmax_Y), std::to_string(r.argmax_Z), std::to_string(r.argmax_K),
                      std::to_string(r.nx), fmt(r.x_lo), fmt(r.x_hi)});
    }
    ctx.out.write("convergence.csv", rows.str(), "csv");
    CsvWriter slopes({"quantity", "slope", "intercept", "r_squared"});
    const std::pair<const char*, const SlopeFit*> fits[] = {
        {"e_X", &rep.slope_X}, {"e_Y", &rep.slope_Y}, {"e_Z", &rep.slope_Z}, {"e_K", &rep.slope_K}};
    for (const auto& [name, fit] : fits) {
        slopes.add_row({name, fmt(fit->slope), fmt(fit->intercept), fmt(fit->r_squared)});
        ctx.summary[std::string("slope_") + name] = to_json_number(fit->slope);
        ctx.log << name << " slope " << fmt(fit->slope) << " (r^2 " << fmt(fit->r_squared) << ")\n";
    }
    ctx.out.write("slopes.csv", slopes.str(), "csv");
    ctx.summary["family_size"] = rep.family_size;
    ctx.summary["n_paths"] = rep.n_paths;

    std::vector<double> eps;
    std::vector<double> ex, ey, ez, ek;
    for (const auto& r : rep.rows) {
        eps.push_back(r.eps);
        ex.push_back(r.e_X);
        ey.push_back(r.e_Y);
        ez.push_back(r.e_Z);
        ek.push_back(r.e_K);
    }
    PlotSpec spec{"Error against eps", "eps", "error", true, true, true};
    ctx.out.write("convergence.svg",
                  svg_line_plot(spec, {{"e_X", eps, ex}, {"e_Y", eps, ey}, {"e_Z", eps, ez}, {"e_K", eps, ek}}),
                  "svg");
}

VIGrid u0_field(const ExperimentConfig& cfg, const TimeGrid& grid, unsigned workers) {
    SpatialWindow w;
    if (cfg.window) {
        w = *cfg.window;
    } else {
        w = default_window(cfg.coeffs, cfg.bounds, cfg.x0, 0.0, grid);
        w.nx = cfg.u0_nx;
    }
    std::vector<double> xs(static_cast<std::size_t>(w.nx));
    for (int i = 0; i < w.nx; ++i) {
        xs[static_cast<std::size_t>(i)] =
            i == w.nx - 1 ? w.x_hi : w.x_lo + (w.x_hi - w.x_lo) * i / static_cast<double>(w.nx - 1);
    }
    return limit_field_u0(cfg.coeffs, cfg.penalty, cfg.bounds, xs, grid, workers);
}

std::vector<double> read_target(Context& ctx, const TimeGrid& grid) {
    const auto text = read_file(ctx.cfg.target_file);
    ctx.extra_inputs += text;
    const auto rows = parse_csv(text);
    const auto n_nodes = static_cast<std::size_t>(grid.n_steps) + 1;
    if (rows.size() != n_nodes + 1) {
        fail_argument("config field 'target_file': expected a header and " + std::to_string(n_nodes) +
                      " rows (one per grid node), found " + std::to_string(rows.empty() ? 0 : rows.size() - 1));
    }
    std::vector<double> values;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const auto& row = rows[k + 1];
        if (row.size() < 2) fail_argument("config field 'target_file': row " + std::to_string(k + 1) + " needs t,value");
        double t = 0, v = 0;
        try {
            t = std::stod(row[0]);
            v = std::stod(row[1]);
        } catch (const std::exception&) {
            fail_argument("config field 'target_file': row " + std::to_string(k + 1) + " is not numeric");
        }
        if (std::abs(t - grid.node(static_cast<int>(k))) > 1e-9 * std::max(1.0, std::abs(grid.T))) {
            fail_argument("config field 'target_file': time column does not match the grid at row " +
                          std::to_string(k + 1));
        }
        values.push_back(v);
    }
    return values;
}

void rate_function(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto target = read_target(ctx, grid);
    RateOptions ro;
    ro.psi_hat_b_only = cfg.psi_hat_b_only;
    RateResult r;
    if (cfg.rate == "lambda") {
        r = lambda_rate(cfg.coeffs, cfg.bounds, cfg.x0, target, grid, ro);
    } else {
        const auto u0 = u0_field(cfg, grid, ctx.workers);
        r = lambda_prime(cfg.coeffs, cfg.bounds, cfg.x0, target, u0, grid, ro);
    }
    ctx.out.write("rate.json", rate_result_json(r) + "\n", "json");
    const auto t = grid.nodes();
    std::vector<Series> series{{"target", t, target}};
    if (!r.infinite) {
        std::vector<double> tc(t.begin(), t.end() - 1);
        series.push_back({"phi_dot", tc, r.optimal_control.phi_dot});
        series.push_back({"eta_dot", tc, r.optimal_control.eta_dot});
    }
    ctx.out.write("rate.svg", svg_line_plot({cfg.rate + " = " + (r.infinite ? "inf" : fmt(r.value)), "t", ""}, series),
                  "svg");
    ctx.summary["rate"] = cfg.rate;
    ctx.summary["value"] = to_json_number(r.value);
    ctx.summary["infinite"] = r.infinite;
    ctx.log << cfg.rate << " = " << (r.infinite ? std::string("inf") : fmt(r.value)) << "\n";
}

void ldp_check(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_of(cfg);
    const auto family = scenario_family(cfg.bounds, grid, cfg.n_random_scenarios, cfg.seed);
    LdpOptions lo;
    lo.workers = ctx.workers;
    lo.seed = cfg.seed;
    const auto curve = empirical_ldp_curve(cfg.event, cfg.coeffs, cfg.penalty, cfg.bounds, cfg.x0, cfg.eps_ladder,
                                           family, cfg.n_paths, grid, lo);
    RateOptions ro;
    ro.psi_hat_b_only = cfg.psi_hat_b_only;
    double rate_inf = 0.0;
    if (cfg.event.applied_to == EventSpec::AppliedTo::forward_minus_x) {
        rate_inf = theoretical_rate_inf(cfg.event, forward_rate_handle(cfg.coeffs, cfg.bounds, cfg.x0, grid, ro),
                                        cfg.candidate_family_size);
    } else {
        const auto u0 = u0_field(cfg, grid, ctx.workers);
        rate_inf = theoretical_rate_inf(
            cfg.event, backward_rate_handle(cfg.coeffs, cfg.penalty, cfg.bounds, cfg.x0, u0, grid, ro),
            cfg.candidate_family_size);
    }

    CsvWriter csv({"eps", "eps_log_capacity", "n_hits", "n_paths", "argmax_scenario_id"});
    std::vector<double> eps, elc, theory;
    for (const auto& p : curve) {
        csv.add_row({fmt(p.eps), fmt(p.eps_log_capacity), std::to_string(p.n_hits), std::to_string(p.n_paths),
                     std::to_string(p.argmax_scenario_id)});
        eps.push_back(p.eps);
        elc.push_back(p.eps_log_capacity);
        theory.push_back(-rate_inf);
    }
    ctx.out.write("ldp_curve.csv", csv.str(), "csv");
    CsvWriter summary({"quantity", "value"});
    summary.add_row({"rate_inf", fmt(rate_inf)});
    summary.add_row({"candidate_family_size", std::to_string(cfg.candidate_family_size)});
    summary.add_row({"family_size", std::to_string(family.size())});
    ctx.out.write("ldp_rate.csv", summary.str(), "csv");
    PlotSpec spec{"eps log capacity", "eps", "eps log C", false, false, true};
    ctx.out.write("ldp.svg", svg_line_plot(spec, {{"empirical", eps, elc}, {"-rate", eps, theory}}), "svg");
    ctx.summary["rate_inf"] = to_json_number(rate_inf);
    ctx.summary["family_size"] = family.size();
    ctx.log << "rate inf = " << fmt(rate_inf) << "\n";
    for (const auto& p : curve) {
        ctx.log << "eps " << fmt(p.eps) << ": eps log C = " << fmt(p.eps_log_capacity) << " (" << p.n_hits
                << " hits)\n";
    }
}

}  // namespace

void run(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log) {
    const std::filesystem::path dir = options.out_dir ? *options.out_dir : std::filesystem::path(cfg.output_dir);
    ArtifactSet out(dir);
    Context ctx{cfg, options.workers == 0 ? default_workers() : options.workers, out, log, {}, {}};
    switch (cfg.command) {
        case Command::simulate_forward: simulate_forward(ctx); break;
        case Command::solve_limit: solve_limit(ctx); break;
        case Command::solve_vi: solve_vi_cmd(ctx); break;
        case Command::verify_convergence: verify_convergence(ctx); break;
        case Command::rate_function: rate_function(ctx); break;
        case Command::ldp_check: ldp_check(ctx); break;
    }
    const std::string name = command_name(cfg.command);
    std::uint64_t digest = fnv1a64(name);
    digest = fnv1a64(cfg.echo.dump(), digest);
    digest = fnv1a64(ctx.extra_inputs, digest);
    out.write_manifest(cfg.echo, cfg.seed, name, digest, ctx.summary);
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"gldp: forward-backward systems under volatility uncertainty"};
    app.set_version_flag("--version", kVersion);
    std::string command, config_file, out_dir;
    unsigned workers = 0;
    app.add_option("command", command,
                   "simulate-forward | solve-limit | solve-vi | verify-convergence | rate-function | ldp-check")
        ->required();
    app.add_option("--config", config_file, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--workers", workers, "worker threads, default all cores")->check(CLI::Range(1u, 4096u));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        const auto cmd = parse_command(command);
        if (!cmd) fail_argument("unknown command '" + command + "'");
        const auto cfg = load_config(config_file, cmd);
        RunOptions opts;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        opts.workers = workers;
        run(cfg, opts, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::invalid_argument ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace gldp::cli
