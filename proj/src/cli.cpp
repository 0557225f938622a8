#include "fpkdescent/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpkdescent/descent.hpp"
#include "fpkdescent/errors.hpp"
#include "fpkdescent/io.hpp"
#include "fpkdescent/montecarlo.hpp"
#include "fpkdescent/spectral.hpp"

namespace fpkd {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

ControlField zero_control(const RunConfig& cfg, const TensorGrid& grid) {
    return cfg.algorithm.control_class == "markovian"
               ? ControlField::markovian(grid.n_t(), grid.n_x())
               : ControlField::open_loop(grid.n_t());
}

ControlField constant_control(const RunConfig& cfg, const TensorGrid& grid, double value) {
    const double c = std::clamp(value, cfg.problem.u_lo, cfg.problem.u_hi);
    return cfg.algorithm.control_class == "markovian"
               ? ControlField::markovian(grid.n_t(), grid.n_x(), c)
               : ControlField::open_loop(grid.n_t(), c);
}

double lipschitz_terminal(const ProblemSpec& spec) {
    const int n = 1024;
    const double h = kTwoPi / n;
    double lip = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = h * i;
        const double d = (spec.terminal_cost(x + h) - spec.terminal_cost(x - h)) / (2.0 * h);
        lip = std::max(lip, std::abs(d));
    }
    return lip;
}

/// Two fixed smooth control pairs for the increment-identity check.
void fill_test_pair(const RunConfig& cfg, const TensorGrid& grid, int pair, ControlField& ua,
                    ControlField& ub) {
    const double amp = std::min(1.0, 0.25 * (cfg.problem.u_hi - cfg.problem.u_lo));
    const double omega = kTwoPi / grid.horizon();
    auto clamp = [&](double u) { return std::clamp(u, cfg.problem.u_lo, cfg.problem.u_hi); };
    for (int k = 0; k < grid.n_t(); ++k) {
        const double t = grid.t(k);
        const double c = std::cos(omega * t);
        const double s = std::sin(omega * t + 0.7);
        if (ua.kind() == ControlClass::Markovian) {
            for (int i = 0; i < grid.n_x(); ++i) {
                const double x = grid.x(i);
                const double a = pair == 0 ? 0.0 : 0.5 * amp * std::sin(x) * c;
                const double b = pair == 0 ? amp * std::sin(x)
                                           : amp * (0.3 + 0.4 * std::cos(x)) * s;
                ua.at(k, i) = clamp(a);
                ub.at(k, i) = clamp(b);
            }
        } else {
            ua.at(k) = clamp(pair == 0 ? 0.0 : 0.5 * amp * c);
            ub.at(k) = clamp(pair == 0 ? amp * std::sin(omega * t) : 0.6 * amp * s);
        }
    }
}

std::vector<ProbePoint> probe_set(const TensorGrid& grid) {
    std::vector<int> xs;
    for (int m = 0; m < 4; ++m) xs.push_back(m * grid.n_x() / 4);
    std::vector<int> es;
    for (int m = 0; m < 4; ++m) {
        const int j = grid.n_eta() == 1 ? 0 : m * (grid.n_eta() - 1) / 3;
        if (es.empty() || es.back() != j) es.push_back(j);
    }
    std::vector<ProbePoint> probes;
    for (int j : es)
        for (int i : xs) probes.push_back({i, j});
    return probes;
}

} // namespace

int cmd_solve(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    const TensorGrid grid = build_grid(cfg);
    const ProblemSpec spec = build_problem_spec(cfg);
    const std::vector<double> init = build_initial_density(cfg, grid);
    const ControlField guess = zero_control(cfg, grid);

    const DescentResult res =
        cfg.algorithm.control_class == "markovian"
            ? run_algorithm_1(spec, grid, init, guess, cfg.algorithm.epsilon,
                              cfg.algorithm.max_iters)
            : run_algorithm_2(spec, grid, init, guess, cfg.algorithm.epsilon,
                              cfg.algorithm.max_iters);

    fs::create_directories(out_dir);
    write_cost_history_csv(join_path(out_dir, "cost_history.csv"), res.history);
    write_control_csv(join_path(out_dir, "control.csv"), grid, res.control);
    for (double t : cfg.output.snapshot_times) {
        const int k = grid.time_index(t);
        const auto slab = res.density.clamped_slab(k);
        const std::string label = time_label(t);
        write_density_csv(join_path(out_dir, "density_t" + label + ".csv"), grid, slab);
        write_density_bin(join_path(out_dir, "density_t" + label + ".bin"), grid, slab);
    }

    if (!quiet)
        std::printf("%zu iterates, cost %s -> %s, artifacts in %s\n", res.history.size(),
                    fmt_double(res.history.front().cost.total).c_str(),
                    fmt_double(res.history.back().cost.total).c_str(), out_dir.c_str());
    if (!res.converged) {
        std::fprintf(stderr, "descent did not converge within %d iterations\n",
                     cfg.algorithm.max_iters);
        return 2;
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    const TensorGrid grid = build_grid(cfg);
    const ProblemSpec spec = build_problem_spec(cfg);
    const std::vector<double> init = build_initial_density(cfg, grid);
    std::vector<VerifyRow> rows;

    {
        const DensityField dens = solve_forward(spec, grid, init, zero_control(cfg, grid));
        rows.push_back({"mass_conservation", dens.max_mass_drift(grid), 1e-6, false});
    }

    {
        ProblemSpec heat;
        heat.drift = [](double, double, double, double) { return 0.0; };
        heat.diffusion_coeff = cfg.problem.beta;
        heat.terminal_cost = [](double x) { return std::cos(x); };
        heat.u_lo = heat.u_hi = 0.0;
        heat.penalty = Penalty::none();
        const double tau = 1.0;
        const TensorGrid hg(cfg.grid.n_x, 1,
                            TensorGrid::time_nodes_for_stability(tau, cfg.problem.beta,
                                                                 cfg.grid.n_x),
                            tau);
        const AdjointField adj = solve_backward(heat, hg, ControlField::open_loop(hg.n_t()));
        const double decay = std::exp(-cfg.problem.beta * tau);
        double err = 0.0;
        for (int i = 0; i < hg.n_x(); ++i)
            err = std::max(err, std::abs(adj.p(0, 0, i) - decay * std::cos(hg.x(i))));
        rows.push_back({"heat_backward", err, 1e-3, false});
    }

    {
        double err = 0.0;
        for (int pair = 0; pair < 2; ++pair) {
            ControlField ua = zero_control(cfg, grid);
            ControlField ub = zero_control(cfg, grid);
            fill_test_pair(cfg, grid, pair, ua, ub);
            const DensityField da = solve_forward(spec, grid, init, ua);
            const DensityField db = solve_forward(spec, grid, init, ub);
            const AdjointField adj = solve_backward_cost_to_go(spec, grid, ua, false);
            const double direct = evaluate_cost(spec, grid, db, ub).total -
                                  evaluate_cost(spec, grid, da, ua).total;
            const double formula = exact_increment(spec, grid, adj, db, ub, ua);
            err = std::max(err, std::abs(formula - direct));
        }
        rows.push_back({"increment_identity", err, 1e-3, false});
    }

    {
        const ControlField ref = zero_control(cfg, grid);
        const AdjointField adj = solve_backward_cost_to_go(spec, grid, ref, true);
        const std::vector<ProbePoint> probes = probe_set(grid);
        const auto stats = feynman_kac_probe(spec, grid, ref, probes, 0.0, cfg.simulation);
        const double bias = 2.0 * cfg.simulation.dt_sim * lipschitz_terminal(spec);
        double worst = 0.0;
        for (std::size_t q = 0; q < probes.size(); ++q) {
            const double pde = adj.p(0, probes[q].ieta, probes[q].ix);
            const double allow = std::max(3.0 * stats[q].std_error + bias, 1e-300);
            worst = std::max(worst, std::abs(stats[q].mean - pde) / allow);
        }
        rows.push_back({"fk_probe", worst, 1.0, false});
    }

    {
        const ControlField ref = zero_control(cfg, grid);
        const ControlField target = constant_control(cfg, grid, 1.0);
        const double term_ref =
            evaluate_cost(spec, grid, solve_forward(spec, grid, init, ref), ref).terminal_part;
        const double term_target =
            evaluate_cost(spec, grid, solve_forward(spec, grid, init, target), target)
                .terminal_part;
        const std::vector<double> svals = {0.0, grid.horizon()};
        const auto curve =
            evaluate_needle_curve(spec, grid, target, ref, svals, init, cfg.simulation);
        const double bias = 2.0 * cfg.simulation.dt_sim * lipschitz_terminal(spec);
        const double e0 = std::abs(curve[0].expected_terminal_cost - term_ref) /
                          std::max(3.0 * curve[0].std_error + bias, 1e-300);
        const double eT = std::abs(curve[1].expected_terminal_cost - term_target) /
                          std::max(3.0 * curve[1].std_error + bias, 1e-300);
        rows.push_back({"needle_endpoints", std::max(e0, eT), 1.0, false});
    }

    bool all_pass = true;
    for (auto& r : rows) {
        r.pass = r.error <= r.tolerance;
        all_pass = all_pass && r.pass;
    }
    fs::create_directories(out_dir);
    write_verify_report_csv(join_path(out_dir, "verify_report.csv"), rows);
    if (!quiet)
        for (const auto& r : rows)
            std::printf("%-20s error %-12s tol %-8s %s\n", r.check.c_str(),
                        fmt_double(r.error).c_str(), fmt_double(r.tolerance).c_str(),
                        r.pass ? "pass" : "FAIL");
    return all_pass ? 0 : 2;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    const TensorGrid grid = build_grid(cfg);
    const ProblemSpec spec = build_problem_spec(cfg);
    const std::vector<double> init = build_initial_density(cfg, grid);
    const SlabSampler sampler(grid, init);

    const ControlField ref = zero_control(cfg, grid);
    const ControlField target = constant_control(cfg, grid, 1.0);

    std::vector<McRow> rows;
    const PathBatchStats cost_ref = simulate_cost(spec, grid, ref, sampler, cfg.simulation);
    rows.push_back({"total_cost_zero_control", cost_ref.mean, cost_ref.std_error,
                    cost_ref.n_effective});
    const PathBatchStats cost_tgt = simulate_cost(spec, grid, target, sampler, cfg.simulation);
    rows.push_back({"total_cost_unit_control", cost_tgt.mean, cost_tgt.std_error,
                    cost_tgt.n_effective});

    const std::vector<double> sgrid = default_needle_grid(grid.horizon());
    const auto curve = evaluate_needle_curve(spec, grid, target, ref, sgrid, init,
                                             cfg.simulation);

    fs::create_directories(out_dir);
    write_mc_report_csv(join_path(out_dir, "mc_report.csv"), rows);
    write_needle_csv(join_path(out_dir, "needle_curve.csv"), curve);
    if (!quiet)
        std::printf("%zu switch times, %lld paths each, artifacts in %s\n", curve.size(),
                    cfg.simulation.n_paths, out_dir.c_str());
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"exact-increment descent solver for controlled diffusions on the circle"};
    app.require_subcommand(1);

    struct CommonArgs {
        std::string config;
        std::string out;
        std::uint64_t seed = 0;
        bool quiet = false;
        CLI::Option* seed_opt = nullptr;
    };
    const char* names[3] = {"solve", "verify", "simulate"};
    const char* descs[3] = {"run the descent and export its artifacts",
                            "run the cross-oracle checks and export a report",
                            "Monte Carlo cost estimates and the needle switch curve"};
    CommonArgs args[3];
    CLI::App* subs[3] = {nullptr, nullptr, nullptr};
    for (int i = 0; i < 3; ++i) {
        subs[i] = app.add_subcommand(names[i], descs[i]);
        subs[i]->add_option("--config", args[i].config, "run configuration file")->required();
        subs[i]->add_option("--out", args[i].out, "output directory override");
        args[i].seed_opt = subs[i]->add_option("--seed", args[i].seed, "simulation seed override");
        subs[i]->add_flag("--quiet", args[i].quiet, "suppress progress output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const int which = subs[0]->parsed() ? 0 : subs[1]->parsed() ? 1 : 2;
    try {
        RunConfig cfg = parse_config_file(args[which].config);
        if (args[which].seed_opt->count() > 0) cfg.simulation.seed = args[which].seed;
        const std::string out = args[which].out.empty() ? cfg.output.directory : args[which].out;
        if (which == 0) return cmd_solve(cfg, out, args[which].quiet);
        if (which == 1) return cmd_verify(cfg, out, args[which].quiet);
        return cmd_simulate(cfg, out, args[which].quiet);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 2;
    }
}

} // namespace fpkd
