// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned; failures report the measured
// values rather than loosening the bound.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fpkdescent/descent.hpp"
#include "fpkdescent/errors.hpp"
#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/montecarlo.hpp"
#include "fpkdescent/problem.hpp"
#include "fpkdescent/spectral.hpp"
#include "fpkdescent/theta.hpp"

using namespace fpkd;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double uni(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Degree-two trigonometric polynomial with fixed coefficients.
struct TrigPoly2 {
    double c0, a1, b1, a2, b2;
    double operator()(double x) const {
        return c0 + a1 * std::cos(x) + b1 * std::sin(x) + a2 * std::cos(2 * x) +
               b2 * std::sin(2 * x);
    }
};

TrigPoly2 rand_trig(Rng& rng, double amp) {
    return {uni(rng, -amp, amp), uni(rng, -amp, amp), uni(rng, -amp, amp),
            uni(rng, -amp, amp), uni(rng, -amp, amp)};
}

std::vector<double> wrapped_gaussian_slab(const TensorGrid& grid, double mean,
                                          double std_dev) {
    std::vector<double> slab(grid.slab_size());
    for (int j = 0; j < grid.n_eta(); ++j)
        for (int i = 0; i < grid.n_x(); ++i) {
            double v = 0.0;
            for (int m = -6; m <= 6; ++m) {
                double d = grid.x(i) - mean + kTwoPi * m;
                v += std::exp(-0.5 * d * d / (std_dev * std_dev));
            }
            slab[static_cast<std::size_t>(j) * grid.n_x() + i] = v;
        }
    double mass = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j)
        for (int i = 0; i < grid.n_x(); ++i)
            mass += slab[static_cast<std::size_t>(j) * grid.n_x() + i] * grid.eta_weight(j) *
                    grid.dx();
    for (double& v : slab) v /= mass;
    return slab;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

/// Largest cost increase between consecutive iterates (negative when the
/// whole history descends).
double worst_uphill(const std::vector<IterationRecord>& history) {
    double worst = -1e300;
    for (std::size_t r = 0; r + 1 < history.size(); ++r)
        worst = std::max(worst, history[r + 1].cost.total - history[r].cost.total);
    return worst;
}

/// Converged runs registered for the termination-residual criterion.
struct AcceptedRun {
    std::string tag;
    double epsilon;
    double residual_at_termination;
};

std::vector<AcceptedRun> g_accepted;
int g_not_converged = 0;

void register_run(const std::string& tag, double epsilon, const DescentResult& res) {
    if (!res.converged || res.history.size() < 2) {
        ++g_not_converged;
        return;
    }
    g_accepted.push_back({tag, epsilon, res.history[res.history.size() - 2].residual});
}

struct Criterion {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Shared benchmark run (phase model, default grid, epsilon 0.05): criterion 2
// grades it, criterion 1 includes its monotonicity, criterion 5 its mass
// conservation.

struct BenchmarkState {
    ThetaConfig config;
    TensorGrid grid;
    ThetaReport report;
    double seconds = 0.0;
};

BenchmarkState run_shared_benchmark() {
    ThetaConfig tc;
    TensorGrid grid = default_theta_grid(tc);
    double t0 = now_s();
    ThetaReport report = run_benchmark(tc, grid, 0.05);
    double secs = now_s() - t0;
    register_run("theta_benchmark", 0.05, report.descent);
    return {tc, grid, std::move(report), secs};
}

// ---------------------------------------------------------------------------

Criterion criterion_1(const BenchmarkState& bench) {
    const double limit_s = 300.0;
    const double slack = 1e-9;
    double t0 = now_s();

    Rng rng(20260817);
    double worst = worst_uphill(bench.report.descent.history);
    int n_runs = 1;
    for (int k = 0; k < 25; ++k) {
        double horizon = uni(rng, 0.5, 1.0);
        double beta = uni(rng, 0.3, 0.8);
        TrigPoly2 base = rand_trig(rng, 0.8);
        TrigPoly2 egain = rand_trig(rng, 0.6);
        TrigPoly2 gain = rand_trig(rng, 0.8);
        TrigPoly2 term = rand_trig(rng, 1.0);

        ProblemSpec spec;
        spec.drift = [base, egain, gain](double, double x, double eta, double u) {
            return base(x) + egain(x) * eta + gain(x) * u;
        };
        spec.diffusion_coeff = beta;
        spec.terminal_cost = [term](double x) { return term(x); };
        spec.u_lo = uni(rng, -2.0, -0.3);
        spec.u_hi = uni(rng, 0.3, 2.0);
        double alpha = uni(rng, 0.5, 2.0);
        spec.penalty = k % 3 == 0   ? Penalty::none()
                       : k % 3 == 1 ? Penalty::measure_weighted(alpha)
                                    : Penalty::direct_l2(alpha);
        bool openloop = (k % 5 == 4);
        spec.control_class = openloop ? ControlClass::OpenLoop : ControlClass::Markovian;
        if (k % 4 == 3) {
            double c = uni(rng, 0.1, 0.5);
            double phi = uni(rng, 0.0, kTwoPi);
            spec.running_cost = [c, phi](double t, double x, double) {
                return c * (1.0 + std::cos(x - phi)) * (1.0 + 0.2 * std::sin(t));
            };
        }

        TensorGrid grid(128, 16, TensorGrid::time_nodes_for_stability(horizon, beta, 128),
                        horizon, -1.0, 1.0);
        auto init = wrapped_gaussian_slab(grid, uni(rng, 0.0, kTwoPi), uni(rng, 0.3, 0.9));
        const double eps = 0.01;
        DescentResult res =
            openloop ? run_algorithm_2(spec, grid, init,
                                       ControlField::open_loop(grid.n_t()), eps, 12)
                     : run_algorithm_1(spec, grid, init,
                                       ControlField::markovian(grid.n_t(), grid.n_x()), eps,
                                       12);
        worst = std::max(worst, worst_uphill(res.history));
        register_run("random_" + std::to_string(k), eps, res);
        ++n_runs;
    }

    double secs = now_s() - t0 + bench.seconds;
    Criterion c;
    c.pass = worst <= slack && secs < limit_s;
    std::ostringstream d;
    d << n_runs << " runs (25 randomized + benchmark), worst cost increase " << fmt(worst)
      << " (slack 1e-9); " << fmt(secs) << "s (limit 300s)";
    c.detail = d.str();
    return c;
}

Criterion criterion_2(const BenchmarkState& bench) {
    const double limit_s = 120.0;
    const auto& hist = bench.report.descent.history;
    const double initial = hist.front().cost.total;
    const double final_cost = hist.back().cost.total;
    const double drop1 = hist.size() > 1
                             ? (initial - hist[1].cost.total) / std::abs(initial)
                             : 0.0;
    const double ratio = final_cost / initial;
    const int iterations = static_cast<int>(hist.size()) - 1;

    const int n_t = bench.grid.n_t();
    const double mean = circular_mean_x(bench.grid,
                                        bench.report.descent.density.clamped_slab(n_t - 1));
    const double mean_dist = std::abs(std::remainder(mean - bench.config.x_check, kTwoPi));

    const bool monotone = worst_uphill(hist) <= 1e-9;
    const bool drop_ok = drop1 >= 0.70;
    const bool ratio_ok = ratio <= 0.25;
    const bool iters_ok = bench.report.descent.converged && iterations <= 5;
    const bool time_ok = bench.seconds < limit_s;

    Criterion c;
    c.pass = monotone && drop_ok && ratio_ok && iters_ok && time_ok;
    std::ostringstream d;
    d << "cost " << fmt(initial) << " -> " << fmt(final_cost) << " in " << iterations
      << " iterations; monotone " << (monotone ? "yes" : "NO") << "; first-iteration drop "
      << fmt(100.0 * drop1) << "% (need >= 70%); final/initial " << fmt(ratio)
      << " (need <= 0.25); iterations " << iterations << " (need <= 5); terminal circular "
      << "mean " << fmt(mean_dist) << " rad from the target phase; " << fmt(bench.seconds)
      << "s (limit 120s)";
    c.detail = d.str();
    return c;
}

ControlField trig_control(const TensorGrid& grid, double A, double phi, double om, double psi,
                          int m, double B, double chi, double nu) {
    ControlField u = ControlField::markovian(grid.n_t(), grid.n_x());
    for (int k = 0; k < grid.n_t(); ++k) {
        double t = grid.t(k);
        for (int i = 0; i < grid.n_x(); ++i) {
            double x = grid.x(i);
            u.at(k, i) = A * std::sin(x + phi) * (1.0 + 0.3 * std::cos(om * t + psi)) +
                         B * std::cos(m * x + chi) * (1.0 + 0.2 * std::sin(nu * t));
        }
    }
    return u;
}

Criterion criterion_3() {
    const double limit_s = 180.0;
    const double tol = 1e-3;
    double t0 = now_s();

    ThetaConfig tc;
    ProblemSpec spec = build_theta_spec(tc);

    auto pair_error = [&](int n_x, int p, int q) {
        TensorGrid grid(n_x, 16,
                        TensorGrid::time_nodes_for_stability(tc.horizon, tc.beta, n_x),
                        tc.horizon, tc.eta_min, tc.eta_max);
        auto init = theta_initial_slab(tc, grid);
        Rng rp(3000 + p);
        ControlField u_ref = trig_control(grid, uni(rp, 0.3, 1.0), uni(rp, 0.0, kTwoPi),
                                          uni(rp, 0.5, 2.0), uni(rp, 0.0, kTwoPi), 1, 0.0,
                                          0.0, 0.0);
        Rng rq(4000 + q);
        ControlField u_tgt = trig_control(grid, uni(rq, 0.3, 1.0), uni(rq, 0.0, kTwoPi),
                                          uni(rq, 0.5, 2.0), uni(rq, 0.0, kTwoPi),
                                          1 + (q % 2), uni(rq, 0.4, 1.2),
                                          uni(rq, 0.0, kTwoPi), uni(rq, 0.5, 2.0));
        DensityField da = solve_forward(spec, grid, init, u_ref);
        DensityField db = solve_forward(spec, grid, init, u_tgt);
        AdjointField adj = solve_backward_cost_to_go(spec, grid, u_ref, false);
        double direct = evaluate_cost(spec, grid, db, u_tgt).total -
                        evaluate_cost(spec, grid, da, u_ref).total;
        double formula = exact_increment(spec, grid, adj, db, u_tgt, u_ref);
        return std::abs(formula - direct);
    };

    double worst = 0.0;
    double err128_pair0 = 0.0;
    for (int q = 0; q < 10; ++q) {
        double e = pair_error(128, q / 2, q);
        if (q == 0) err128_pair0 = e;
        worst = std::max(worst, e);
    }
    double err64_pair0 = pair_error(64, 0, 0);

    double secs = now_s() - t0;
    Criterion c;
    c.pass = worst <= tol && err128_pair0 < err64_pair0 && secs < limit_s;
    std::ostringstream d;
    d << "10 pairs at n_x 128, worst |formula - direct| " << fmt(worst) << " (tol 1e-3); "
      << "doubling 64 -> 128 shrinks pair-0 error " << fmt(err64_pair0) << " -> "
      << fmt(err128_pair0) << "; " << fmt(secs) << "s (limit 180s)";
    c.detail = d.str();
    return c;
}

Criterion criterion_4() {
    const double limit_s = 120.0;
    double t0 = now_s();

    ThetaConfig tc;
    ProblemSpec spec = build_theta_spec(tc);
    TensorGrid grid = default_theta_grid(tc);
    ControlField ref = ControlField::markovian(grid.n_t(), grid.n_x());
    AdjointField adj = solve_backward_cost_to_go(spec, grid, ref, true);

    std::vector<ProbePoint> probes;
    for (int j : {0, 5, 10, 15})
        for (int i : {0, 32, 64, 96}) probes.push_back({i, j});

    SimulationConfig sim;
    sim.n_paths = 100000;
    sim.dt_sim = 0.02;
    sim.seed = 90210;
    auto stats = feynman_kac_probe(spec, grid, ref, probes, 0.0, sim);
    const double lip = 1.0;
    double worst_ratio = 0.0;
    for (std::size_t q = 0; q < probes.size(); ++q) {
        double pde = adj.p(0, probes[q].ieta, probes[q].ix);
        double allow = 3.0 * stats[q].std_error + 2.0 * sim.dt_sim * lip;
        worst_ratio = std::max(worst_ratio, std::abs(stats[q].mean - pde) / allow);
    }

    ProblemSpec heat;
    heat.drift = [](double, double, double, double) { return 0.0; };
    heat.diffusion_coeff = tc.beta;
    heat.terminal_cost = [](double x) { return std::cos(x); };
    heat.u_lo = heat.u_hi = 0.0;
    heat.penalty = Penalty::none();
    const double tau = 1.0;
    TensorGrid hg(128, 1, TensorGrid::time_nodes_for_stability(tau, tc.beta, 128), tau);
    AdjointField hadj = solve_backward(heat, hg, ControlField::open_loop(hg.n_t()));
    double heat_err = 0.0;
    for (int i = 0; i < hg.n_x(); ++i)
        heat_err = std::max(heat_err, std::abs(hadj.p(0, 0, i) -
                                               std::exp(-tc.beta * tau) * std::cos(hg.x(i))));

    double secs = now_s() - t0;
    Criterion c;
    c.pass = worst_ratio <= 1.0 && heat_err <= 1e-3 && secs < limit_s;
    std::ostringstream d;
    d << "16 probes, 100000 paths: worst |mc - pde| at " << fmt(100.0 * worst_ratio)
      << "% of 3se + 2 dt allowance; analytic heat backward max error " << fmt(heat_err)
      << " (tol 1e-3); " << fmt(secs) << "s (limit 120s)";
    c.detail = d.str();
    return c;
}

Criterion criterion_5(const BenchmarkState& bench) {
    double t0 = now_s();
    const double drift_tol = 1e-6;
    double mass_drift = bench.report.descent.density.max_mass_drift(bench.grid);

    const double beta = 1.0;
    const double tau = 0.01;
    const double r = 0.6;
    const int n_t = 51;
    auto analytic = [&](double x, double t) {
        double v = 1.0;
        for (int k = 1; k <= 200; ++k)
            v += 2.0 * std::pow(r, k) * std::exp(-beta * k * k * t) * std::cos(k * x);
        return v / kTwoPi;
    };
    auto heat_error = [&](int n_x) {
        TensorGrid grid(n_x, 1, n_t, tau, 0.0, 0.0);
        ProblemSpec spec;
        spec.drift = [](double, double, double, double) { return 0.0; };
        spec.diffusion_coeff = beta;
        spec.terminal_cost = [](double) { return 0.0; };
        spec.u_lo = spec.u_hi = 0.0;
        spec.penalty = Penalty::none();
        std::vector<double> init(grid.slab_size());
        for (int i = 0; i < n_x; ++i) init[i] = analytic(grid.x(i), 0.0);
        double mass = 0.0;
        for (double v : init) mass += v * grid.dx();
        for (double& v : init) v /= mass;
        DensityField dens = solve_forward(spec, grid, init,
                                          ControlField::markovian(grid.n_t(), grid.n_x()));
        double err = 0.0;
        auto last = dens.slab(grid.n_t() - 1);
        for (int i = 0; i < n_x; ++i)
            err = std::max(err, std::abs(last[i] - analytic(grid.x(i), tau)));
        return err;
    };
    double err32 = heat_error(32);
    double err64 = heat_error(64);
    double ratio = err32 / err64;

    double secs = now_s() - t0;
    Criterion c;
    c.pass = mass_drift <= drift_tol && ratio >= 1e4 && secs < 60.0;
    std::ostringstream d;
    d << "benchmark-run mass drift " << fmt(mass_drift) << " (tol 1e-6); heat error "
      << fmt(err32) << " at n_x 32 vs " << fmt(err64) << " at 64, ratio " << fmt(ratio)
      << " (need >= 1e4); " << fmt(secs) << "s";
    c.detail = d.str();
    return c;
}

Criterion criterion_6() {
    const double limit_s = 120.0;
    double t0 = now_s();

    ThetaConfig tc;
    ProblemSpec spec = build_theta_spec(tc);
    TensorGrid grid = default_theta_grid(tc);
    auto init = theta_initial_slab(tc, grid);
    ControlField u_ref = ControlField::markovian(grid.n_t(), grid.n_x(), 0.0);
    ControlField u_tgt = ControlField::markovian(grid.n_t(), grid.n_x(), 0.5);
    double term_ref =
        evaluate_cost(spec, grid, solve_forward(spec, grid, init, u_ref), u_ref).terminal_part;
    double term_tgt =
        evaluate_cost(spec, grid, solve_forward(spec, grid, init, u_tgt), u_tgt).terminal_part;

    SimulationConfig sim;
    sim.n_paths = 10000;
    sim.dt_sim = 0.005;
    sim.seed = 101;
    auto s_grid = default_needle_grid(tc.horizon);
    auto curve = evaluate_needle_curve(spec, grid, u_tgt, u_ref, s_grid, init, sim);

    double d0 = std::abs(curve.front().expected_terminal_cost - term_ref);
    double dT = std::abs(curve.back().expected_terminal_cost - term_tgt);
    double se0 = curve.front().std_error;
    double seT = curve.back().std_error;
    double max_slope = 0.0;
    for (std::size_t n = 0; n + 1 < curve.size(); ++n)
        max_slope = std::max(max_slope, std::abs(curve[n + 1].expected_terminal_cost -
                                                 curve[n].expected_terminal_cost) /
                                            (curve[n + 1].s - curve[n].s));

    double secs = now_s() - t0;
    Criterion c;
    const double slope_bound = 5.0;
    c.pass = d0 <= 3.0 * se0 && dT <= 3.0 * seT && max_slope < slope_bound && secs < limit_s;
    std::ostringstream d;
    d << "33 switch times, 10000 paths: |endpoint - pde| " << fmt(d0) << " vs 3se "
      << fmt(3.0 * se0) << " at s=0, " << fmt(dT) << " vs " << fmt(3.0 * seT)
      << " at s=T; max |dmean/ds| " << fmt(max_slope) << " (bound 5); " << fmt(secs)
      << "s (limit 120s)";
    c.detail = d.str();
    return c;
}

Criterion criterion_7() {
    const double limit_s = 60.0;
    double t0 = now_s();

    const double alpha = 1.0, beta = 0.05, horizon = 1.0, y0 = 0.8;
    ProblemSpec spec;
    spec.drift = [](double, double, double, double u) { return u; };
    spec.diffusion_coeff = beta;
    const double a = 2.0, b = 2.9;
    spec.terminal_cost = [a, b](double x) {
        double y = std::abs(std::remainder(x - kPi, kTwoPi));
        if (y <= a) return y * y;
        if (y >= b) return b * b;
        double tau = (y - a) / (b - a);
        double s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
        return (1.0 - s) * y * y + s * b * b;
    };
    spec.u_lo = -5.0;
    spec.u_hi = 5.0;
    spec.penalty = Penalty::direct_l2(alpha);
    spec.control_class = ControlClass::OpenLoop;

    TensorGrid grid(128, 1, TensorGrid::time_nodes_for_stability(horizon, beta, 128), horizon,
                    0.0, 0.0);
    std::vector<double> init(grid.slab_size());
    const double sigma0 = 0.25;
    double mass = 0.0;
    for (int i = 0; i < grid.n_x(); ++i) {
        double v = 0.0;
        for (int m = -4; m <= 4; ++m) {
            double d = grid.x(i) - (kPi + y0) + kTwoPi * m;
            v += std::exp(-0.5 * d * d / (sigma0 * sigma0));
        }
        init[i] = v;
        mass += v * grid.dx();
    }
    for (double& v : init) v /= mass;

    const double eps = 5e-4;
    DescentResult res =
        run_algorithm_2(spec, grid, init, ControlField::open_loop(grid.n_t()), eps, 40);
    register_run("lq_openloop", eps, res);

    // Riccati oracle on an independent fine grid: dP/dt = 2 P^2 / alpha with
    // P(T) = 1, mean rolled forward under u = -2 P m / alpha.
    const int n_fine = 4000;
    double dtf = horizon / n_fine;
    std::vector<double> p_fine(n_fine + 1);
    p_fine[n_fine] = 1.0;
    auto p_rhs = [&](double p) { return 2.0 * p * p / alpha; };
    for (int n = n_fine; n > 0; --n) {
        double p = p_fine[n];
        double k1 = p_rhs(p);
        double k2 = p_rhs(p - 0.5 * dtf * k1);
        double k3 = p_rhs(p - 0.5 * dtf * k2);
        double k4 = p_rhs(p - dtf * k3);
        p_fine[n - 1] = p - dtf / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    std::vector<double> m_fine(n_fine + 1), u_fine(n_fine + 1);
    m_fine[0] = y0;
    for (int n = 0; n < n_fine; ++n) {
        auto m_rhs = [&](double mv, double pv) { return -2.0 * pv * mv / alpha; };
        double pm = 0.5 * (p_fine[n] + p_fine[n + 1]);
        double k1 = m_rhs(m_fine[n], p_fine[n]);
        double k2 = m_rhs(m_fine[n] + 0.5 * dtf * k1, pm);
        double k3 = m_rhs(m_fine[n] + 0.5 * dtf * k2, pm);
        double k4 = m_rhs(m_fine[n] + dtf * k3, p_fine[n + 1]);
        m_fine[n + 1] = m_fine[n] + dtf / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    for (int n = 0; n <= n_fine; ++n) u_fine[n] = -2.0 * p_fine[n] * m_fine[n] / alpha;

    double num = 0.0, den = 0.0;
    for (int k = 0; k < grid.n_t(); ++k) {
        double pos = grid.t(k) / horizon * n_fine;
        int n = std::min(static_cast<int>(pos), n_fine - 1);
        double frac = pos - n;
        double oracle = (1.0 - frac) * u_fine[n] + frac * u_fine[n + 1];
        double wt = (k == 0 || k == grid.n_t() - 1) ? 0.5 : 1.0;
        num += wt * (res.control.at(k) - oracle) * (res.control.at(k) - oracle);
        den += wt * oracle * oracle;
    }
    double rel_l2 = std::sqrt(num / den);

    double secs = now_s() - t0;
    Criterion c;
    c.pass = res.converged && rel_l2 <= 0.02 && secs < limit_s;
    std::ostringstream d;
    d << "open-loop control vs Riccati oracle: relative L2 " << fmt(100.0 * rel_l2)
      << "% (tol 2%), converged " << (res.converged ? "yes" : "NO") << " in "
      << res.history.size() - 1 << " iterations; " << fmt(secs) << "s (limit 60s)";
    c.detail = d.str();
    return c;
}

Criterion criterion_8() {
    Criterion c;
    double worst_margin = 1e300;
    std::string worst_tag = "none";
    for (const auto& run : g_accepted) {
        double margin = run.epsilon - run.residual_at_termination;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_tag = run.tag;
        }
    }
    c.pass = !g_accepted.empty() && worst_margin > 0.0;
    std::ostringstream d;
    d << g_accepted.size() << " accepted runs, every termination residual < its epsilon "
      << "(tightest: " << worst_tag << ", epsilon - residual = " << fmt(worst_margin)
      << "); " << g_not_converged << " runs hit the iteration cap";
    c.detail = d.str();
    return c;
}

} // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);

    BenchmarkState bench = run_shared_benchmark();

    struct Entry {
        int id;
        const char* name;
        std::function<Criterion()> fn;
    };
    const std::vector<Entry> entries = {
        {1, "monotone descent", [&] { return criterion_1(bench); }},
        {2, "benchmark cost reduction", [&] { return criterion_2(bench); }},
        {3, "exact increment identity", [] { return criterion_3(); }},
        {4, "feynman-kac cross check", [] { return criterion_4(); }},
        {5, "conservation and spectral convergence", [&] { return criterion_5(bench); }},
        {6, "needle curve endpoints and slope", [] { return criterion_6(); }},
        {7, "lq open loop vs riccati oracle", [] { return criterion_7(); }},
        {8, "residual below epsilon at termination", [] { return criterion_8(); }},
    };

    int n_pass = 0;
    for (const auto& entry : entries) {
        Criterion c;
        try {
            c = entry.fn();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        std::printf("[ACCEPT] %d %s: %s | %s\n", entry.id, entry.name,
                    c.pass ? "PASS" : "FAIL", c.detail.c_str());
        if (c.pass) ++n_pass;
    }

    std::printf("acceptance: %d/8 criteria passed\n", n_pass);
    return n_pass == 8 ? 0 : 1;
}
