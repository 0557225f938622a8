#include "fpkdescent/theta.hpp"

#include <cmath>
#include <cstddef>

#include "fpkdescent/errors.hpp"

namespace fpkd {

ProblemSpec build_theta_spec(const ThetaConfig& cfg) {
    if (cfg.horizon <= 0.0) throw InvalidSpec("horizon must be positive");
    if (cfg.x_concentration <= 0.0 || cfg.eta_std <= 0.0)
        throw InvalidSpec("initial density widths must be positive");
    ProblemSpec spec;
    spec.drift = [](double, double x, double eta, double u) {
        return (1.0 - std::cos(x)) + (1.0 + std::cos(x)) * (eta + u);
    };
    spec.diffusion_coeff = cfg.beta;
    const double xc = cfg.x_check;
    spec.terminal_cost = [xc](double x) { return 1.0 - std::cos(x - xc); };
    spec.u_lo = cfg.u_lo;
    spec.u_hi = cfg.u_hi;
    spec.penalty = Penalty::direct_l2(cfg.alpha);
    spec.control_class = ControlClass::Markovian;
    return spec;
}

TensorGrid default_theta_grid(const ThetaConfig& cfg, int n_x, int n_eta) {
    const int n_t = TensorGrid::time_nodes_for_stability(cfg.horizon, cfg.beta, n_x);
    return TensorGrid(n_x, n_eta, n_t, cfg.horizon, cfg.eta_min, cfg.eta_max);
}

std::vector<double> theta_initial_slab(const ThetaConfig& cfg, const TensorGrid& grid) {
    const int n_x = grid.n_x();
    const int n_eta = grid.n_eta();
    const double sx = cfg.x_concentration;
    const double se = cfg.eta_std;

    std::vector<double> xfac(static_cast<std::size_t>(n_x));
    for (int i = 0; i < n_x; ++i) {
        const double x = grid.x(i);
        double v = 0.0;
        for (int m = -5; m <= 5; ++m) {
            const double d = x - cfg.x_mean + kTwoPi * m;
            v += std::exp(-0.5 * d * d / (sx * sx));
        }
        xfac[static_cast<std::size_t>(i)] = v;
    }

    std::vector<double> efac(static_cast<std::size_t>(n_eta));
    for (int j = 0; j < n_eta; ++j) {
        const double d = grid.eta(j) - cfg.eta_mean;
        efac[static_cast<std::size_t>(j)] = std::exp(-0.5 * d * d / (se * se));
    }

    std::vector<double> slab(grid.slab_size());
    double mass = 0.0;
    for (int j = 0; j < n_eta; ++j) {
        const double wj = grid.eta_weight(j);
        for (int i = 0; i < n_x; ++i) {
            const double v = efac[static_cast<std::size_t>(j)] * xfac[static_cast<std::size_t>(i)];
            slab[static_cast<std::size_t>(j) * n_x + i] = v;
            mass += v * wj * grid.dx();
        }
    }
    if (mass <= 0.0) throw InvalidSpec("initial density has no mass on this grid");
    for (double& v : slab) v /= mass;
    return slab;
}

ThetaReport run_benchmark(const ThetaConfig& cfg, const TensorGrid& grid, double epsilon) {
    const ProblemSpec spec = build_theta_spec(cfg);
    const std::vector<double> init = theta_initial_slab(cfg, grid);
    const ControlField guess = ControlField::markovian(grid.n_t(), grid.n_x());

    ThetaReport report{run_algorithm_1(spec, grid, init, guess, epsilon), {}, {}};

    const double wished[3] = {0.0, 0.5, cfg.horizon};
    for (double t : wished) {
        const int k = grid.time_index(t);
        report.snapshot_times.push_back(grid.t(k));
        const auto s = report.descent.density.clamped_slab(k);
        report.snapshots.emplace_back(s.begin(), s.end());
    }
    return report;
}

double circular_mean_x(const TensorGrid& grid, std::span<const double> slab) {
    if (slab.size() != grid.slab_size()) throw ShapeMismatch("slab does not match grid");
    double c = 0.0;
    double s = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        const double wj = grid.eta_weight(j);
        for (int i = 0; i < grid.n_x(); ++i) {
            const double rho = slab[static_cast<std::size_t>(j) * grid.n_x() + i];
            c += rho * wj * std::cos(grid.x(i));
            s += rho * wj * std::sin(grid.x(i));
        }
    }
    double ang = std::atan2(s, c);
    if (ang < 0.0) ang += kTwoPi;
    return ang;
}

} // namespace fpkd
