#pragma once

#include <span>
#include <vector>

#include "fpkdescent/descent.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/problem.hpp"

namespace fpkd {

/// Phase-model benchmark parameters. The initial joint density is a wrapped
/// Gaussian in x times a truncated Gaussian in eta, normalized on the grid.
struct ThetaConfig {
    double horizon = 6.0;
    double alpha = 1.0;
    double beta = 0.5;
    double x_check = kPi;
    double u_lo = -25.0;
    double u_hi = 25.0;
    double x_mean = 0.0;
    double x_concentration = 0.5;
    double eta_mean = 0.0;
    double eta_std = 0.5;
    double eta_min = -2.0;
    double eta_max = 2.0;
};

/// Drift (1 - cos x) + (1 + cos x)(eta + u), terminal cost 1 - cos(x - x_check),
/// quadratic control energy penalty, Markovian class.
ProblemSpec build_theta_spec(const ThetaConfig& cfg);

/// Grid with the config's eta window and the time resolution set by the
/// diffusion stability bound.
TensorGrid default_theta_grid(const ThetaConfig& cfg, int n_x = 128, int n_eta = 16);

/// Initial joint density slab, normalized to discrete mass 1.
std::vector<double> theta_initial_slab(const ThetaConfig& cfg, const TensorGrid& grid);

struct ThetaReport {
    DescentResult descent;
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> snapshots;
};

/// Runs the Markovian descent from u = 0 and captures density snapshots at
/// t = 0, 0.5 and T (nearest grid nodes, clamped nonnegative for export).
ThetaReport run_benchmark(const ThetaConfig& cfg, const TensorGrid& grid, double epsilon);

/// Circular mean of the x-marginal of a density slab, in [0, 2pi).
double circular_mean_x(const TensorGrid& grid, std::span<const double> slab);

} // namespace fpkd
