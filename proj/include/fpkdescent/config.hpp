#pragma once

#include <string>
#include <vector>

#include "fpkdescent/grid.hpp"
#include "fpkdescent/montecarlo.hpp"
#include "fpkdescent/problem.hpp"
#include "fpkdescent/theta.hpp"

namespace fpkd {

/// c0 + sum_m cos_coeffs[m-1] cos(m x) + sin_coeffs[m-1] sin(m x).
struct TrigPoly {
    double c0 = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    double eval(double x) const;
};

/// [problem] section. The trig polynomials are only used when
/// model == "custom_affine": drift = base + eta_gain * eta + gain * u.
struct ProblemConfig {
    std::string model = "theta";
    double horizon = 6.0;
    double beta = 0.5;
    double alpha = 1.0;
    double u_lo = -25.0;
    double u_hi = 25.0;
    std::string penalty = "direct_l2";
    double x_check = kPi;
    double x_mean = 0.0;
    double x_concentration = 0.5;
    double eta_mean = 0.0;
    double eta_std = 0.5;
    double eta_min = -2.0;
    double eta_max = 2.0;
    TrigPoly base;
    TrigPoly eta_gain;
    TrigPoly gain;
    TrigPoly terminal;
};

/// [grid] section; n_t = 0 picks the diffusion stability bound.
struct GridConfig {
    int n_x = 128;
    int n_eta = 16;
    int n_t = 0;
};

/// [algorithm] section.
struct AlgorithmConfig {
    std::string control_class = "markovian";
    double epsilon = 0.05;
    int max_iters = 50;
};

/// [output] section.
struct OutputConfig {
    std::string directory = "out";
    std::vector<double> snapshot_times = {0.0, 0.5, 6.0};
};

struct RunConfig {
    ProblemConfig problem;
    GridConfig grid;
    AlgorithmConfig algorithm;
    SimulationConfig simulation;
    OutputConfig output;
};

/// Strict sectioned key = value text. Unknown sections, unknown keys,
/// duplicate keys and malformed values raise ConfigError with the line.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Canonical text form; parse_config_text(serialize_config(c)) reproduces
/// the same serialization.
std::string serialize_config(const RunConfig& cfg);

ThetaConfig theta_config_from(const ProblemConfig& p);

ProblemSpec build_problem_spec(const RunConfig& cfg);
TensorGrid build_grid(const RunConfig& cfg);
std::vector<double> build_initial_density(const RunConfig& cfg, const TensorGrid& grid);

} // namespace fpkd
